#include <algorithm>
#include <memory>

#include "fishbone/axes.hpp"
#include "fishbone/errors.hpp"
#include "fishbone/gmm.hpp"
#include "fishbone/simulator.hpp"
#include "fishbone/strategies.hpp"

namespace fishbone {

void build_sub_structure(ClusterPlan& plan, const PlanarTopology& topology, RadioModel radio, double angle_deg) {
    plan.rotation_angle = angle_deg;
    plan.regions = partition_sub_regions(topology, plan.members, plan.main_axis, angle_deg, radio, plan.cluster);
    plan.sub_axes = build_sub_axes(plan.regions, topology);
    std::erase_if(plan.chains, [](const RelayChain& c) { return c.kind == ChainKind::Sub; });
    plan.unreachable_regions.clear();
    for (std::size_t i = 0; i < plan.regions.size(); ++i) {
        if (!plan.sub_axes[i]) continue;
        auto res = select_relays(plan.regions[i], plan.main_axis, *plan.sub_axes[i], topology, radio);
        if (res.unreachable) {
            plan.unreachable_regions.push_back(i);
            continue;
        }
        if (res.relays.empty()) continue;
        plan.chains.push_back({ChainKind::Sub, plan.cluster, i, std::move(res.relays)});
    }
}

std::vector<RelayChain> build_spine(const ClusterPlan& plan, const PlanarTopology& topology, RadioModel radio,
                                    DeviceId source) {
    const double l = plan.main_axis.half_length;
    const double start = std::clamp(plan.main_axis.along(topology.position(source)), -l, l);
    std::vector<RelayChain> out;
    auto plus = select_spine(plan.members, plan.main_axis, start, true, topology, radio);
    auto minus = select_spine(plan.members, plan.main_axis, start, false, topology, radio, plus);
    if (!plus.empty()) out.push_back({ChainKind::Spine, plan.cluster, std::nullopt, std::move(plus)});
    if (!minus.empty()) out.push_back({ChainKind::Spine, plan.cluster, std::nullopt, std::move(minus)});
    return out;
}

AngleSearchResult search_rotation_angle(const PlanarTopology& topology, const UnitDiskGraph& graph,
                                        std::span<const DeviceId> cluster, const Axis& main_axis, DeviceId source,
                                        std::span<const double> grid, int max_hops, std::size_t cluster_index,
                                        std::span<const RelayChain> fixed_chains) {
    if (grid.empty()) throw InvalidArgument("angle grid is empty");
    const RadioModel radio = graph.radio();
    std::vector<std::size_t> slots;
    slots.reserve(cluster.size());
    for (DeviceId id : cluster) slots.push_back(topology.index_of(id));

    AngleSearchResult result;
    result.coverage = -1.0;
    SimOptions sim;
    sim.max_hops = max_hops;
    for (double angle : grid) {
        auto plan = std::make_shared<FishbonePlan>();
        plan->range = radio.range;
        plan->source = source;
        ClusterPlan cp;
        cp.cluster = cluster_index;
        cp.members.assign(cluster.begin(), cluster.end());
        cp.main_axis = main_axis;
        build_sub_structure(cp, topology, radio, angle);
        plan->clusters.push_back(std::move(cp));
        plan->extra_chains.assign(fixed_chains.begin(), fixed_chains.end());

        const auto strategy = fifo_strategy(plan);
        const SimOutcome out = simulate(topology, graph, *strategy, source, sim);
        std::size_t hit = 0;
        for (std::size_t s : slots) hit += out.covered[s];
        const double cov = slots.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(slots.size());
        result.coverage_per_angle.push_back(cov);
        if (cov > result.coverage) {
            result.coverage = cov;
            result.angle = angle;
        }
    }
    return result;
}

FishbonePlan build_fishbone_plan(const PlanarTopology& topology, const UnitDiskGraph& graph, DeviceId source,
                                 const PlanOptions& options) {
    if (options.k < 1) throw InvalidArgument("K must be >= 1");
    if (!topology.contains(source)) throw NotFoundError("unknown source device " + std::to_string(source));
    const RadioModel radio = graph.radio();
    const std::vector<double> grid = options.angle_grid.empty() ? default_angle_grid() : options.angle_grid;

    FishbonePlan plan;
    plan.k = options.k;
    plan.range = radio.range;
    plan.source = source;

    const ClusterAssignment assignment = cluster_topology(topology, options.k);
    const auto groups = assignment.members();
    EmOptions em;
    em.tol = options.em_tol;
    em.max_iter = options.em_max_iter;
    em.seed = options.seed;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        ClusterPlan cp;
        cp.cluster = c;
        std::vector<Vec2> pts;
        for (std::size_t slot : groups[c]) {
            cp.members.push_back(topology.at(slot).id);
            pts.push_back(topology.at(slot).pos);
        }
        const GmmFit fit = em_fit(pts, 1, em);
        cp.main_axis = principal_axis(fit.components.front().mean, fit.components.front().cov, pts);
        cp.chains = build_spine(cp, topology, radio, source);
        plan.clusters.push_back(std::move(cp));
    }

    std::vector<RelayChain> spines;
    for (const auto& cp : plan.clusters) spines.insert(spines.end(), cp.chains.begin(), cp.chains.end());
    for (auto& cp : plan.clusters) {
        const auto best = search_rotation_angle(topology, graph, cp.members, cp.main_axis, source, grid,
                                                options.max_hops, cp.cluster, spines);
        build_sub_structure(cp, topology, radio, best.angle);
        cp.angle_coverage = best.coverage;
        cp.angle_grid = grid;
        cp.angle_sweep = best.coverage_per_angle;
    }
    return plan;
}

FishbonePlan build_fishbone_plan(const PlanarTopology& topology, RadioModel radio, DeviceId source,
                                 const PlanOptions& options) {
    const UnitDiskGraph graph(topology, radio);
    return build_fishbone_plan(topology, graph, source, options);
}

FishbonePlan respine(const FishbonePlan& plan, const PlanarTopology& topology, RadioModel radio, DeviceId source) {
    if (!topology.contains(source)) throw NotFoundError("unknown source device " + std::to_string(source));
    FishbonePlan out = plan;
    out.source = source;
    for (auto& cp : out.clusters) {
        std::erase_if(cp.chains, [](const RelayChain& c) { return c.kind == ChainKind::Spine; });
        auto spine = build_spine(cp, topology, radio, source);
        cp.chains.insert(cp.chains.begin(), spine.begin(), spine.end());
    }
    return out;
}

}  // namespace fishbone
