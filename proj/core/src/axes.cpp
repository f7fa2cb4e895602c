#include "fishbone/axes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fishbone/errors.hpp"
#include "fishbone/gmm.hpp"

namespace fishbone {

Axis principal_axis(Vec2 mean, const SymMat2& cov, std::span<const Vec2> points) {
    Axis axis;
    axis.anchor = mean;
    const Eigen2 eig = eigen_decompose(cov);
    axis.eigenvalue = eig.lambda_major;
    const double gap = eig.lambda_major - eig.lambda_minor;
    if (gap < 1e-9 * std::max(1.0, std::abs(eig.lambda_major))) {
        axis.isotropic = true;
        axis.direction = {1.0, 0.0};
    } else {
        axis.direction = eig.major;
    }
    bool distinct = false;
    for (const Vec2& p : points) {
        axis.half_length = std::max(axis.half_length, std::abs(axis.along(p)));
        if (!distinct && !(p == points.front())) distinct = true;
    }
    axis.degenerate = !distinct;
    return axis;
}

std::size_t strip_count(const Axis& main_axis, RadioModel radio) {
    const double k = std::ceil(2.0 * main_axis.half_length / (2.0 * radio.range) - 1e-12);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::max(k, 1.0)));
}

namespace {

double cot_deg(double angle_deg) {
    const double t = deg_to_rad(angle_deg);
    return std::cos(t) / std::sin(t);
}

}  // namespace

std::vector<SubRegion> partition_sub_regions(const PlanarTopology& topology, std::span<const DeviceId> members,
                                             const Axis& main_axis, double angle_deg, RadioModel radio,
                                             std::size_t cluster) {
    if (!(angle_deg > 0.0 && angle_deg < 180.0))
        throw InvalidArgument("rotation angle must lie in (0, 180) degrees");
    if (members.empty()) return {};

    const std::size_t k = strip_count(main_axis, radio);
    const double width = 2.0 * radio.range;
    const double origin = -0.5 * width * static_cast<double>(k);  // strips centred on the anchor
    const double cot = cot_deg(angle_deg);
    const Vec2 sub_dir = rotate(main_axis.direction, deg_to_rad(angle_deg));

    std::vector<SubRegion> regions(2 * k);
    for (std::size_t s = 0; s < k; ++s) {
        for (int side = 0; side < 2; ++side) {
            SubRegion& r = regions[2 * s + side];
            r.cluster = cluster;
            r.strip_index = s;
            r.side = side == 0 ? Side::Above : Side::Below;
            r.strip_begin = origin + width * static_cast<double>(s);
            r.strip_end = r.strip_begin + width;
            r.foot = main_axis.point_at(0.5 * (r.strip_begin + r.strip_end));
            r.nominal_direction = side == 0 ? sub_dir : sub_dir * -1.0;
        }
    }
    for (DeviceId id : members) {
        const Vec2 p = topology.position(id);
        const double w = main_axis.across(p);
        const double a = main_axis.along(p) - w * cot;
        const double slot = std::floor((a - origin) / width);
        const auto s = static_cast<std::size_t>(std::clamp(slot, 0.0, static_cast<double>(k - 1)));
        regions[2 * s + (w >= 0.0 ? 0 : 1)].members.push_back(id);
    }
    return regions;
}

std::vector<std::optional<Axis>> build_sub_axes(std::span<const SubRegion> regions, const PlanarTopology& topology) {
    std::vector<std::optional<Axis>> out;
    out.reserve(regions.size());
    for (const SubRegion& r : regions) {
        if (r.members.empty()) {
            out.emplace_back();
            continue;
        }
        std::vector<Vec2> pts;
        pts.reserve(r.members.size());
        for (DeviceId id : r.members) pts.push_back(topology.position(id));
        Axis axis;
        if (pts.size() == 1) {
            axis.anchor = pts.front();
            axis.degenerate = true;
        } else {
            const GmmFit fit = em_fit(pts, 1);
            axis = principal_axis(fit.components.front().mean, fit.components.front().cov, pts);
        }
        if (axis.degenerate || axis.isotropic) axis.direction = r.nominal_direction;
        out.push_back(axis);
    }
    return out;
}

namespace {

struct WalkPoint {
    DeviceId id;
    Vec2 pos;
    double outward;  // larger is farther along the walk
    double offset;   // tie-break: smaller is better
};

// Walk preference: farther out, then nearer the guiding line, then smaller id.
bool walk_before(const WalkPoint& a, const WalkPoint& b) {
    if (a.outward != b.outward) return a.outward > b.outward;
    if (a.offset != b.offset) return a.offset < b.offset;
    return a.id < b.id;
}

// Greedy hop-by-hop walk from `start`: each hop takes the in-range point
// farthest along the walk, which must improve on the current relay (the
// destination itself is always acceptable). Stops at the destination.
std::vector<DeviceId> greedy_walk(std::vector<WalkPoint> pts, Vec2 start, double start_outward,
                                  std::optional<DeviceId> destination, RadioModel radio) {
    std::vector<DeviceId> chain;
    std::vector<char> used(pts.size(), 0);
    Vec2 here = start;
    double level = start_outward;
    for (;;) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (used[i] || !radio.reaches(here, pts[i].pos)) continue;
            if (!(pts[i].outward > level) && pts[i].id != destination) continue;
            if (!best) {
                best = i;
                continue;
            }
            if (walk_before(pts[i], pts[*best])) best = i;
        }
        if (!best) break;
        used[*best] = 1;
        chain.push_back(pts[*best].id);
        here = pts[*best].pos;
        level = pts[*best].outward;
        if (pts[*best].id == destination) break;
    }
    return chain;
}

}  // namespace

RelayChainResult select_relays(const SubRegion& region, const Axis& main_axis, const Axis& sub_axis,
                               const PlanarTopology& topology, RadioModel radio) {
    RelayChainResult result;
    if (region.members.empty()) return result;

    // Foot: where the fitted sub-axis crosses the main axis, when that lies in the strip.
    Vec2 foot = region.foot;
    if (!sub_axis.degenerate) {
        const double denom = dot(sub_axis.direction, left_normal(main_axis.direction));
        if (std::abs(denom) > 1e-9) {
            const double t = -main_axis.across(sub_axis.anchor) / denom;
            const Vec2 cross_pt = sub_axis.point_at(t);
            const double u = main_axis.along(cross_pt);
            if (u >= region.strip_begin && u <= region.strip_end) foot = cross_pt;
        }
    }

    std::vector<WalkPoint> pts;
    pts.reserve(region.members.size());
    const Vec2 sub_normal = left_normal(sub_axis.direction);
    for (DeviceId id : region.members) {
        const Vec2 p = topology.position(id);
        pts.push_back({id, p, std::abs(main_axis.across(p)), std::abs(dot(p - sub_axis.anchor, sub_normal))});
    }
    const auto dest = std::min_element(pts.begin(), pts.end(), [](const WalkPoint& a, const WalkPoint& b) {
        return walk_before(a, b);
    });
    // Nothing off the main axis: the spine already serves this region.
    if (dest->outward <= 1e-9 * radio.range) return result;
    result.relays = greedy_walk(pts, foot, 0.0, dest->id, radio);
    result.unreachable = result.relays.empty();
    return result;
}

std::vector<DeviceId> select_spine(std::span<const DeviceId> members, const Axis& main_axis, double start_along,
                                   bool forward, const PlanarTopology& topology, RadioModel radio,
                                   std::span<const DeviceId> exclude) {
    const double sign = forward ? 1.0 : -1.0;
    std::vector<WalkPoint> pts;
    pts.reserve(members.size());
    for (DeviceId id : members) {
        if (std::find(exclude.begin(), exclude.end(), id) != exclude.end()) continue;
        const Vec2 p = topology.position(id);
        pts.push_back({id, p, sign * main_axis.along(p), std::abs(main_axis.across(p))});
    }
    if (pts.empty()) return {};
    const auto dest = std::min_element(pts.begin(), pts.end(), [](const WalkPoint& a, const WalkPoint& b) {
        return walk_before(a, b);
    });
    const double start = sign * start_along;
    if (!(dest->outward > start)) return {};
    return greedy_walk(pts, main_axis.point_at(start_along), start, dest->id, radio);
}

std::vector<const RelayChain*> FishbonePlan::all_chains() const {
    std::vector<const RelayChain*> out;
    for (const auto& c : clusters)
        for (const auto& ch : c.chains) out.push_back(&ch);
    for (const auto& ch : extra_chains) out.push_back(&ch);
    return out;
}

std::vector<double> default_angle_grid() {
    std::vector<double> grid;
    for (int a = 60; a <= 120; ++a) grid.push_back(a);
    return grid;
}

}  // namespace fishbone
