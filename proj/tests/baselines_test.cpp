#include <random>

#include <gtest/gtest.h>

#include "fishbone/errors.hpp"
#include "fishbone/metrics.hpp"
#include "fishbone/simulator.hpp"
#include "fishbone/strategies.hpp"
#include "test_support.hpp"

using namespace fishbone;
using fishbone::testing::line_topology;
using fishbone::testing::make_topology;

namespace {

PlanarTopology clustered(std::uint64_t seed) {
    PoissonClusterParams p;
    p.n_parents = 6;
    p.children_mean = 50;
    p.spread = 250;
    p.bounds = {3000, 3000};
    p.seed = seed;
    return generate_poisson_cluster(p);
}

SimOutcome run(const PlanarTopology& t, const UnitDiskGraph& g, const Strategy& s, std::uint64_t seed = 1,
               int hops = 25) {
    SimOptions opt;
    opt.seed = seed;
    opt.max_hops = hops;
    return simulate(t, g, s, t.at(0).id, opt);
}

}  // namespace

TEST(Epidemic, ConnectedTopologyFullyCovered) {
    const auto topo = line_topology(6, 5.0);
    const UnitDiskGraph g(topo, RadioModel(5.0));
    const auto out = run(topo, g, *epidemic_strategy());
    EXPECT_EQ(out.total_covered(), 6u);
    // Holders keep broadcasting until the hop cap.
    EXPECT_GT(out.total_transmissions(), 6u * 10u);
}

TEST(FloodOnce, TwoIsolatedDevices) {
    const auto topo = make_topology({{0, 0}, {90, 90}});
    const UnitDiskGraph g(topo, RadioModel(5.0));
    EXPECT_DOUBLE_EQ(coverage_probability(run(topo, g, *flood_once_strategy()), 2), 0.5);
}

TEST(ModifiedBip, StarNeedsOnlyTheSource) {
    const auto topo = make_topology({{50, 50}, {55, 50}, {45, 50}, {50, 56}, {50, 44}});
    const UnitDiskGraph g(topo, RadioModel(10.0));
    const auto out = run(topo, g, *modified_bip_strategy());
    EXPECT_EQ(out.total_transmissions(), 1u);
    EXPECT_EQ(out.total_covered(), 5u);
    EXPECT_EQ(bip_transmitters(g, topo, 0), std::vector<std::size_t>{0});
}

TEST(ModifiedBip, PathOfFiveUsesFourTransmissions) {
    const auto topo = line_topology(5, 5.0);
    const UnitDiskGraph g(topo, RadioModel(5.0));
    const auto out = run(topo, g, *modified_bip_strategy());
    EXPECT_EQ(out.total_transmissions(), 4u);
    EXPECT_EQ(out.transmissions[4], 0u);
    EXPECT_EQ(out.total_covered(), 5u);
}

TEST(ModifiedBip, NeverMoreThanFloodOnce) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto topo = clustered(seed);
        const UnitDiskGraph g(topo, RadioModel(calibrate_range(topo, 0.9)));
        const auto bip = run(topo, g, *modified_bip_strategy());
        const auto flood = run(topo, g, *flood_once_strategy());
        EXPECT_LE(bip.total_transmissions(), flood.total_transmissions());
        // Within the hop cap BIP's tree still spans the source's component.
        EXPECT_EQ(bip.total_covered(), flood.total_covered());
    }
}

TEST(Pf, ExtremesMatchFloodAndSilence) {
    const auto topo = clustered(2);
    const UnitDiskGraph g(topo, RadioModel(200.0));
    const auto flood = run(topo, g, *flood_once_strategy());
    const auto one = run(topo, g, *pf_strategy(1.0));
    EXPECT_EQ(one.covered, flood.covered);
    EXPECT_EQ(one.transmissions, flood.transmissions);
    const auto zero = run(topo, g, *pf_strategy(0.0));
    EXPECT_EQ(zero.total_transmissions(), 1u);
    EXPECT_EQ(zero.total_covered(), 1u + g.degree(0));
}

TEST(Pf, CoverageGrowsWithProbability) {
    const auto topo = clustered(3);
    const UnitDiskGraph g(topo, RadioModel(calibrate_range(topo, 0.9)));
    double previous = 0.0;
    for (double p : {0.05, 0.2, 0.5, 0.9}) {
        double sum = 0.0;
        for (std::uint64_t s = 0; s < 200; ++s) sum += static_cast<double>(run(topo, g, *pf_strategy(p), s).total_covered());
        EXPECT_GE(sum, previous) << p;
        previous = sum;
    }
}

TEST(Npb, ProbabilityFormula) {
    const NpbParams params;
    EXPECT_EQ(npb_probability(0, 10, 8.0, params), 0.0);
    EXPECT_EQ(npb_probability(0, 0, 8.0, params), 0.0);
    EXPECT_DOUBLE_EQ(npb_probability(1, 1, 8.0, params), 1.0);
    // Dense device: connectivity factor clamps at c_min.
    EXPECT_DOUBLE_EQ(npb_probability(5, 100, 10.0, params), 0.05 * 0.3);
    EXPECT_DOUBLE_EQ(npb_probability(10, 20, 10.0, params), 0.5 * 0.5);
    NpbParams heavy = params;
    heavy.coverage_ratio_weight = 10.0;
    EXPECT_DOUBLE_EQ(npb_probability(10, 20, 40.0, heavy), 1.0);
}

TEST(Strategies, DeterministicPerSeed) {
    const auto topo = clustered(4);
    const UnitDiskGraph g(topo, RadioModel(200.0));
    for (const auto& s : {pf_strategy(0.4), npb_strategy(NpbParams{})}) {
        const auto a = run(topo, g, *s, 17);
        const auto b = run(topo, g, *s, 17);
        EXPECT_EQ(a.transmissions, b.transmissions);
        EXPECT_EQ(a.receptions, b.receptions);
        EXPECT_EQ(a.first_round, b.first_round);
    }
}

TEST(Strategies, EpidemicDominatesCoverageAndCost) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto topo = clustered(seed);
        const RadioModel radio(calibrate_range(topo, 0.9));
        const UnitDiskGraph g(topo, radio);
        PlanOptions po;
        po.angle_grid = {70.0, 90.0, 110.0};
        auto plan = std::make_shared<const FishbonePlan>(build_fishbone_plan(topo, g, topo.at(0).id, po));
        const auto epi = run(topo, g, *epidemic_strategy(), seed);
        for (const auto& s : {flood_once_strategy(), modified_bip_strategy(), pf_strategy(0.1), pf_strategy(0.5),
                              npb_strategy(NpbParams{}), fifo_strategy(plan)}) {
            const auto o = run(topo, g, *s, seed);
            EXPECT_GE(epi.total_covered(), o.total_covered()) << s->name();
            EXPECT_GE(epi.total_transmissions(), o.total_transmissions()) << s->name();
        }
    }
}

TEST(Hybrid, SilentInnerCoversSpineReach) {
    // Spine 0 -> 1 -> 2 along a line; a sub chain {4} that the hybrid ignores.
    const auto topo = make_topology({{10, 50}, {20, 50}, {30, 50}, {40, 50}, {30, 60}, {30, 70}});
    auto plan = std::make_shared<FishbonePlan>();
    plan->source = 0;
    ClusterPlan cp;
    cp.chains.push_back({ChainKind::Spine, 0, std::nullopt, {1, 2}});
    cp.chains.push_back({ChainKind::Sub, 0, 0, {4}});
    plan->clusters.push_back(cp);
    const UnitDiskGraph g(topo, RadioModel(10.0));
    const auto out = run(topo, g, *fifo_ma_hybrid(pf_strategy(0.0), plan));
    // Spine relays 0,1,2 reach 1,2,3 and 4; 5 needs the sub chain.
    EXPECT_EQ(out.covered, (std::vector<std::uint8_t>{1, 1, 1, 1, 1, 0}));
    EXPECT_EQ(out.total_transmissions(), 3u);
}

TEST(StrategyConfig, NamesAndValidation) {
    StrategyConfig pf;
    pf.kind = StrategyKind::Pf;
    pf.p_f = 0.1;
    EXPECT_EQ(pf.name(), "pf_0.1");
    StrategyConfig hybrid;
    hybrid.kind = StrategyKind::FifoMaHybrid;
    hybrid.inner = std::make_shared<StrategyConfig>(pf);
    EXPECT_EQ(hybrid.name(), "fifo_ma+pf_0.1");
    StrategyConfig bad = pf;
    bad.p_f = 1.5;
    EXPECT_THROW(bad.validate(), ConfigError);
    StrategyConfig no_inner;
    no_inner.kind = StrategyKind::FifoMaHybrid;
    EXPECT_THROW(no_inner.validate(), ConfigError);
    StrategyConfig fifo;
    fifo.kind = StrategyKind::Fifo;
    EXPECT_THROW(make_strategy(fifo), ConfigError);
}
