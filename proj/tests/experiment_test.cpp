#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fishbone/errors.hpp"
#include "fishbone/experiment.hpp"
#include "test_support.hpp"

using namespace fishbone;
using fishbone::testing::make_topology;
using Json = nlohmann::json;

namespace {

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "fishbone_experiment_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::filesystem::path write_file(const std::string& name, const std::string& body) {
    const auto path = scratch_dir() / name;
    std::ofstream(path) << body;
    return path;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Small clustered setup that still exercises every strategy family.
ExperimentConfig small_config() {
    ExperimentConfig c;
    PoissonClusterParams p;
    p.n_parents = 5;
    p.children_mean = 30;
    p.spread = 200;
    p.bounds = {2500, 2500};
    p.seed = 3;
    c.topology = p;
    c.sources = {SourceSpec{}, SourceSpec{SourceMode::Random, std::nullopt, std::nullopt}};
    c.runs = 6;
    c.angle_grid = {70.0, 90.0, 110.0};
    for (const char* text : {R"({"kind":"fifo"})", R"({"kind":"modified_bip"})", R"({"kind":"pf","p_f":0.3})",
                             R"({"kind":"npb"})", R"({"kind":"fifo_ma_hybrid","inner":{"kind":"pf","p_f":0.1}})"}) {
        const auto cfg = parse_experiment_config(std::string(R"({"strategies":[)") + text + "]}");
        c.strategies.push_back(cfg.strategies.front());
    }
    c.betas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    return c;
}

}  // namespace

TEST(Experiment, ThreeDeviceLineFloodOnce) {
    const auto topo = fishbone::testing::line_topology(3, 5.0);
    const auto path = write_file("line.json", topology_to_json(topo));
    const auto cfg = parse_experiment_config(R"({"topology":{"json":")" + path.string() +
                                             R"("},"radio":{"range":5},"runs":1,"source":{"id":0},)"
                                             R"("strategies":[{"kind":"flood_once"}]})");
    const auto report = run_experiment(cfg);
    ASSERT_EQ(report.records.size(), 1u);
    EXPECT_DOUBLE_EQ(report.records[0].eta, 1.0);
    EXPECT_DOUBLE_EQ(report.records[0].coverage, 1.0);
    EXPECT_EQ(report.records[0].hops_used, 2);
}

TEST(Experiment, DeterministicAcrossWorkerCounts) {
    auto cfg = small_config();
    cfg.workers = 1;
    const auto a = run_experiment(cfg);
    cfg.workers = 3;
    const auto b = run_experiment(cfg);
    EXPECT_EQ(records_to_jsonl(a.records), records_to_jsonl(b.records));
    EXPECT_EQ(report_to_json(a), report_to_json(b));
}

TEST(Experiment, SummaryMatchesRecords) {
    const auto r = run_experiment(small_config());
    ASSERT_FALSE(r.summaries.empty());
    for (const auto& s : r.summaries) {
        std::vector<double> eta, cov;
        for (const auto& rec : r.records)
            if (rec.strategy == s.strategy && rec.source_mode == s.source_mode) {
                eta.push_back(rec.eta);
                cov.push_back(rec.coverage);
            }
        EXPECT_EQ(eta.size(), s.runs);
        const auto e = Aggregate::of(eta);
        EXPECT_EQ(e.mean, s.eta.mean);
        EXPECT_EQ(e.std, s.eta.std);
        EXPECT_EQ(Aggregate::of(cov).max, s.coverage.max);
    }
}

TEST(Experiment, AddingAStrategyKeepsOtherStreams) {
    auto cfg = small_config();
    const auto a = run_experiment(cfg);
    cfg.strategies.erase(cfg.strategies.begin() + 1);
    const auto b = run_experiment(cfg);
    for (const auto& rb : b.records) {
        const auto it = std::find_if(a.records.begin(), a.records.end(), [&](const RunRecord& ra) {
            return ra.strategy == rb.strategy && ra.source_mode == rb.source_mode && ra.run == rb.run;
        });
        ASSERT_NE(it, a.records.end());
        EXPECT_EQ(it->seed, rb.seed);
        EXPECT_EQ(it->totals.transmissions, rb.totals.transmissions);
    }
}

TEST(PlotData, RowCounts) {
    auto cfg = small_config();
    cfg.angle_grid.clear();
    cfg.runs = 2;
    const auto json = report_to_json(run_experiment(cfg));
    const auto alpha = emit_plot_data(json, PlotKind::AlphaVsBeta);
    EXPECT_EQ(alpha.substr(0, alpha.find('\n')), "strategy,beta,alpha_fixed,alpha_random");
    EXPECT_EQ(count_lines(alpha), 1 + 10 * cfg.strategies.size());
    const auto sweep = emit_plot_data(json, PlotKind::AngleSweep);
    EXPECT_EQ(count_lines(sweep), 1u + 61u);
    const auto eta = emit_plot_data(json, PlotKind::EtaTable);
    EXPECT_EQ(eta.substr(0, eta.find('\n')), "strategy,fixed,random");
    EXPECT_EQ(count_lines(eta), 1 + cfg.strategies.size());
}

TEST(PlotData, MissingFieldIsNamed) {
    try {
        emit_plot_data(R"({"summary":[{"strategy":"x","source_mode":"fixed"}]})", PlotKind::EtaTable);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("eta"), std::string::npos);
    }
    EXPECT_THROW(emit_plot_data("{}", PlotKind::AngleSweep), ConfigError);
    EXPECT_THROW(parse_plot_kind("pie"), ConfigError);
}

TEST(Config, RejectsBadInput) {
    const std::string ok = R"("strategies":[{"kind":"pf","p_f":0.1}])";
    EXPECT_NO_THROW(parse_experiment_config("{" + ok + "}"));
    EXPECT_THROW(parse_experiment_config("{" + ok + R"(,"colour":1})"), ConfigError);
    EXPECT_THROW(parse_experiment_config(R"({"strategies":[{"kind":"pf","p_f":2}]})"), ConfigError);
    EXPECT_THROW(parse_experiment_config(R"({"strategies":[{"kind":"nope"}]})"), ConfigError);
    EXPECT_THROW(parse_experiment_config("{" + ok + R"(,"runs":0})"), ConfigError);
    EXPECT_THROW(parse_experiment_config("{" + ok + R"(,"max_hops":0})"), ConfigError);
    EXPECT_THROW(parse_experiment_config(R"({"runs":3})"), ConfigError);
    EXPECT_THROW(parse_experiment_config("{" + ok + R"(,"source":{},"sources":[]})"), ConfigError);
    EXPECT_THROW(parse_experiment_config("{" + ok + R"(,"angle_grid":[0]})"), ConfigError);
    EXPECT_THROW(parse_experiment_config("not json"), ConfigError);
    EXPECT_THROW(parse_experiment_config(R"({"strategies":[{"kind":"pf","p_f":0.1},{"kind":"pf","p_f":0.1}]})"),
                 ConfigError);
}

TEST(Config, MilliwattsAndGrid) {
    const auto c = parse_experiment_config(
        R"({"strategies":[{"kind":"epidemic"}],"energy":{"p_t_mw":480,"p_r_mw":75,"p_s_mw":0.015},)"
        R"("angle_grid":{"min":60,"max":120,"step":1}})");
    EXPECT_DOUBLE_EQ(c.energy.p_t, 0.48);
    EXPECT_DOUBLE_EQ(c.energy.p_r, 0.075);
    EXPECT_DOUBLE_EQ(c.energy.p_s, 0.000015);
    EXPECT_EQ(c.angle_grid.size(), 61u);
    EXPECT_EQ(c.angle_grid.back(), 120.0);
}

TEST(Config, MissingTopologyFileIsConfigError) {
    const auto cfg = parse_experiment_config(R"({"topology":{"json":"/nonexistent/t.json"},)"
                                             R"("strategies":[{"kind":"epidemic"}]})");
    EXPECT_THROW(run_experiment(cfg), ConfigError);
}

namespace {

// Left group: spine along y = 50. Right group sits beyond one range of
// everything on the left; a relay at (40, 50) joins them.
PlanarTopology gapped() {
    return make_topology({{10, 50}, {20, 50}, {30, 50}, {50, 50}, {60, 50}, {60, 58}});
}

FishbonePlan spine_plan() {
    FishbonePlan plan;
    plan.source = 0;
    ClusterPlan cp;
    cp.chains.push_back({ChainKind::Spine, 0, std::nullopt, {1, 2}});
    plan.clusters.push_back(cp);
    return plan;
}

}  // namespace

TEST(DeployRelay, BridgesAGap) {
    const auto topo = gapped();
    const RadioModel radio(10.0);
    const auto before = simulate(topo, radio, *fifo_strategy(std::make_shared<FishbonePlan>(spine_plan())), 0, {});
    const auto dep = deploy_relay(topo, spine_plan(), {40, 50}, radio);
    EXPECT_FALSE(dep.warning);
    EXPECT_EQ(dep.relay, 6u);
    EXPECT_EQ(dep.topology.size(), 7u);
    const auto after =
        simulate(dep.topology, radio, *fifo_strategy(std::make_shared<FishbonePlan>(dep.plan)), 0, {});
    EXPECT_EQ(before.total_covered(), 3u);
    EXPECT_EQ(after.total_covered(), 5u);
}

TEST(DeployRelay, CoveredSpotDoesNotHelp) {
    const auto topo = gapped();
    const RadioModel radio(10.0);
    const auto base = simulate(topo, radio, *fifo_strategy(std::make_shared<FishbonePlan>(spine_plan())), 0, {});
    const auto dep = deploy_relay(topo, spine_plan(), {25, 50}, radio);
    const auto after =
        simulate(dep.topology, radio, *fifo_strategy(std::make_shared<FishbonePlan>(dep.plan)), 0, {});
    // The new device is itself covered, but nothing on the far side is.
    EXPECT_EQ(after.total_covered(), base.total_covered() + 1);
    EXPECT_LE(forwarding_efficiency(after), forwarding_efficiency(base) + 1e-12);
}

TEST(DeployRelay, WarningsAndErrors) {
    const auto topo = gapped();
    const RadioModel radio(10.0);
    EXPECT_TRUE(deploy_relay(topo, spine_plan(), {90, 90}, radio).warning);
    EXPECT_THROW(deploy_relay(topo, spine_plan(), {150, 50}, radio), InvalidArgument);
}

TEST(WriteFileAtomic, ReplacesContents) {
    const auto path = scratch_dir() / "atomic.txt";
    write_file_atomic(path, "one");
    write_file_atomic(path, "two");
    EXPECT_EQ(read_file(path), "two");
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

#ifdef FISHBONE_CLI_PATH
namespace {

int cli(const std::string& args) {
    const std::string cmd = std::string(FISHBONE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Cli, EndToEnd) {
    const auto dir = scratch_dir();
    const auto topo = (dir / "cli_topo.json").string();
    ASSERT_EQ(cli("gen-topology --parents 3 --children 20 --spread 150 --width 1500 --height 1500 --seed 4 -o " +
                  topo),
              0);
    ASSERT_EQ(cli("plan -t " + topo + " -k 2 -s 0 -o " + (dir / "cli_plan.json").string()), 0);
    EXPECT_NO_THROW(plan_from_json(read_file(dir / "cli_plan.json")));

    const auto cfg = write_file("cli.cfg", R"({"topology":{"json":"cli_topo.json"},"runs":3,)"
                                           R"("sources":[{"mode":"fixed","id":0},{"mode":"random"}],)"
                                           R"("angle_grid":[80,90],"betas":[0.5,1.0],)"
                                           R"("strategies":[{"kind":"fifo"},{"kind":"pf","p_f":0.2}],)"
                                           R"("output":"cli_report.json"})");
    ASSERT_EQ(cli("simulate " + cfg.string() + " --workers 2 --records " + (dir / "cli_records.jsonl").string()), 0);
    const auto report = Json::parse(read_file(dir / "cli_report.json"));
    EXPECT_EQ(report["format"], "fishbone.report");
    EXPECT_EQ(count_lines(read_file(dir / "cli_records.jsonl")), 2u * 2u * 3u);
    ASSERT_EQ(cli("plot-data " + (dir / "cli_report.json").string() + " -k alpha_vs_beta -o " +
                  (dir / "cli_alpha.csv").string()),
              0);
    EXPECT_EQ(count_lines(read_file(dir / "cli_alpha.csv")), 1u + 2u * 2u);

    EXPECT_EQ(cli("simulate " + write_file("bad.cfg", R"({"strategies":[]})").string()), 1);
    EXPECT_EQ(cli("plot-data " + (dir / "cli_report.json").string() + " -k pie"), 1);
    EXPECT_EQ(cli("frobnicate"), 1);
    EXPECT_EQ(cli("plan -t " + topo + " -s 99999"), 1);
    EXPECT_EQ(cli("simulate " + cfg.string() + " -o " + topo + "/out.json"), 2);
}
#endif
