// Command-line front end: plan, simulate, plot-data, gen-topology.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fishbone/errors.hpp"
#include "fishbone/experiment.hpp"

namespace {

using namespace fishbone;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        write_file_atomic(path, text);
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fishbone forwarding planner and broadcast simulator"};
    app.require_subcommand(1);

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Build a fishbone plan for a topology");
    std::string plan_config, plan_topology, plan_out;
    std::optional<double> plan_range;
    std::optional<DeviceId> plan_source;
    std::size_t plan_k = 3;
    plan_cmd->add_option("-c,--config", plan_config, "Experiment config supplying topology, range, K and source");
    plan_cmd->add_option("-t,--topology", plan_topology, "Topology JSON (instead of a config)");
    plan_cmd->add_option("-r,--range", plan_range, "Radio range (default: calibrated)");
    plan_cmd->add_option("-k", plan_k, "Number of clusters")->check(CLI::PositiveNumber);
    plan_cmd->add_option("-s,--source", plan_source, "Source device id");
    plan_cmd->add_option("-o,--out", plan_out, "Output file (default stdout)");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Run an experiment config and write its report");
    std::string sim_config, sim_out, sim_records;
    std::optional<std::size_t> sim_runs, sim_workers;
    std::optional<std::uint64_t> sim_seed;
    sim_cmd->add_option("config", sim_config, "Experiment config file")->required();
    sim_cmd->add_option("-o,--out", sim_out, "Report path (overrides the config's output)");
    sim_cmd->add_option("--records", sim_records, "Also write per-run records as JSON lines");
    sim_cmd->add_option("--runs", sim_runs, "Override the number of runs");
    sim_cmd->add_option("--workers", sim_workers, "Worker threads (0 = all cores)");
    sim_cmd->add_option("--seed", sim_seed, "Override the master seed");

    // plot-data
    auto* plot_cmd = app.add_subcommand("plot-data", "Turn a report into CSV");
    std::string plot_report, plot_kind, plot_out;
    plot_cmd->add_option("report", plot_report, "Report JSON")->required();
    plot_cmd->add_option("-k,--kind", plot_kind, "eta_table | coverage_table | alpha_vs_beta | angle_sweep")->required();
    plot_cmd->add_option("-o,--out", plot_out, "Output CSV (default stdout)");

    // gen-topology
    auto* gen_cmd = app.add_subcommand("gen-topology", "Generate a clustered synthetic topology");
    PoissonClusterParams gen = default_topology_params();
    std::string gen_out;
    gen_cmd->add_option("--parents", gen.n_parents, "Number of cluster centres");
    gen_cmd->add_option("--children", gen.children_mean, "Mean devices per cluster");
    gen_cmd->add_option("--spread", gen.spread, "Cluster standard deviation");
    gen_cmd->add_option("--width", gen.bounds.width, "Region width");
    gen_cmd->add_option("--height", gen.bounds.height, "Region height");
    gen_cmd->add_option("--seed", gen.seed, "Generator seed");
    gen_cmd->add_option("-o,--out", gen_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*plan_cmd) {
            ExperimentConfig cfg;
            if (!plan_config.empty()) {
                cfg = load_experiment_config(plan_config);
            } else if (!plan_topology.empty()) {
                cfg.topology = JsonTopology{plan_topology};
                cfg.k = plan_k;
            }
            if (plan_range) cfg.range = *plan_range;
            const auto prep = prepare_topology(cfg);
            DeviceId source = plan_source.value_or(0);
            if (!plan_source) {
                const auto fixed = std::find_if(cfg.sources.begin(), cfg.sources.end(),
                                                [](const SourceSpec& s) { return s.mode == SourceMode::Fixed; });
                if (fixed != cfg.sources.end() && fixed->id) {
                    source = *fixed->id;
                } else {
                    const Extent b = prep.topology.bounds();
                    const Vec2 c = fixed != cfg.sources.end() && fixed->position ? *fixed->position
                                                                                  : Vec2{b.width / 2, b.height / 2};
                    double best = -1.0;
                    for (const auto& d : prep.topology.devices())
                        if (best < 0 || squared_distance(d.pos, c) < best) {
                            best = squared_distance(d.pos, c);
                            source = d.id;
                        }
                }
            }
            if (!prep.topology.contains(source)) throw ConfigError("source " + std::to_string(source) + " not found");
            PlanOptions po;
            po.k = cfg.k;
            po.angle_grid = cfg.angle_grid;
            po.max_hops = cfg.max_hops;
            po.seed = cfg.master_seed;
            emit(plan_to_json(build_fishbone_plan(prep.topology, prep.radio, source, po)), plan_out);
        } else if (*sim_cmd) {
            ExperimentConfig cfg = load_experiment_config(sim_config);
            if (sim_runs) cfg.runs = *sim_runs;
            if (sim_workers) cfg.workers = *sim_workers;
            if (sim_seed) cfg.master_seed = *sim_seed;
            cfg.validate();
            const auto report = run_experiment(cfg);
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
            const std::string out = sim_out.empty() ? cfg.output.string() : sim_out;
            emit(report_to_json(report), out);
            if (!sim_records.empty()) write_file_atomic(sim_records, records_to_jsonl(report.records));
            for (const auto& s : report.summaries)
                std::cerr << s.source_mode << '\t' << s.strategy << "\tcoverage=" << s.coverage.mean
                          << "\teta=" << s.eta.mean << '\n';
        } else if (*plot_cmd) {
            emit(emit_plot_data(slurp(plot_report), parse_plot_kind(plot_kind)), plot_out);
        } else if (*gen_cmd) {
            emit(topology_to_json(generate_poisson_cluster(gen)), gen_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
