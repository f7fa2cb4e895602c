#include "fishbone/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fishbone/errors.hpp"
#include "fishbone/rng.hpp"

#ifndef FISHBONE_VERSION
#define FISHBONE_VERSION "0.0.0"
#endif

namespace fishbone {

namespace {

using Json = nlohmann::ordered_json;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json strategy_json(const StrategyConfig& s) {
    static const char* kinds[] = {"epidemic", "flood_once", "modified_bip", "pf", "npb", "fifo", "fifo_ma_hybrid"};
    Json j{{"kind", kinds[static_cast<int>(s.kind)]}, {"name", s.name()}};
    if (s.kind == StrategyKind::Pf) j["p_f"] = s.p_f;
    if (s.kind == StrategyKind::Npb) {
        j["coverage_ratio_weight"] = s.npb.coverage_ratio_weight;
        j["c_min"] = s.npb.c_min;
        j["c_max"] = s.npb.c_max;
    }
    if (s.inner) j["inner"] = strategy_json(*s.inner);
    return j;
}

Json config_json(const ExperimentConfig& c) {
    Json j;
    if (const auto* g = std::get_if<PoissonClusterParams>(&c.topology))
        j["topology"] = {{"generator",
                          {{"n_parents", g->n_parents},
                           {"children_mean", g->children_mean},
                           {"spread", g->spread},
                           {"width", g->bounds.width},
                           {"height", g->bounds.height},
                           {"seed", g->seed}}}};
    else if (const auto* csv = std::get_if<CsvTopology>(&c.topology))
        j["topology"] = {{"csv",
                          {{"path", csv->path.string()},
                           {"box",
                            {{"lat_min", csv->box.lat_min},
                             {"lat_max", csv->box.lat_max},
                             {"lon_min", csv->box.lon_min},
                             {"lon_max", csv->box.lon_max}}},
                           {"width", csv->extent.width},
                           {"height", csv->extent.height}}}};
    else
        j["topology"] = {{"json", std::get<JsonTopology>(c.topology).path.string()}};
    j["radio"] = c.range ? Json{{"range", *c.range}} : Json{{"calibrate_fraction", c.range_fraction}};
    j["k"] = c.k;
    j["max_hops"] = c.max_hops;
    Json sources = Json::array();
    for (const auto& s : c.sources) {
        Json sj{{"mode", s.label()}};
        if (s.id) sj["id"] = *s.id;
        if (s.position) sj["position"] = {s.position->x, s.position->y};
        sources.push_back(sj);
    }
    j["sources"] = sources;
    j["runs"] = c.runs;
    Json strategies = Json::array();
    for (const auto& s : c.strategies) strategies.push_back(strategy_json(s));
    j["strategies"] = strategies;
    j["angle_grid"] = c.angle_grid.empty() ? default_angle_grid() : c.angle_grid;
    j["energy"] = {{"beta", c.energy.beta}, {"p_t", c.energy.p_t}, {"p_r", c.energy.p_r}, {"p_s", c.energy.p_s}};
    j["betas"] = c.betas;
    if (c.relay_deployment) j["relay_deployment"] = {c.relay_deployment->x, c.relay_deployment->y};
    j["master_seed"] = c.master_seed;
    return j;
}

DeviceId nearest_device(const PlanarTopology& t, Vec2 p) {
    std::size_t best = 0;
    double best_d = squared_distance(t.at(0).pos, p);
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double d = squared_distance(t.at(i).pos, p);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return t.at(best).id;
}

DeviceId resolve_fixed(const SourceSpec& s, const PlanarTopology& t) {
    if (s.id) {
        if (!t.contains(*s.id)) throw ConfigError("source device " + std::to_string(*s.id) + " is not in the topology");
        return *s.id;
    }
    const Extent b = t.bounds();
    return nearest_device(t, s.position.value_or(Vec2{b.width / 2.0, b.height / 2.0}));
}

bool needs_plan(const ExperimentConfig& c) {
    for (const auto& s : c.strategies)
        if (s.kind == StrategyKind::Fifo || s.kind == StrategyKind::FifoMaHybrid) return true;
    return false;
}

Json aggregate_json(const Aggregate& a) {
    return {{"mean", a.mean}, {"std", a.std}, {"min", a.min}, {"max", a.max}};
}

Json record_json(const RunRecord& r, const std::vector<double>& betas) {
    Json alpha = Json::array();
    for (std::size_t i = 0; i < r.alpha.size(); ++i) alpha.push_back({{"beta", betas[i]}, {"alpha", r.alpha[i]}});
    return {{"source_mode", r.source_mode},
            {"strategy", r.strategy},
            {"run", r.run},
            {"source", r.source},
            {"seed", r.seed},
            {"covered", r.totals.covered},
            {"transmissions", r.totals.transmissions},
            {"receptions", r.totals.receptions},
            {"standby_misses", r.totals.standby_misses},
            {"hops_used", r.hops_used},
            {"coverage", r.coverage},
            {"eta", r.eta},
            {"alpha", alpha}};
}

}  // namespace

Aggregate Aggregate::of(const std::vector<double>& v) {
    Aggregate a;
    if (v.empty()) return a;
    a.min = a.max = v.front();
    double sum = 0.0;
    for (double x : v) {
        sum += x;
        a.min = std::min(a.min, x);
        a.max = std::max(a.max, x);
    }
    a.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - a.mean) * (x - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(v.size()));
    return a;
}

PreparedTopology prepare_topology(const ExperimentConfig& config) {
    auto topo = [&]() -> PlanarTopology {
        try {
            if (const auto* g = std::get_if<PoissonClusterParams>(&config.topology))
                return generate_poisson_cluster(*g);
            if (const auto* csv = std::get_if<CsvTopology>(&config.topology)) {
                const auto records = load_geo_csv(csv->path, csv->box);
                return project_equirect(records, csv->extent);
            }
            return topology_from_json(read_text(std::get<JsonTopology>(config.topology).path));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(std::string("topology: ") + e.what());
        }
    }();
    const double range = config.range ? *config.range : calibrate_range(topo, config.range_fraction);
    return {std::move(topo), RadioModel(range)};
}

RelayDeployment deploy_relay(const PlanarTopology& topology, const FishbonePlan& plan, Vec2 position,
                             RadioModel radio) {
    const Extent b = topology.bounds();
    if (!(position.x >= 0.0 && position.x <= b.width && position.y >= 0.0 && position.y <= b.height))
        throw InvalidArgument("relay position lies outside the topology bounds");
    std::vector<Device> devices(topology.devices().begin(), topology.devices().end());
    const DeviceId id = topology.max_id() + 1;
    devices.push_back({id, position});
    RelayDeployment out{PlanarTopology(std::move(devices), b), plan, id, std::nullopt};
    out.plan.extra_chains.push_back({ChainKind::Bridge, 0, std::nullopt, {id}});

    bool linked = topology.contains(plan.source) && radio.reaches(topology.position(plan.source), position);
    for (const RelayChain* ch : plan.all_chains())
        for (DeviceId r : ch->relays)
            if (!linked && topology.contains(r) && radio.reaches(topology.position(r), position)) linked = true;
    if (!linked) out.warning = "deployed relay " + std::to_string(id) + " is out of range of every existing relay";
    return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    PreparedTopology prep = prepare_topology(config);
    std::optional<UnitDiskGraph> graph;
    graph.emplace(prep.topology, prep.radio);

    ExperimentReport report;
    report.config_echo = config_json(config).dump();
    report.master_seed = config.master_seed;
    report.betas = config.betas.empty() ? std::vector<double>{config.energy.beta} : config.betas;

    DeviceId eval_source = resolve_fixed(SourceSpec{}, prep.topology);
    for (const auto& s : config.sources)
        if (s.mode == SourceMode::Fixed) {
            eval_source = resolve_fixed(s, prep.topology);
            break;
        }

    std::shared_ptr<const FishbonePlan> plan;
    if (needs_plan(config)) {
        PlanOptions po;
        po.k = config.k;
        po.angle_grid = config.angle_grid;
        po.max_hops = config.max_hops;
        po.seed = config.master_seed;
        auto built = build_fishbone_plan(prep.topology, *graph, eval_source, po);
        for (const auto& cp : built.clusters) {
            report.angle_grid = cp.angle_grid;
            report.angle_sweeps.push_back(cp.angle_sweep);
            report.rotation_angles.push_back(cp.rotation_angle);
        }
        plan = std::make_shared<const FishbonePlan>(std::move(built));
    }
    if (config.relay_deployment) {
        FishbonePlan base = plan ? *plan : FishbonePlan{};
        auto dep = deploy_relay(prep.topology, base, *config.relay_deployment, prep.radio);
        if (dep.warning) report.warnings.push_back(*dep.warning);
        prep.topology = std::move(dep.topology);
        graph.emplace(prep.topology, prep.radio);
        if (plan) plan = std::make_shared<const FishbonePlan>(std::move(dep.plan));
    }
    const PlanarTopology& topo = prep.topology;
    report.n_devices = topo.size();
    report.range = prep.radio.range;
    report.average_degree = graph->average_degree();

    std::vector<DeviceId> fixed_sources;
    for (const auto& s : config.sources)
        fixed_sources.push_back(s.mode == SourceMode::Fixed ? resolve_fixed(s, topo) : 0);

    const std::size_t n_modes = config.sources.size();
    const std::size_t n_strat = config.strategies.size();
    const std::size_t n_tasks = n_modes * config.runs;
    report.records.resize(n_tasks * n_strat);

    std::vector<std::shared_ptr<const Strategy>> plain(n_strat);
    for (std::size_t s = 0; s < n_strat; ++s)
        if (config.strategies[s].kind != StrategyKind::Fifo && config.strategies[s].kind != StrategyKind::FifoMaHybrid)
            plain[s] = make_strategy(config.strategies[s]);

    auto do_task = [&](std::size_t task) {
        const std::size_t mode = task / config.runs;
        const std::size_t run = task % config.runs;
        const SourceSpec& spec = config.sources[mode];
        const std::string mode_name = spec.label();
        const std::uint64_t mode_key = fnv1a(mode_name);
        DeviceId source = fixed_sources[mode];
        std::shared_ptr<const FishbonePlan> run_plan = plan;
        if (spec.mode == SourceMode::Random) {
            source = topo.at(derive_seed({config.master_seed, mode_key, run}) % topo.size()).id;
            if (plan) run_plan = std::make_shared<const FishbonePlan>(respine(*plan, topo, prep.radio, source));
        }
        for (std::size_t s = 0; s < n_strat; ++s) {
            const StrategyConfig& sc = config.strategies[s];
            const auto strategy = plain[s] ? plain[s] : make_strategy(sc, run_plan);
            SimOptions so;
            so.max_hops = config.max_hops;
            so.seed = derive_seed({config.master_seed, mode_key, fnv1a(sc.name()), run});
            const SimOutcome out = simulate(topo, *graph, *strategy, source, so);
            RunRecord& rec = report.records[task * n_strat + s];
            rec.source_mode = mode_name;
            rec.strategy = sc.name();
            rec.run = run;
            rec.source = source;
            rec.seed = so.seed;
            rec.totals = Totals::of(out);
            rec.hops_used = out.hops_used;
            rec.coverage = coverage_probability(rec.totals, topo.size());
            rec.eta = forwarding_efficiency(rec.totals);
            for (double beta : report.betas) {
                EnergyParams e = config.energy;
                e.beta = beta;
                rec.alpha.push_back(energy_efficiency(rec.totals, e));
            }
        }
    };

    std::size_t workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n_tasks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= n_tasks) return;
            try {
                do_task(t);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n_tasks;
                return;
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t mode = 0; mode < n_modes; ++mode)
        for (std::size_t s = 0; s < n_strat; ++s) {
            std::vector<double> cov, eta;
            std::vector<std::vector<double>> alpha(report.betas.size());
            for (std::size_t run = 0; run < config.runs; ++run) {
                const RunRecord& r = report.records[(mode * config.runs + run) * n_strat + s];
                cov.push_back(r.coverage);
                eta.push_back(r.eta);
                for (std::size_t b = 0; b < alpha.size(); ++b) alpha[b].push_back(r.alpha[b]);
            }
            StrategySummary sum;
            sum.source_mode = config.sources[mode].label();
            sum.strategy = config.strategies[s].name();
            sum.runs = config.runs;
            sum.coverage = Aggregate::of(cov);
            sum.eta = Aggregate::of(eta);
            for (const auto& a : alpha) sum.alpha.push_back(Aggregate::of(a));
            report.summaries.push_back(std::move(sum));
        }
    return report;
}

std::string report_to_json(const ExperimentReport& r) {
    Json j{{"format", "fishbone.report"}, {"version", 1}, {"generator", "fishbone " FISHBONE_VERSION}};
    j["config"] = Json::parse(r.config_echo);
    j["master_seed"] = r.master_seed;
    j["topology"] = {{"devices", r.n_devices}, {"range", r.range}, {"average_degree", r.average_degree}};
    j["betas"] = r.betas;
    j["warnings"] = r.warnings;
    Json clusters = Json::array();
    for (std::size_t i = 0; i < r.angle_sweeps.size(); ++i)
        clusters.push_back({{"rotation_angle", r.rotation_angles[i]}, {"angle_sweep", r.angle_sweeps[i]}});
    j["plan"] = {{"angle_grid", r.angle_grid}, {"clusters", clusters}};
    Json summary = Json::array();
    for (const auto& s : r.summaries) {
        Json alpha = Json::array();
        for (std::size_t b = 0; b < s.alpha.size(); ++b) {
            Json a = aggregate_json(s.alpha[b]);
            a["beta"] = r.betas[b];
            alpha.push_back(a);
        }
        summary.push_back({{"source_mode", s.source_mode},
                           {"strategy", s.strategy},
                           {"runs", s.runs},
                           {"coverage", aggregate_json(s.coverage)},
                           {"eta", aggregate_json(s.eta)},
                           {"alpha", alpha}});
    }
    j["summary"] = summary;
    Json records = Json::array();
    for (const auto& rec : r.records) records.push_back(record_json(rec, r.betas));
    j["records"] = records;
    return j.dump(1);
}

std::string records_to_jsonl(const std::vector<RunRecord>& records) {
    std::string out;
    std::vector<double> betas;
    for (const auto& r : records) {
        betas.resize(r.alpha.size(), 0.0);
        Json j = record_json(r, betas);
        j.erase("alpha");
        j["alpha"] = r.alpha;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    std::filesystem::create_directories(dir);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace fishbone
