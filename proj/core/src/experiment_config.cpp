#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fishbone/errors.hpp"
#include "fishbone/experiment.hpp"

namespace fishbone {

namespace {

using Json = nlohmann::json;

void only_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get(const Json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + "." + key + " is missing or has the wrong type");
    }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

Vec2 point(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(where + " must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    return p.is_absolute() || base.empty() ? p : base / p;
}

TopologySpec parse_topology(const Json& j, const std::filesystem::path& base) {
    only_keys(j, {"generator", "csv", "json"}, "topology");
    if (j.size() != 1) throw ConfigError("topology needs exactly one of generator, csv, json");
    if (j.contains("generator")) {
        const Json& g = j["generator"];
        only_keys(g, {"n_parents", "children_mean", "spread", "width", "height", "seed"}, "topology.generator");
        PoissonClusterParams p = default_topology_params();
        p.n_parents = get_or<std::size_t>(g, "n_parents", p.n_parents, "topology.generator");
        p.children_mean = get_or<double>(g, "children_mean", p.children_mean, "topology.generator");
        p.spread = get_or<double>(g, "spread", p.spread, "topology.generator");
        p.bounds.width = get_or<double>(g, "width", p.bounds.width, "topology.generator");
        p.bounds.height = get_or<double>(g, "height", p.bounds.height, "topology.generator");
        p.seed = get_or<std::uint64_t>(g, "seed", p.seed, "topology.generator");
        return p;
    }
    if (j.contains("csv")) {
        const Json& c = j["csv"];
        only_keys(c, {"path", "box", "width", "height"}, "topology.csv");
        CsvTopology t;
        t.path = resolve(get<std::string>(c, "path", "topology.csv"), base);
        const Json& b = c.at("box");
        only_keys(b, {"lat_min", "lat_max", "lon_min", "lon_max"}, "topology.csv.box");
        t.box = {get<double>(b, "lat_min", "box"), get<double>(b, "lat_max", "box"), get<double>(b, "lon_min", "box"),
                 get<double>(b, "lon_max", "box")};
        t.extent.width = get_or<double>(c, "width", t.extent.width, "topology.csv");
        t.extent.height = get_or<double>(c, "height", t.extent.height, "topology.csv");
        return t;
    }
    return JsonTopology{resolve(get<std::string>(j, "json", "topology"), base)};
}

SourceSpec parse_source(const Json& j) {
    only_keys(j, {"mode", "id", "position"}, "source");
    SourceSpec s;
    const auto mode = get_or<std::string>(j, "mode", "fixed", "source");
    if (mode == "random") {
        s.mode = SourceMode::Random;
        if (j.contains("id") || j.contains("position")) throw ConfigError("random source takes no id or position");
    } else if (mode == "fixed") {
        if (j.contains("id")) s.id = get<DeviceId>(j, "id", "source");
        if (j.contains("position")) s.position = point(j["position"], "source.position");
        if (s.id && s.position) throw ConfigError("fixed source takes id or position, not both");
    } else {
        throw ConfigError("source.mode must be fixed or random");
    }
    return s;
}

StrategyConfig parse_strategy(const Json& j) {
    only_keys(j, {"kind", "label", "p_f", "coverage_ratio_weight", "c_min", "c_max", "inner"}, "strategy");
    StrategyConfig s;
    const auto kind = get<std::string>(j, "kind", "strategy");
    if (kind == "epidemic") s.kind = StrategyKind::Epidemic;
    else if (kind == "flood_once") s.kind = StrategyKind::FloodOnce;
    else if (kind == "modified_bip") s.kind = StrategyKind::ModifiedBip;
    else if (kind == "pf") s.kind = StrategyKind::Pf;
    else if (kind == "npb") s.kind = StrategyKind::Npb;
    else if (kind == "fifo") s.kind = StrategyKind::Fifo;
    else if (kind == "fifo_ma_hybrid") s.kind = StrategyKind::FifoMaHybrid;
    else throw ConfigError("unknown strategy kind '" + kind + "'");
    s.label = get_or<std::string>(j, "label", "", "strategy");
    if (s.kind == StrategyKind::Pf) s.p_f = get<double>(j, "p_f", "strategy");
    s.npb.coverage_ratio_weight = get_or<double>(j, "coverage_ratio_weight", s.npb.coverage_ratio_weight, "strategy");
    s.npb.c_min = get_or<double>(j, "c_min", s.npb.c_min, "strategy");
    s.npb.c_max = get_or<double>(j, "c_max", s.npb.c_max, "strategy");
    if (j.contains("inner")) s.inner = std::make_shared<StrategyConfig>(parse_strategy(j["inner"]));
    s.validate();
    return s;
}

std::vector<double> parse_grid(const Json& j) {
    if (j.is_array()) return j.get<std::vector<double>>();
    only_keys(j, {"min", "max", "step"}, "angle_grid");
    const double lo = get<double>(j, "min", "angle_grid");
    const double hi = get<double>(j, "max", "angle_grid");
    const double step = get_or<double>(j, "step", 1.0, "angle_grid");
    if (!(step > 0.0) || hi < lo) throw ConfigError("angle_grid needs min <= max and step > 0");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(lo + step * static_cast<double>(i));
    return out;
}

EnergyParams parse_energy(const Json& j) {
    only_keys(j, {"beta", "p_t", "p_r", "p_s", "p_t_mw", "p_r_mw", "p_s_mw"}, "energy");
    EnergyParams e;
    e.beta = get_or<double>(j, "beta", e.beta, "energy");
    auto power = [&](const char* watts, const char* milli, double& out) {
        if (j.contains(watts) && j.contains(milli))
            throw ConfigError(std::string("energy: give ") + watts + " or " + milli + ", not both");
        if (j.contains(watts)) out = get<double>(j, watts, "energy");
        if (j.contains(milli)) out = get<double>(j, milli, "energy") / 1000.0;
    };
    power("p_t", "p_t_mw", e.p_t);
    power("p_r", "p_r_mw", e.p_r);
    power("p_s", "p_s_mw", e.p_s);
    return e;
}

}  // namespace

PoissonClusterParams default_topology_params() {
    PoissonClusterParams p;
    p.n_parents = 30;
    p.children_mean = 50.0;
    p.spread = 250.0;
    p.bounds = {8700.0, 8700.0};
    p.seed = 2;
    return p;
}

void ExperimentConfig::validate() const {
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (max_hops < 1) throw ConfigError("max_hops must be >= 1");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (range && !(*range > 0.0)) throw ConfigError("radio range must be > 0");
    if (!(range_fraction > 0.0 && range_fraction <= 1.0)) throw ConfigError("calibrate_fraction must lie in (0, 1]");
    if (sources.empty()) throw ConfigError("at least one source mode is required");
    if (strategies.empty()) throw ConfigError("at least one strategy is required");
    std::set<std::string> names;
    for (const auto& s : strategies) {
        s.validate();
        if (!names.insert(s.name()).second) throw ConfigError("duplicate strategy name '" + s.name() + "'");
    }
    for (double a : angle_grid)
        if (!(a > 0.0 && a < 180.0)) throw ConfigError("angle grid values must lie in (0, 180)");
    try {
        energy.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("energy: ") + e.what());
    }
    for (double b : betas)
        if (!(b > 0.0 && b <= 1.0)) throw ConfigError("betas must lie in (0, 1]");
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(j,
              {"topology", "radio", "k", "max_hops", "source", "sources", "runs", "strategies", "angle_grid",
               "energy", "betas", "relay_deployment", "output", "master_seed", "workers"},
              "config");
    ExperimentConfig c;
    if (j.contains("topology")) c.topology = parse_topology(j["topology"], base_dir);
    if (j.contains("radio")) {
        const Json& r = j["radio"];
        only_keys(r, {"range", "calibrate_fraction"}, "radio");
        if (r.contains("range")) c.range = get<double>(r, "range", "radio");
        c.range_fraction = get_or<double>(r, "calibrate_fraction", c.range_fraction, "radio");
    }
    c.k = get_or<std::size_t>(j, "k", c.k, "config");
    c.max_hops = get_or<int>(j, "max_hops", c.max_hops, "config");
    if (j.contains("source") && j.contains("sources")) throw ConfigError("give source or sources, not both");
    if (j.contains("source")) c.sources = {parse_source(j["source"])};
    if (j.contains("sources")) {
        c.sources.clear();
        for (const auto& s : j["sources"]) c.sources.push_back(parse_source(s));
    }
    c.runs = get_or<std::size_t>(j, "runs", c.runs, "config");
    if (!j.contains("strategies") || !j["strategies"].is_array()) throw ConfigError("strategies must be a list");
    for (const auto& s : j["strategies"]) c.strategies.push_back(parse_strategy(s));
    if (j.contains("angle_grid")) c.angle_grid = parse_grid(j["angle_grid"]);
    if (j.contains("energy")) c.energy = parse_energy(j["energy"]);
    if (j.contains("betas")) c.betas = get<std::vector<double>>(j, "betas", "config");
    if (j.contains("relay_deployment")) c.relay_deployment = point(j["relay_deployment"], "relay_deployment");
    if (j.contains("output")) c.output = resolve(get<std::string>(j, "output", "config"), base_dir);
    c.master_seed = get_or<std::uint64_t>(j, "master_seed", c.master_seed, "config");
    c.workers = get_or<std::size_t>(j, "workers", c.workers, "config");
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str(), path.parent_path());
}

}  // namespace fishbone
