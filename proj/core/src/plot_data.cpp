#include <map>
#include <sstream>

#include <json.hpp>

#include "fishbone/errors.hpp"
#include "fishbone/experiment.hpp"

namespace fishbone {

namespace {

using Json = nlohmann::json;

const Json& need(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("report is missing field '" + where + key + "'");
    return j.at(key);
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

// strategy -> source mode -> value, in first-appearance strategy order.
struct Table {
    std::vector<std::string> order;
    std::map<std::string, std::map<std::string, std::string>> cells;

    void put(const std::string& strategy, const std::string& column, const std::string& value) {
        if (!cells.contains(strategy)) order.push_back(strategy);
        cells[strategy][column] = value;
    }
    std::string get(const std::string& strategy, const std::string& column) const {
        const auto& row = cells.at(strategy);
        const auto it = row.find(column);
        return it == row.end() ? "" : it->second;
    }
};

std::string mode_table(const Json& summary, const char* metric) {
    Table t;
    for (const auto& s : summary) {
        const auto& m = need(s, metric, "summary[].");
        t.put(need(s, "strategy", "summary[].").get<std::string>(),
              need(s, "source_mode", "summary[].").get<std::string>(), num(need(m, "mean", "summary[].metric.").get<double>()));
    }
    std::string out = "strategy,fixed,random\n";
    for (const auto& name : t.order) out += name + "," + t.get(name, "fixed") + "," + t.get(name, "random") + "\n";
    return out;
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
    if (name == "eta_table") return PlotKind::EtaTable;
    if (name == "coverage_table") return PlotKind::CoverageTable;
    if (name == "alpha_vs_beta") return PlotKind::AlphaVsBeta;
    if (name == "angle_sweep") return PlotKind::AngleSweep;
    throw ConfigError("unknown plot kind '" + name + "'");
}

std::string emit_plot_data(const std::string& report_json, PlotKind kind) {
    Json j;
    try {
        j = Json::parse(report_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("report is not valid JSON: ") + e.what());
    }
    try {
        switch (kind) {
            case PlotKind::EtaTable: return mode_table(need(j, "summary", ""), "eta");
            case PlotKind::CoverageTable: return mode_table(need(j, "summary", ""), "coverage");
            case PlotKind::AlphaVsBeta: {
                // rows: (strategy, beta); columns per source mode
                Table t;
                for (const auto& s : need(j, "summary", "")) {
                    const auto name = need(s, "strategy", "summary[].").get<std::string>();
                    const auto mode = need(s, "source_mode", "summary[].").get<std::string>();
                    for (const auto& a : need(s, "alpha", "summary[].")) {
                        const double beta = need(a, "beta", "summary[].alpha[].").get<double>();
                        t.put(name + "," + num(beta), mode, num(need(a, "mean", "summary[].alpha[].").get<double>()));
                    }
                }
                std::string out = "strategy,beta,alpha_fixed,alpha_random\n";
                for (const auto& key : t.order) out += key + "," + t.get(key, "fixed") + "," + t.get(key, "random") + "\n";
                return out;
            }
            case PlotKind::AngleSweep: {
                const Json& plan = need(j, "plan", "");
                const auto grid = need(plan, "angle_grid", "plan.").get<std::vector<double>>();
                const Json& clusters = need(plan, "clusters", "plan.");
                if (grid.empty() || clusters.empty()) throw ConfigError("report has no angle sweep (no fishbone plan)");
                std::string out = "angle";
                for (std::size_t c = 0; c < clusters.size(); ++c) out += ",cluster_" + std::to_string(c);
                out += "\n";
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    out += num(grid[i]);
                    for (const auto& c : clusters) out += "," + num(need(c, "angle_sweep", "plan.clusters[].").at(i).get<double>());
                    out += "\n";
                }
                return out;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed report: ") + e.what());
    }
    throw ConfigError("unknown plot kind");
}

}  // namespace fishbone
