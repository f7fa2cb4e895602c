#include <json.hpp>

#include "fishbone/axes.hpp"
#include "fishbone/errors.hpp"

namespace fishbone {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormat = "fishbone.plan";
constexpr int kVersion = 1;

Json vec(Vec2 v) { return Json::array({v.x, v.y}); }

Vec2 vec_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Json axis_json(const Axis& a) {
    return Json{{"anchor", vec(a.anchor)},         {"direction", vec(a.direction)},
                {"half_length", a.half_length},    {"eigenvalue", a.eigenvalue},
                {"isotropic", a.isotropic},        {"degenerate", a.degenerate}};
}

Axis axis_from(const Json& j) {
    Axis a;
    a.anchor = vec_from(j.at("anchor"));
    a.direction = vec_from(j.at("direction"));
    a.half_length = j.at("half_length").get<double>();
    a.eigenvalue = j.value("eigenvalue", 0.0);
    a.isotropic = j.value("isotropic", false);
    a.degenerate = j.value("degenerate", false);
    return a;
}

const char* kind_name(ChainKind k) {
    switch (k) {
        case ChainKind::Spine: return "spine";
        case ChainKind::Sub: return "sub";
        case ChainKind::Bridge: return "bridge";
    }
    return "sub";
}

ChainKind kind_from(const std::string& s) {
    if (s == "spine") return ChainKind::Spine;
    if (s == "sub") return ChainKind::Sub;
    if (s == "bridge") return ChainKind::Bridge;
    throw ConfigError("unknown chain kind '" + s + "'");
}

Json chain_json(const RelayChain& c) {
    Json j{{"kind", kind_name(c.kind)}, {"cluster", c.cluster}};
    j["region"] = c.region ? Json(*c.region) : Json(nullptr);
    j["relays"] = c.relays;
    return j;
}

RelayChain chain_from(const Json& j) {
    RelayChain c;
    c.kind = kind_from(j.at("kind").get<std::string>());
    c.cluster = j.value("cluster", std::size_t{0});
    if (j.contains("region") && !j.at("region").is_null()) c.region = j.at("region").get<std::size_t>();
    c.relays = j.at("relays").get<std::vector<DeviceId>>();
    return c;
}

}  // namespace

std::string plan_to_json(const FishbonePlan& plan) {
    Json j{{"format", kFormat}, {"version", kVersion}, {"k", plan.k}, {"range", plan.range}, {"source", plan.source}};
    Json clusters = Json::array();
    for (const auto& cp : plan.clusters) {
        Json c{{"cluster", cp.cluster},
               {"members", cp.members},
               {"main_axis", axis_json(cp.main_axis)},
               {"rotation_angle", cp.rotation_angle},
               {"angle_coverage", cp.angle_coverage},
               {"angle_grid", cp.angle_grid},
               {"angle_sweep", cp.angle_sweep}};
        Json regions = Json::array();
        for (const auto& r : cp.regions)
            regions.push_back({{"strip_index", r.strip_index},
                               {"side", r.side == Side::Above ? "above" : "below"},
                               {"members", r.members},
                               {"foot", vec(r.foot)},
                               {"nominal_direction", vec(r.nominal_direction)},
                               {"strip_begin", r.strip_begin},
                               {"strip_end", r.strip_end}});
        c["regions"] = std::move(regions);
        Json subs = Json::array();
        for (const auto& a : cp.sub_axes) subs.push_back(a ? axis_json(*a) : Json(nullptr));
        c["sub_axes"] = std::move(subs);
        Json chains = Json::array();
        for (const auto& ch : cp.chains) chains.push_back(chain_json(ch));
        c["chains"] = std::move(chains);
        c["unreachable_regions"] = cp.unreachable_regions;
        clusters.push_back(std::move(c));
    }
    j["clusters"] = std::move(clusters);
    Json extra = Json::array();
    for (const auto& ch : plan.extra_chains) extra.push_back(chain_json(ch));
    j["extra_chains"] = std::move(extra);
    return j.dump(2);
}

FishbonePlan plan_from_json(const std::string& text) {
    try {
        const Json j = Json::parse(text);
        if (j.at("format").get<std::string>() != kFormat) throw ConfigError("not a fishbone plan document");
        if (j.at("version").get<int>() != kVersion)
            throw ConfigError("unsupported plan version " + std::to_string(j.at("version").get<int>()));
        FishbonePlan plan;
        plan.k = j.at("k").get<std::size_t>();
        plan.range = j.at("range").get<double>();
        plan.source = j.at("source").get<DeviceId>();
        for (const auto& c : j.at("clusters")) {
            ClusterPlan cp;
            cp.cluster = c.at("cluster").get<std::size_t>();
            cp.members = c.at("members").get<std::vector<DeviceId>>();
            cp.main_axis = axis_from(c.at("main_axis"));
            cp.rotation_angle = c.at("rotation_angle").get<double>();
            cp.angle_coverage = c.value("angle_coverage", 0.0);
            cp.angle_grid = c.value("angle_grid", std::vector<double>{});
            cp.angle_sweep = c.value("angle_sweep", std::vector<double>{});
            for (const auto& r : c.at("regions")) {
                SubRegion reg;
                reg.cluster = cp.cluster;
                reg.strip_index = r.at("strip_index").get<std::size_t>();
                const auto side = r.at("side").get<std::string>();
                if (side != "above" && side != "below") throw ConfigError("unknown region side '" + side + "'");
                reg.side = side == "above" ? Side::Above : Side::Below;
                reg.members = r.at("members").get<std::vector<DeviceId>>();
                reg.foot = vec_from(r.at("foot"));
                reg.nominal_direction = vec_from(r.at("nominal_direction"));
                reg.strip_begin = r.at("strip_begin").get<double>();
                reg.strip_end = r.at("strip_end").get<double>();
                cp.regions.push_back(std::move(reg));
            }
            for (const auto& a : c.at("sub_axes"))
                cp.sub_axes.push_back(a.is_null() ? std::nullopt : std::optional<Axis>(axis_from(a)));
            if (cp.sub_axes.size() != cp.regions.size()) throw ConfigError("sub_axes and regions differ in length");
            for (const auto& ch : c.at("chains")) cp.chains.push_back(chain_from(ch));
            cp.unreachable_regions = c.value("unreachable_regions", std::vector<std::size_t>{});
            plan.clusters.push_back(std::move(cp));
        }
        if (j.contains("extra_chains"))
            for (const auto& ch : j.at("extra_chains")) plan.extra_chains.push_back(chain_from(ch));
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed plan document: ") + e.what());
    }
}

}  // namespace fishbone
