#include "fishbone/topology.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fishbone/errors.hpp"

namespace fishbone {

PlanarTopology::PlanarTopology(std::vector<Device> devices, Extent bounds)
    : devices_(std::move(devices)), bounds_(bounds) {
    if (devices_.empty()) throw InvalidArgument("topology needs at least one device");
    if (!(bounds_.width >= 0.0) || !(bounds_.height >= 0.0))
        throw InvalidArgument("topology bounds must be non-negative");
    index_.reserve(devices_.size());
    for (std::size_t i = 0; i < devices_.size(); ++i) {
        const Device& d = devices_[i];
        if (!index_.emplace(d.id, i).second)
            throw InvalidArgument("duplicate device id " + std::to_string(d.id));
        if (!(d.pos.x >= 0.0 && d.pos.x <= bounds_.width && d.pos.y >= 0.0 && d.pos.y <= bounds_.height))
            throw InvalidArgument("device " + std::to_string(d.id) + " lies outside the bounds");
        max_id_ = std::max(max_id_, d.id);
    }
}

std::optional<std::size_t> PlanarTopology::find(DeviceId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t PlanarTopology::index_of(DeviceId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw NotFoundError("unknown device id " + std::to_string(id));
    return it->second;
}

Vec2 PlanarTopology::position(DeviceId id) const { return devices_[index_of(id)].pos; }

RadioModel::RadioModel(double r) : range(r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("radio range must be positive");
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out(s.substr(b, e - b));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            current.push_back(c);
        } else if (c == ',' && !quoted) {
            fields.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(trim(current));
    return fields;
}

double parse_double(const std::string& s, std::size_t line, const char* field) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, std::string("bad ") + field + " '" + s + "'");
    }
}

std::int64_t parse_timestamp(const std::string& s, std::size_t line) {
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '-'; })) {
        try {
            return std::stoll(s);
        } catch (const std::exception&) {
        }
    }
    std::tm tm{};
    std::istringstream in(s);
    in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
    if (in.fail()) throw ParseError(line, "bad created_at '" + s + "'");
    return static_cast<std::int64_t>(timegm(&tm));
}

}  // namespace

std::vector<GeoRecord> load_geo_csv(const std::filesystem::path& path, const GeoBox& box) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw EmptyDatasetError("empty file " + path.string());
    ++line_no;
    const auto header = split_csv(line);
    const std::vector<std::string> expected{"user_id_str", "lat", "lon", "created_at"};
    if (header != expected) throw ParseError(line_no, "expected header user_id_str,lat,lon,created_at");

    std::vector<GeoRecord> records;
    std::unordered_map<std::string, std::size_t> by_user;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 4) throw ParseError(line_no, "expected 4 fields, got " + std::to_string(f.size()));
        GeoRecord r;
        r.user_id = f[0];
        if (r.user_id.empty()) throw ParseError(line_no, "empty user_id_str");
        r.lat = parse_double(f[1], line_no, "lat");
        r.lon = parse_double(f[2], line_no, "lon");
        if (r.lat < -90.0 || r.lat > 90.0) throw ParseError(line_no, "lat out of range: " + f[1]);
        if (r.lon < -180.0 || r.lon > 180.0) throw ParseError(line_no, "lon out of range: " + f[2]);
        r.timestamp = parse_timestamp(f[3], line_no);
        if (!box.contains(r.lat, r.lon)) continue;

        auto [it, inserted] = by_user.emplace(r.user_id, records.size());
        if (inserted) {
            records.push_back(std::move(r));
        } else if (r.timestamp >= records[it->second].timestamp) {
            records[it->second] = std::move(r);
        }
    }
    if (records.empty()) throw EmptyDatasetError("no records inside the bounding box in " + path.string());
    return records;
}

PlanarTopology project_equirect(std::span<const GeoRecord> records, Extent target) {
    if (records.empty()) throw InvalidArgument("projection needs at least one record");
    double lat_lo = std::numeric_limits<double>::infinity(), lat_hi = -lat_lo;
    double lon_lo = lat_lo, lon_hi = -lat_lo;
    for (const auto& r : records) {
        lat_lo = std::min(lat_lo, r.lat);
        lat_hi = std::max(lat_hi, r.lat);
        lon_lo = std::min(lon_lo, r.lon);
        lon_hi = std::max(lon_hi, r.lon);
    }
    const double lat_span = lat_hi - lat_lo;
    const double lon_span = lon_hi - lon_lo;
    if (lat_span <= 0.0 && lon_span <= 0.0) throw DegenerateError("all records share one position");

    // A flat dimension is centred.
    auto map = [](double v, double lo, double span, double size) {
        if (span <= 0.0) return size / 2.0;
        return std::clamp((v - lo) / span * size, 0.0, size);
    };
    std::vector<Device> devices;
    devices.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        devices.push_back({static_cast<DeviceId>(i),
                           {map(r.lon, lon_lo, lon_span, target.width), map(r.lat, lat_lo, lat_span, target.height)}});
    }
    return PlanarTopology(std::move(devices), target);
}

PlanarTopology generate_poisson_cluster(const PoissonClusterParams& params) {
    if (params.n_parents < 1) throw InvalidArgument("n_parents must be >= 1");
    if (!(params.spread > 0.0)) throw InvalidArgument("spread must be positive");
    if (!(params.children_mean >= 0.0)) throw InvalidArgument("children_mean must be non-negative");
    const Extent b = params.bounds;
    if (!(b.width > 0.0) || !(b.height > 0.0)) throw InvalidArgument("bounds have zero area");

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> ux(0.0, b.width);
    std::uniform_real_distribution<double> uy(0.0, b.height);
    std::normal_distribution<double> gauss(0.0, params.spread);

    std::vector<Vec2> parents(params.n_parents);
    for (auto& p : parents) p = {ux(rng), uy(rng)};

    std::vector<Device> devices;
    DeviceId next = 0;
    for (const Vec2& parent : parents) {
        devices.push_back({next++, parent});
        std::size_t children = 0;
        if (params.children_mean > 0.0) children = std::poisson_distribution<std::size_t>(params.children_mean)(rng);
        for (std::size_t c = 0; c < children; ++c) {
            const double dx = gauss(rng);
            const double dy = gauss(rng);
            Vec2 p{std::clamp(parent.x + dx, 0.0, b.width), std::clamp(parent.y + dy, 0.0, b.height)};
            devices.push_back({next++, p});
        }
    }
    return PlanarTopology(std::move(devices), b);
}

// ---------------------------------------------------------------------------
// Unit-disk graph

UnitDiskGraph::UnitDiskGraph(const PlanarTopology& topology, RadioModel radio) : radio_(radio) {
    const std::size_t n = topology.size();
    const double cell = radio.range;
    const Extent b = topology.bounds();
    const auto cols = static_cast<std::int64_t>(std::floor(b.width / cell)) + 1;
    const auto rows = static_cast<std::int64_t>(std::floor(b.height / cell)) + 1;
    auto cell_of = [&](Vec2 p) {
        const auto cx = std::min(cols - 1, static_cast<std::int64_t>(p.x / cell));
        const auto cy = std::min(rows - 1, static_cast<std::int64_t>(p.y / cell));
        return std::pair{cx, cy};
    };

    // Bucket sort of indices by cell.
    std::vector<std::size_t> cell_start(static_cast<std::size_t>(cols * rows) + 1, 0);
    std::vector<std::size_t> cell_ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto [cx, cy] = cell_of(topology.at(i).pos);
        ++cell_start[static_cast<std::size_t>(cy * cols + cx) + 1];
    }
    std::partial_sum(cell_start.begin(), cell_start.end(), cell_start.begin());
    {
        std::vector<std::size_t> fill(cell_start.begin(), cell_start.end() - 1);
        for (std::size_t i = 0; i < n; ++i) {
            auto [cx, cy] = cell_of(topology.at(i).pos);
            cell_ids[fill[static_cast<std::size_t>(cy * cols + cx)]++] = i;
        }
    }

    offsets_.assign(n + 1, 0);
    std::vector<std::uint32_t> scratch;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = topology.at(i).pos;
        auto [cx, cy] = cell_of(p);
        scratch.clear();
        for (std::int64_t y = std::max<std::int64_t>(0, cy - 1); y <= std::min(rows - 1, cy + 1); ++y) {
            for (std::int64_t x = std::max<std::int64_t>(0, cx - 1); x <= std::min(cols - 1, cx + 1); ++x) {
                const auto c = static_cast<std::size_t>(y * cols + x);
                for (std::size_t k = cell_start[c]; k < cell_start[c + 1]; ++k) {
                    const std::size_t j = cell_ids[k];
                    if (j != i && radio.reaches(p, topology.at(j).pos)) scratch.push_back(static_cast<std::uint32_t>(j));
                }
            }
        }
        std::sort(scratch.begin(), scratch.end());
        adjacency_.insert(adjacency_.end(), scratch.begin(), scratch.end());
        offsets_[i + 1] = adjacency_.size();
    }
}

double UnitDiskGraph::average_degree() const {
    return static_cast<double>(adjacency_.size()) / static_cast<double>(size());
}

std::vector<int> UnitDiskGraph::hop_distances(std::size_t start) const {
    std::vector<int> dist(size(), -1);
    std::queue<std::size_t> q;
    dist[start] = 0;
    q.push(start);
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::uint32_t v : neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

std::vector<std::uint32_t> UnitDiskGraph::component_of(std::size_t start) const {
    const auto dist = hop_distances(start);
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < dist.size(); ++i)
        if (dist[i] >= 0) out.push_back(static_cast<std::uint32_t>(i));
    return out;
}

std::vector<DeviceId> neighbors(const PlanarTopology& topology, DeviceId device, RadioModel radio) {
    const Vec2 p = topology.position(device);
    std::vector<DeviceId> out;
    for (const Device& d : topology.devices())
        if (d.id != device && radio.reaches(p, d.pos)) out.push_back(d.id);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

double largest_component_fraction(const PlanarTopology& topology, double range) {
    const UnitDiskGraph g(topology, RadioModel(range));
    std::vector<char> seen(g.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (seen[i]) continue;
        const auto comp = g.component_of(i);
        for (auto j : comp) seen[j] = 1;
        best = std::max(best, comp.size());
    }
    return static_cast<double>(best) / static_cast<double>(g.size());
}

}  // namespace

double calibrate_range(const PlanarTopology& topology, double fraction, double precision) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("fraction must lie in (0, 1]");
    const Extent b = topology.bounds();
    double lo = 0.0;
    double hi = std::max(std::hypot(b.width, b.height), precision);
    while (hi - lo > precision) {
        const double mid = 0.5 * (lo + hi);
        if (mid > 0.0 && largest_component_fraction(topology, mid) >= fraction) hi = mid;
        else lo = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------
// JSON

std::string topology_to_json(const PlanarTopology& topology) {
    nlohmann::ordered_json j;
    j["format"] = "fishbone.topology";
    j["version"] = 1;
    j["bounds"] = {{"width", topology.bounds().width}, {"height", topology.bounds().height}};
    auto& devs = j["devices"] = nlohmann::ordered_json::array();
    for (const Device& d : topology.devices()) devs.push_back({{"id", d.id}, {"x", d.pos.x}, {"y", d.pos.y}});
    return j.dump(1);
}

PlanarTopology topology_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("topology JSON: ") + e.what());
    }
    if (j.value("format", "") != "fishbone.topology" || j.value("version", 0) != 1)
        throw ConfigError("topology JSON: expected format fishbone.topology version 1");
    try {
        Extent bounds{j.at("bounds").at("width").get<double>(), j.at("bounds").at("height").get<double>()};
        std::vector<Device> devices;
        for (const auto& d : j.at("devices"))
            devices.push_back({d.at("id").get<DeviceId>(), {d.at("x").get<double>(), d.at("y").get<double>()}});
        return PlanarTopology(std::move(devices), bounds);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("topology JSON: ") + e.what());
    }
}

}  // namespace fishbone
