#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fishbone/geometry.hpp"

namespace fishbone {

/// One geo-tagged record: who, where and when.
struct GeoRecord {
    std::string user_id;
    double lat = 0.0;
    double lon = 0.0;
    std::int64_t timestamp = 0;  // UTC seconds
};

struct GeoBox {
    double lat_min = -90.0;
    double lat_max = 90.0;
    double lon_min = -180.0;
    double lon_max = 180.0;

    bool contains(double lat, double lon) const {
        return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
    }
};

struct Extent {
    double width = 0.0;
    double height = 0.0;
};

struct Device {
    DeviceId id = 0;
    Vec2 pos;
};

/// Immutable set of device positions in a planar frame.
///
/// Devices are stored densely; `index_of` maps an id to its slot. Positions
/// always lie inside [0, width] x [0, height].
class PlanarTopology {
public:
    PlanarTopology(std::vector<Device> devices, Extent bounds);

    std::size_t size() const { return devices_.size(); }
    Extent bounds() const { return bounds_; }
    std::span<const Device> devices() const { return devices_; }

    const Device& at(std::size_t index) const { return devices_[index]; }
    Vec2 position(DeviceId id) const;
    bool contains(DeviceId id) const { return index_.contains(id); }
    /// Throws NotFoundError for unknown ids.
    std::size_t index_of(DeviceId id) const;
    std::optional<std::size_t> find(DeviceId id) const;

    DeviceId max_id() const { return max_id_; }

private:
    std::vector<Device> devices_;
    Extent bounds_;
    std::unordered_map<DeviceId, std::size_t> index_;
    DeviceId max_id_ = 0;
};

struct RadioModel {
    double range = 1.0;

    explicit RadioModel(double r);
    bool reaches(Vec2 a, Vec2 b) const { return squared_distance(a, b) <= range * range; }
};

/// Reads `user_id_str,lat,lon,created_at` rows (header required), keeping the
/// latest record per user inside `box`. `created_at` is either integer UTC
/// seconds or ISO-8601 (`2014-09-22T01:02:03Z`).
std::vector<GeoRecord> load_geo_csv(const std::filesystem::path& path, const GeoBox& box);

/// Affine lat/lon -> plane map: longitude onto [0, width], latitude onto [0, height].
/// Device ids follow record order.
PlanarTopology project_equirect(std::span<const GeoRecord> records, Extent target);

struct PoissonClusterParams {
    std::size_t n_parents = 1;
    double children_mean = 0.0;
    double spread = 1.0;
    Extent bounds{8700.0, 8700.0};
    std::uint64_t seed = 0;
};

/// Thomas-type cluster process: parents uniform in the bounds, each with a
/// Poisson number of isotropic Gaussian children; parents are devices too and
/// everything is clamped to the bounds.
PlanarTopology generate_poisson_cluster(const PoissonClusterParams& params);

/// Unit-disk adjacency, computed once. Neighbor lists hold dense indices in
/// ascending order.
class UnitDiskGraph {
public:
    UnitDiskGraph(const PlanarTopology& topology, RadioModel radio);

    std::size_t size() const { return offsets_.size() - 1; }
    std::span<const std::uint32_t> neighbors(std::size_t index) const {
        return {adjacency_.data() + offsets_[index], adjacency_.data() + offsets_[index + 1]};
    }
    std::size_t degree(std::size_t index) const { return offsets_[index + 1] - offsets_[index]; }
    double average_degree() const;
    RadioModel radio() const { return radio_; }

    /// Dense indices reachable from `start` (BFS), including `start`.
    std::vector<std::uint32_t> component_of(std::size_t start) const;
    /// Hop distance from `start`, -1 when unreachable.
    std::vector<int> hop_distances(std::size_t start) const;

private:
    RadioModel radio_;
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> adjacency_;
};

/// Ids of devices within range of `device` (boundary inclusive), ascending.
std::vector<DeviceId> neighbors(const PlanarTopology& topology, DeviceId device, RadioModel radio);

/// Smallest range (to `precision`) whose largest unit-disk component holds at
/// least `fraction` of the devices.
double calibrate_range(const PlanarTopology& topology, double fraction, double precision = 1.0);

std::string topology_to_json(const PlanarTopology& topology);
PlanarTopology topology_from_json(const std::string& text);

}  // namespace fishbone
