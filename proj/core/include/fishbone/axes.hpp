#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fishbone/clustering.hpp"
#include "fishbone/geometry.hpp"
#include "fishbone/topology.hpp"

namespace fishbone {

class UnitDiskGraph;

/// A principal axis: the line through `anchor` along `direction`, covering
/// projections in [-half_length, half_length].
struct Axis {
    Vec2 anchor;
    Vec2 direction{1.0, 0.0};
    double half_length = 0.0;
    double eigenvalue = 0.0;
    bool isotropic = false;   // eigenvalues tie; direction is the canonical (1, 0)
    bool degenerate = false;  // fewer than two distinct points

    double along(Vec2 p) const { return dot(p - anchor, direction); }
    /// Signed perpendicular offset, positive on the left of `direction`.
    double across(Vec2 p) const { return dot(p - anchor, left_normal(direction)); }
    Vec2 point_at(double t) const { return anchor + direction * t; }
};

/// Unit eigenvector of the largest eigenvalue of `cov`, oriented with
/// non-negative x (non-negative y on ties). Eigenvalues closer than 1e-9 give
/// the canonical direction (1, 0) with `isotropic` set.
Axis principal_axis(Vec2 mean, const SymMat2& cov, std::span<const Vec2> points);

enum class Side : std::uint8_t { Above, Below };

/// One strip (twice the radio range wide, measured along the main axis) on one
/// side of the main axis.
struct SubRegion {
    std::size_t cluster = 0;
    std::size_t strip_index = 0;
    Side side = Side::Above;
    std::vector<DeviceId> members;
    /// Where the strip's nominal sub-axis meets the main axis, and its outward direction.
    Vec2 foot;
    Vec2 nominal_direction;
    double strip_begin = 0.0;  // along-axis extent of the strip
    double strip_end = 0.0;
};

std::size_t strip_count(const Axis& main_axis, RadioModel radio);

/// Assigns every member to exactly one (strip, side) region. Sub-axes leave
/// the main axis at `angle_deg` (in (0, 180)); strips are cut along that slant
/// and the end strips are open-ended. Devices on the axis count as Above.
/// Returns 2 * strip_count regions ordered (strip, Above/Below), or nothing
/// for an empty cluster.
std::vector<SubRegion> partition_sub_regions(const PlanarTopology& topology, std::span<const DeviceId> members,
                                             const Axis& main_axis, double angle_deg, RadioModel radio,
                                             std::size_t cluster = 0);

/// PCA axis per region (single-component EM then `principal_axis`). Empty
/// regions map to nullopt; single-device regions get a degenerate axis along
/// the nominal direction.
std::vector<std::optional<Axis>> build_sub_axes(std::span<const SubRegion> regions, const PlanarTopology& topology);

struct RelayChainResult {
    std::vector<DeviceId> relays;
    bool unreachable = false;  // nobody in the region is reachable from the foot disk
};

/// Greedy outward chain inside one region: from the disk around the sub-axis
/// foot, repeatedly take the in-range member farthest from the main axis
/// (ties: nearest to the sub-axis line, then smallest id) until the region's
/// farthest member is reached or nothing extends further.
RelayChainResult select_relays(const SubRegion& region, const Axis& main_axis, const Axis& sub_axis,
                               const PlanarTopology& topology, RadioModel radio);

/// The same greedy walk along the main axis itself, from the disk at `start_along`
/// towards +direction (`forward`) or -direction, over the cluster members.
std::vector<DeviceId> select_spine(std::span<const DeviceId> members, const Axis& main_axis, double start_along,
                                   bool forward, const PlanarTopology& topology, RadioModel radio,
                                   std::span<const DeviceId> exclude = {});

enum class ChainKind : std::uint8_t { Spine, Sub, Bridge };

struct RelayChain {
    ChainKind kind = ChainKind::Sub;
    std::size_t cluster = 0;
    std::optional<std::size_t> region;
    std::vector<DeviceId> relays;
};

struct ClusterPlan {
    std::size_t cluster = 0;
    std::vector<DeviceId> members;
    Axis main_axis;
    double rotation_angle = 90.0;
    double angle_coverage = 0.0;  // coverage the angle search measured
    std::vector<double> angle_grid;    // angles the search tried
    std::vector<double> angle_sweep;   // coverage per tried angle
    std::vector<SubRegion> regions;
    std::vector<std::optional<Axis>> sub_axes;  // aligned with regions
    std::vector<RelayChain> chains;             // spine arms first, then sub-axis chains
    std::vector<std::size_t> unreachable_regions;
};

struct FishbonePlan {
    std::size_t k = 0;
    double range = 0.0;
    DeviceId source = 0;
    std::vector<ClusterPlan> clusters;
    /// Relays added after planning (e.g. a deployed extra relay); attached like chains.
    std::vector<RelayChain> extra_chains;

    std::vector<const RelayChain*> all_chains() const;
};

struct PlanOptions {
    std::size_t k = 3;
    std::vector<double> angle_grid;  // empty -> 60..120 step 1
    int max_hops = 25;
    std::uint64_t seed = 0;
    double em_tol = 1e-8;
    std::size_t em_max_iter = 200;
};

std::vector<double> default_angle_grid();

struct AngleSearchResult {
    double angle = 90.0;
    double coverage = 0.0;
    std::vector<double> coverage_per_angle;  // aligned with the grid
};

/// Exhaustive sweep: for every grid angle build this cluster's regions, sub-axes
/// and chains, simulate fishbone dissemination from `source`, and keep the
/// best coverage (ties -> smaller angle).
AngleSearchResult search_rotation_angle(const PlanarTopology& topology, const UnitDiskGraph& graph,
                                        std::span<const DeviceId> cluster, const Axis& main_axis,
                                        DeviceId source, std::span<const double> grid, int max_hops,
                                        std::size_t cluster_index = 0,
                                        std::span<const RelayChain> fixed_chains = {});

/// Sub-axis part of a cluster plan for one angle (regions, sub-axes, chains).
void build_sub_structure(ClusterPlan& plan, const PlanarTopology& topology, RadioModel radio, double angle_deg);

/// Both spine arms for a cluster, starting at the source's projection.
std::vector<RelayChain> build_spine(const ClusterPlan& plan, const PlanarTopology& topology, RadioModel radio,
                                    DeviceId source);

/// Clustering, per-cluster EM + PCA main axis, spine, angle search and
/// sub-axis chains.
FishbonePlan build_fishbone_plan(const PlanarTopology& topology, RadioModel radio, DeviceId source,
                                 const PlanOptions& options = {});
FishbonePlan build_fishbone_plan(const PlanarTopology& topology, const UnitDiskGraph& graph, DeviceId source,
                                 const PlanOptions& options = {});

/// Replaces every spine with one started from `source`; sub-axis chains stay.
FishbonePlan respine(const FishbonePlan& plan, const PlanarTopology& topology, RadioModel radio, DeviceId source);

std::string plan_to_json(const FishbonePlan& plan);
FishbonePlan plan_from_json(const std::string& text);

}  // namespace fishbone
