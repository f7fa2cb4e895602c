#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fishbone/axes.hpp"
#include "fishbone/metrics.hpp"
#include "fishbone/strategies.hpp"
#include "fishbone/topology.hpp"

namespace fishbone {

struct CsvTopology {
    std::filesystem::path path;
    GeoBox box;
    Extent extent{8700.0, 8700.0};
};

struct JsonTopology {
    std::filesystem::path path;
};

using TopologySpec = std::variant<PoissonClusterParams, CsvTopology, JsonTopology>;

/// The synthetic clustered topology used when a config names none.
PoissonClusterParams default_topology_params();

enum class SourceMode { Fixed, Random };

struct SourceSpec {
    SourceMode mode = SourceMode::Fixed;
    std::optional<DeviceId> id;         // fixed: this device
    std::optional<Vec2> position;       // fixed: the device nearest this point
    std::string label() const { return mode == SourceMode::Fixed ? "fixed" : "random"; }
};

struct ExperimentConfig {
    TopologySpec topology = default_topology_params();
    std::optional<double> range;        // unset: calibrated
    double range_fraction = 0.9;        // largest-component share used for calibration
    std::size_t k = 3;
    int max_hops = 25;
    std::vector<SourceSpec> sources{SourceSpec{}};
    std::size_t runs = 1000;
    std::vector<StrategyConfig> strategies;
    std::vector<double> angle_grid;     // empty: default grid
    EnergyParams energy;
    std::vector<double> betas;          // extra beta points for energy sweeps
    std::optional<Vec2> relay_deployment;
    std::filesystem::path output;
    std::uint64_t master_seed = 1;
    std::size_t workers = 0;            // 0: hardware concurrency

    void validate() const;
};

/// Parses the JSON config format; relative paths resolve against `base_dir`.
/// Milliwatt power fields (p_t_mw, ...) are converted to watts here.
ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RunRecord {
    std::string source_mode;
    std::string strategy;
    std::size_t run = 0;
    DeviceId source = 0;
    std::uint64_t seed = 0;
    Totals totals;
    int hops_used = 0;
    double coverage = 0.0;
    double eta = 0.0;
    std::vector<double> alpha;  // one per beta of the report
};

struct Aggregate {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    double min = 0.0;
    double max = 0.0;

    static Aggregate of(const std::vector<double>& values);
};

struct StrategySummary {
    std::string source_mode;
    std::string strategy;
    std::size_t runs = 0;
    Aggregate coverage;
    Aggregate eta;
    std::vector<Aggregate> alpha;  // aligned with ExperimentReport::betas
};

struct ExperimentReport {
    std::string config_echo;  // canonical JSON of the parsed config
    std::size_t n_devices = 0;
    double range = 0.0;
    double average_degree = 0.0;
    std::uint64_t master_seed = 0;
    std::vector<double> betas;
    std::vector<std::string> warnings;
    /// Per cluster of the fixed-source plan (when one was built): grid and coverage.
    std::vector<double> angle_grid;
    std::vector<std::vector<double>> angle_sweeps;
    std::vector<double> rotation_angles;
    std::vector<StrategySummary> summaries;
    std::vector<RunRecord> records;
};

struct PreparedTopology {
    PlanarTopology topology;
    RadioModel radio;
};

/// Loads or generates the topology and fixes the range.
PreparedTopology prepare_topology(const ExperimentConfig& config);

ExperimentReport run_experiment(const ExperimentConfig& config);

std::string report_to_json(const ExperimentReport& report);
/// Only the per-run records, one JSON object per line.
std::string records_to_jsonl(const std::vector<RunRecord>& records);

/// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

enum class PlotKind { EtaTable, CoverageTable, AlphaVsBeta, AngleSweep };
PlotKind parse_plot_kind(const std::string& name);
/// CSV with a header row, from a report JSON document.
std::string emit_plot_data(const std::string& report_json, PlotKind kind);

struct RelayDeployment {
    PlanarTopology topology;
    FishbonePlan plan;
    DeviceId relay = 0;
    std::optional<std::string> warning;  // set when the relay reaches no existing relay
};

/// Adds one device at `position` and lists it as an extra single-relay chain;
/// route compilation hangs it off the nearest relay in range.
RelayDeployment deploy_relay(const PlanarTopology& topology, const FishbonePlan& plan, Vec2 position,
                             RadioModel radio);

}  // namespace fishbone
