#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fishbone/message.hpp"
#include "fishbone/topology.hpp"

namespace fishbone {

/// What a strategy may look at when deciding: the unit-disk graph (its own
/// and, as carried by neighbor beacons, its neighbors' adjacency).
struct NeighborView {
    const PlanarTopology& topology;
    const UnitDiskGraph& graph;
};

struct Reception {
    std::size_t index = 0;  // receiver slot
    DeviceId device = 0;
    std::size_t sender_index = 0;
    DeviceId sender = 0;
    int round = 0;
    bool first_copy = false;
    const DisseminationMessage& message;
};

/// Per-run mutable state of a strategy. Returning a message schedules a
/// broadcast for the next round.
class StrategyRun {
public:
    virtual ~StrategyRun() = default;

    /// Payload the source broadcasts in round 1.
    virtual DisseminationMessage initial_message() = 0;
    virtual std::optional<DisseminationMessage> on_receive(const Reception& rx, const NeighborView& view) = 0;
    /// Called after all deliveries of a round for each device that got a copy.
    virtual std::optional<DisseminationMessage> on_round_end(std::size_t index, int round, const NeighborView& view);
    /// Called at the start of a round for each holder with nothing scheduled.
    virtual std::optional<DisseminationMessage> on_idle(std::size_t index, int round, const NeighborView& view);

    virtual bool wants_round_end() const { return false; }
    virtual bool wants_idle() const { return false; }
};

struct RunContext {
    const PlanarTopology& topology;
    const UnitDiskGraph& graph;
    std::size_t source_index = 0;
    std::uint64_t seed = 0;
    std::uint32_t sequence_number = 1;
};

/// Immutable strategy description; `start` creates the state for one run.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual std::string name() const = 0;
    virtual std::unique_ptr<StrategyRun> start(const RunContext& ctx) const = 0;
};

struct TraceEvent {
    int round = 0;
    DeviceId sender = 0;
    std::vector<DeviceId> receivers;
};

/// Counters indexed by device slot (see PlanarTopology::at).
struct SimOutcome {
    std::vector<std::uint8_t> covered;           // I(i)
    std::vector<std::uint32_t> transmissions;    // F(i)
    std::vector<std::uint32_t> receptions;       // R(i)
    std::vector<std::uint64_t> standby_misses;   // U(i)
    std::vector<int> first_round;                // -1 if never covered, 0 for the source
    int hops_used = 0;
    int rounds_run = 0;
    std::optional<std::vector<TraceEvent>> trace;

    std::uint64_t total_covered() const;
    std::uint64_t total_transmissions() const;
    std::uint64_t total_receptions() const;
    std::uint64_t total_standby_misses() const;
};

struct SimOptions {
    int max_hops = 25;
    std::uint64_t seed = 0;
    std::uint32_t sequence_number = 1;
    bool record_trace = false;
};

/// Synchronous-round broadcast engine: a broadcast scheduled for round t
/// reaches every unit-disk neighbor of the sender in round t; runs until no
/// broadcast is pending or `max_hops` rounds have elapsed.
SimOutcome simulate(const PlanarTopology& topology, const UnitDiskGraph& graph, const Strategy& strategy,
                    DeviceId source, const SimOptions& options);
SimOutcome simulate(const PlanarTopology& topology, RadioModel radio, const Strategy& strategy, DeviceId source,
                    const SimOptions& options);

/// One JSON object per line: {"round":..,"sender":..,"receivers":[..]}.
std::string trace_to_jsonl(const std::vector<TraceEvent>& trace);

}  // namespace fishbone
