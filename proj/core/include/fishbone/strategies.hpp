#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fishbone/axes.hpp"
#include "fishbone/simulator.hpp"

namespace fishbone {

// ---------------------------------------------------------------------------
// Fishbone routing: a plan turned into the relay lists the source sends out.

struct ChainSelection {
    bool spine = true;
    bool sub = true;
    bool extra = true;
};

struct FishboneRoute {
    DisseminationMessage message;     // as built by the planner, before the source relays it
    std::vector<DeviceId> relays;     // every device expected to relay, source excluded
    std::vector<RelayChain> bridges;  // connectors added to reach chain heads
    std::size_t dropped_chains = 0;   // chains whose head is not reachable from the source
};

/// Attaches every selected chain to the relay tree grown from `source`: a
/// chain hangs off the nearest already-attached relay within range of its
/// head (that relay becomes the path junction). When no pending chain can be
/// attached, the shortest unit-disk path from the tree to a pending head is
/// added as a bridge chain. Each chain becomes one flagged path whose first
/// entry is its junction.
FishboneRoute compile_route(const FishbonePlan& plan, const PlanarTopology& topology, const UnitDiskGraph& graph,
                            DeviceId source, ChainSelection selection = {}, std::uint32_t sequence_number = 1);

// ---------------------------------------------------------------------------
// Strategies

enum class StrategyKind { Epidemic, FloodOnce, ModifiedBip, Pf, Npb, Fifo, FifoMaHybrid };

struct NpbParams {
    double coverage_ratio_weight = 1.0;
    double c_min = 0.3;
    double c_max = 1.0;
};

struct StrategyConfig {
    StrategyKind kind = StrategyKind::FloodOnce;
    double p_f = 0.5;
    NpbParams npb;
    /// Inner strategy of a FiFo-MA hybrid (Pf or Npb).
    std::shared_ptr<StrategyConfig> inner;
    std::string label;  // report name; derived when empty

    std::string name() const;
    void validate() const;
};

/// Every holder rebroadcasts in every round until the hop cap.
std::shared_ptr<const Strategy> epidemic_strategy();
/// Each device rebroadcasts once, on its first copy.
std::shared_ptr<const Strategy> flood_once_strategy();
/// Broadcast tree grown from the source with a fixed range: repeatedly make
/// the covered non-transmitter with the shortest link to an uncovered device
/// a transmitter. Only tree transmitters broadcast, once.
std::shared_ptr<const Strategy> modified_bip_strategy();
/// Rebroadcast once with probability p_f on the first copy; the coin depends
/// only on (run seed, device, sequence number).
std::shared_ptr<const Strategy> pf_strategy(double p_f);
/// Neighbor-coverage probabilistic rebroadcast, decided at the end of the
/// round of first reception from all copies heard in that round.
std::shared_ptr<const Strategy> npb_strategy(const NpbParams& params);
/// Fishbone relays follow the relay lists; nobody else transmits.
std::shared_ptr<const Strategy> fifo_strategy(std::shared_ptr<const FishbonePlan> plan);
/// Spine (main-axis) relays follow the relay lists; everyone else runs `inner`.
std::shared_ptr<const Strategy> fifo_ma_hybrid(std::shared_ptr<const Strategy> inner,
                                               std::shared_ptr<const FishbonePlan> plan);

/// min(1, w * (uncovered / total) * clamp(avg_degree / local_degree, c_min, c_max));
/// 0 when the device has no neighbors.
double npb_probability(std::size_t uncovered, std::size_t total, double avg_degree, const NpbParams& params);

/// The set of devices the modified-BIP tree makes transmit (slots), source first.
std::vector<std::size_t> bip_transmitters(const UnitDiskGraph& graph, const PlanarTopology& topology,
                                          std::size_t source_index);

/// Builds a strategy; FiFo-family kinds need `plan`.
std::shared_ptr<const Strategy> make_strategy(const StrategyConfig& config,
                                              std::shared_ptr<const FishbonePlan> plan = nullptr);

}  // namespace fishbone
