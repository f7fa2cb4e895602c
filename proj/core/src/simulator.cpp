#include "fishbone/simulator.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "fishbone/errors.hpp"

namespace fishbone {

std::optional<DisseminationMessage> StrategyRun::on_round_end(std::size_t, int, const NeighborView&) {
    return std::nullopt;
}

std::optional<DisseminationMessage> StrategyRun::on_idle(std::size_t, int, const NeighborView&) {
    return std::nullopt;
}

namespace {

template <typename T>
std::uint64_t sum(const std::vector<T>& v) {
    return std::accumulate(v.begin(), v.end(), std::uint64_t{0});
}

}  // namespace

std::uint64_t SimOutcome::total_covered() const { return sum(covered); }
std::uint64_t SimOutcome::total_transmissions() const { return sum(transmissions); }
std::uint64_t SimOutcome::total_receptions() const { return sum(receptions); }
std::uint64_t SimOutcome::total_standby_misses() const { return sum(standby_misses); }

SimOutcome simulate(const PlanarTopology& topology, const UnitDiskGraph& graph, const Strategy& strategy,
                    DeviceId source, const SimOptions& options) {
    if (options.max_hops < 1) throw InvalidArgument("max_hops must be >= 1");
    const auto src = topology.find(source);
    if (!src) throw NotFoundError("unknown source device " + std::to_string(source));
    const std::size_t n = topology.size();

    SimOutcome out;
    out.covered.assign(n, 0);
    out.transmissions.assign(n, 0);
    out.receptions.assign(n, 0);
    out.standby_misses.assign(n, 0);
    out.first_round.assign(n, -1);
    if (options.record_trace) out.trace.emplace();

    const RunContext ctx{topology, graph, *src, options.seed, options.sequence_number};
    auto run = strategy.start(ctx);
    const NeighborView view{topology, graph};

    out.covered[*src] = 1;
    out.first_round[*src] = 0;
    std::vector<std::size_t> holders{*src};

    // Broadcasts of the current round, keyed by sender; the first decision wins.
    std::vector<std::optional<DisseminationMessage>> slot(n);
    std::vector<std::size_t> pending{*src};
    slot[*src] = run->initial_message();

    std::vector<std::optional<DisseminationMessage>> next_slot(n);
    std::vector<std::size_t> next;
    std::vector<std::size_t> touched;
    std::vector<char> touched_flag(n, 0);

    auto schedule = [&](std::size_t who, std::optional<DisseminationMessage>&& msg) {
        if (!msg || next_slot[who]) return;
        next_slot[who] = std::move(msg);
        next.push_back(who);
    };

    for (int round = 1; round <= options.max_hops; ++round) {
        if (run->wants_idle()) {
            for (std::size_t h : holders)
                if (!slot[h])
                    if (auto m = run->on_idle(h, round, view)) {
                        slot[h] = std::move(m);
                        pending.push_back(h);
                    }
        }
        if (pending.empty()) break;
        out.rounds_run = round;
        std::sort(pending.begin(), pending.end());

        const bool last_round = round == options.max_hops;
        for (std::size_t sender : pending) {
            const DisseminationMessage msg = std::move(*slot[sender]);
            slot[sender].reset();
            const auto nbrs = graph.neighbors(sender);
            out.transmissions[sender] += 1;
            out.standby_misses[sender] += n - 1 - nbrs.size();
            if (out.trace) {
                TraceEvent ev{round, topology.at(sender).id, {}};
                ev.receivers.reserve(nbrs.size());
                for (auto j : nbrs) ev.receivers.push_back(topology.at(j).id);
                out.trace->push_back(std::move(ev));
            }
            for (std::uint32_t j : nbrs) {
                out.receptions[j] += 1;
                const bool first = !out.covered[j];
                if (first) {
                    out.covered[j] = 1;
                    out.first_round[j] = round;
                    out.hops_used = round;
                    holders.push_back(j);
                }
                if (!touched_flag[j]) {
                    touched_flag[j] = 1;
                    touched.push_back(j);
                }
                const Reception rx{j, topology.at(j).id, sender, topology.at(sender).id, round, first, msg};
                auto decision = run->on_receive(rx, view);
                if (!last_round) schedule(j, std::move(decision));
            }
        }
        if (run->wants_round_end()) {
            std::sort(touched.begin(), touched.end());
            for (std::size_t j : touched) {
                auto decision = run->on_round_end(j, round, view);
                if (!last_round) schedule(j, std::move(decision));
            }
        }
        for (std::size_t j : touched) touched_flag[j] = 0;
        touched.clear();

        pending.swap(next);
        next.clear();
        slot.swap(next_slot);
    }
    return out;
}

SimOutcome simulate(const PlanarTopology& topology, RadioModel radio, const Strategy& strategy, DeviceId source,
                    const SimOptions& options) {
    const UnitDiskGraph graph(topology, radio);
    return simulate(topology, graph, strategy, source, options);
}

std::string trace_to_jsonl(const std::vector<TraceEvent>& trace) {
    std::string out;
    for (const auto& ev : trace) {
        nlohmann::ordered_json j;
        j["round"] = ev.round;
        j["sender"] = ev.sender;
        j["receivers"] = ev.receivers;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace fishbone
