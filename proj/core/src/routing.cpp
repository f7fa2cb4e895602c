#include <algorithm>
#include <limits>
#include <queue>

#include "fishbone/errors.hpp"
#include "fishbone/strategies.hpp"

namespace fishbone {

namespace {

bool selected(const RelayChain& c, bool extra, const ChainSelection& sel) {
    if (extra) return sel.extra;
    return c.kind == ChainKind::Spine ? sel.spine : sel.sub;
}

}  // namespace

FishboneRoute compile_route(const FishbonePlan& plan, const PlanarTopology& topology, const UnitDiskGraph& graph,
                            DeviceId source, ChainSelection selection, std::uint32_t sequence_number) {
    const std::size_t n = topology.size();
    const std::size_t src = topology.index_of(source);

    // Segments of slots; a chain is cut wherever it hits the source or a device
    // that an earlier chain already claimed.
    std::vector<char> claimed(n, 0);
    claimed[src] = 1;
    std::vector<std::vector<std::size_t>> pending;
    auto take = [&](const RelayChain& chain) {
        std::vector<std::size_t> seg;
        for (DeviceId id : chain.relays) {
            const std::size_t s = topology.index_of(id);
            if (claimed[s]) {
                if (!seg.empty()) pending.push_back(std::move(seg));
                seg.clear();
                continue;
            }
            claimed[s] = 1;
            seg.push_back(s);
        }
        if (!seg.empty()) pending.push_back(std::move(seg));
    };
    for (const auto& cp : plan.clusters)
        for (const auto& ch : cp.chains)
            if (selected(ch, false, selection)) take(ch);
    for (const auto& ch : plan.extra_chains)
        if (selected(ch, true, selection)) take(ch);

    FishboneRoute route;
    route.message.source_device_id = source;
    route.message.sequence_number = sequence_number;
    // Round in which an attached device relays (source: 0); unattached: kFar.
    constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> depth(n, kFar);
    depth[src] = 0;

    auto emit = [&](std::size_t junction, const std::vector<std::size_t>& seg) {
        PathInfo p;
        p.path_id = static_cast<std::uint16_t>(route.message.paths.size());
        p.relay_flag = true;
        p.relay_device_ids.push_back(topology.at(junction).id);
        std::size_t d = depth[junction];
        for (std::size_t s : seg) {
            p.relay_device_ids.push_back(topology.at(s).id);
            route.relays.push_back(topology.at(s).id);
            depth[s] = ++d;
        }
        route.message.paths.push_back(std::move(p));
    };

    // Shallowest attached device within range of the head (ties: nearer, then smaller slot).
    auto junction_for = [&](std::size_t head) -> std::optional<std::size_t> {
        std::optional<std::size_t> best;
        double best_d = 0.0;
        for (std::uint32_t v : graph.neighbors(head)) {
            if (depth[v] == kFar) continue;
            const double d = squared_distance(topology.at(v).pos, topology.at(head).pos);
            if (!best || depth[v] < depth[*best] || (depth[v] == depth[*best] && d < best_d)) {
                best_d = d;
                best = v;
            }
        }
        return best;
    };

    while (!pending.empty()) {
        // Attach the chain that can start earliest; repeat while any can.
        for (;;) {
            std::optional<std::size_t> pick, pick_junction;
            for (std::size_t i = 0; i < pending.size(); ++i) {
                const auto j = junction_for(pending[i].front());
                if (j && (!pick || depth[*j] < depth[*pick_junction])) {
                    pick = i;
                    pick_junction = j;
                }
            }
            if (!pick) break;
            emit(*pick_junction, pending[*pick]);
            pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(*pick));
        }
        if (pending.empty()) break;

        // Bridge: shallowest unit-disk path from the attached tree to a device
        // of a pending chain; that chain is cut there so the cut-off tail can
        // hang off the bridge.
        std::vector<std::pair<int, std::size_t>> owner(n, {-1, 0});
        for (std::size_t i = 0; i < pending.size(); ++i)
            for (std::size_t k = 0; k < pending[i].size(); ++k) owner[pending[i][k]] = {static_cast<int>(i), k};
        std::vector<std::size_t> parent(n, n);
        std::vector<std::size_t> reach(depth);
        using Item = std::pair<std::size_t, std::size_t>;  // (round, slot)
        std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
        for (std::size_t s = 0; s < n; ++s)
            if (depth[s] != kFar) queue.push({depth[s], s});
        std::optional<std::size_t> target;
        while (!queue.empty()) {
            const auto [d, u] = queue.top();
            queue.pop();
            if (d != reach[u]) continue;
            if (owner[u].first >= 0) {
                target = u;
                break;
            }
            for (std::uint32_t v : graph.neighbors(u)) {
                if (reach[v] <= d + 1) continue;
                reach[v] = d + 1;
                parent[v] = u;
                queue.push({d + 1, v});
            }
        }
        if (!target) {
            route.dropped_chains += pending.size();
            break;
        }
        const auto [seg, cut] = owner[*target];
        if (cut > 0) {
            auto& chain = pending[static_cast<std::size_t>(seg)];
            std::vector<std::size_t> tail(chain.begin() + static_cast<std::ptrdiff_t>(cut), chain.end());
            chain.resize(cut);
            pending.push_back(std::move(tail));
        }
        std::vector<std::size_t> bridge;
        std::size_t at = parent[*target];
        while (depth[at] == kFar) {
            bridge.push_back(at);
            at = parent[at];
        }
        if (bridge.empty()) continue;
        std::reverse(bridge.begin(), bridge.end());
        RelayChain rc{ChainKind::Bridge, 0, std::nullopt, {}};
        for (std::size_t s : bridge) rc.relays.push_back(topology.at(s).id);
        route.bridges.push_back(std::move(rc));
        emit(at, bridge);
    }
    normalize_counts(route.message);
    return route;
}

}  // namespace fishbone
