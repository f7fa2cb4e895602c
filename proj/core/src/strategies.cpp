#include "fishbone/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>
#include <tuple>

#include "fishbone/errors.hpp"
#include "fishbone/rng.hpp"

namespace fishbone {

namespace {

DisseminationMessage plain_message(const RunContext& ctx) {
    DisseminationMessage m;
    m.source_device_id = ctx.topology.at(ctx.source_index).id;
    m.sequence_number = ctx.sequence_number;
    return m;
}

DisseminationMessage relayed(const DisseminationMessage& msg, DeviceId by) {
    DisseminationMessage m = msg;
    m.source_device_id = by;
    return m;
}

double coin(std::uint64_t seed, DeviceId device, std::uint32_t seq, std::uint64_t salt) {
    return unit_interval(derive_seed({seed, salt, device, seq}));
}

// ---------------------------------------------------------------- epidemic

class EpidemicRun final : public StrategyRun {
public:
    explicit EpidemicRun(const RunContext& ctx) : msg_(plain_message(ctx)) {}
    DisseminationMessage initial_message() override { return msg_; }
    std::optional<DisseminationMessage> on_receive(const Reception&, const NeighborView&) override {
        return std::nullopt;
    }
    std::optional<DisseminationMessage> on_idle(std::size_t index, int, const NeighborView& view) override {
        return relayed(msg_, view.topology.at(index).id);
    }
    bool wants_idle() const override { return true; }

private:
    DisseminationMessage msg_;
};

class Epidemic final : public Strategy {
public:
    std::string name() const override { return "epidemic"; }
    std::unique_ptr<StrategyRun> start(const RunContext& ctx) const override {
        return std::make_unique<EpidemicRun>(ctx);
    }
};

// ------------------------------------------------------------- flood once

class FloodOnceRun final : public StrategyRun {
public:
    explicit FloodOnceRun(const RunContext& ctx) : msg_(plain_message(ctx)) {}
    DisseminationMessage initial_message() override { return msg_; }
    std::optional<DisseminationMessage> on_receive(const Reception& rx, const NeighborView&) override {
        if (!rx.first_copy) return std::nullopt;
        return relayed(rx.message, rx.device);
    }

private:
    DisseminationMessage msg_;
};

class FloodOnce final : public Strategy {
public:
    std::string name() const override { return "flood_once"; }
    std::unique_ptr<StrategyRun> start(const RunContext& ctx) const override {
        return std::make_unique<FloodOnceRun>(ctx);
    }
};

// ---------------------------------------------------------- modified BIP

class BipRun final : public StrategyRun {
public:
    explicit BipRun(const RunContext& ctx) : msg_(plain_message(ctx)), transmit_(ctx.topology.size(), 0) {
        for (std::size_t s : bip_transmitters(ctx.graph, ctx.topology, ctx.source_index)) transmit_[s] = 1;
    }
    DisseminationMessage initial_message() override { return msg_; }
    std::optional<DisseminationMessage> on_receive(const Reception& rx, const NeighborView&) override {
        if (!rx.first_copy || !transmit_[rx.index]) return std::nullopt;
        return relayed(rx.message, rx.device);
    }

private:
    DisseminationMessage msg_;
    std::vector<char> transmit_;
};

class ModifiedBip final : public Strategy {
public:
    std::string name() const override { return "modified_bip"; }
    std::unique_ptr<StrategyRun> start(const RunContext& ctx) const override {
        return std::make_unique<BipRun>(ctx);
    }
};

// -------------------------------------------------------------------- PF

class PfRun final : public StrategyRun {
public:
    PfRun(const RunContext& ctx, double p) : msg_(plain_message(ctx)), p_(p), seed_(ctx.seed) {}
    DisseminationMessage initial_message() override { return msg_; }
    std::optional<DisseminationMessage> on_receive(const Reception& rx, const NeighborView&) override {
        if (!rx.first_copy) return std::nullopt;
        if (coin(seed_, rx.device, rx.message.sequence_number, 0x5046) >= p_) return std::nullopt;
        return relayed(rx.message, rx.device);
    }

private:
    DisseminationMessage msg_;
    double p_;
    std::uint64_t seed_;
};

class Pf final : public Strategy {
public:
    explicit Pf(double p) : p_(p) {}
    std::string name() const override {
        std::ostringstream os;
        os << "pf_" << p_;
        return os.str();
    }
    std::unique_ptr<StrategyRun> start(const RunContext& ctx) const override {
        return std::make_unique<PfRun>(ctx, p_);
    }

private:
    double p_;
};

// ------------------------------------------------------------------- NPB

class NpbRun final : public StrategyRun {
public:
    NpbRun(const RunContext& ctx, const NpbParams& params)
        : msg_(plain_message(ctx)),
          params_(params),
          seed_(ctx.seed),
          avg_degree_(ctx.graph.average_degree()),
          heard_(ctx.topology.size()),
          decided_(ctx.topology.size(), 0),
          mark_(ctx.topology.size(), 0) {
        decided_[ctx.source_index] = 1;
    }
    DisseminationMessage initial_message() override { return msg_; }
    std::optional<DisseminationMessage> on_receive(const Reception& rx, const NeighborView&) override {
        if (!decided_[rx.index]) {
            heard_[rx.index].push_back(rx.sender_index);
            if (rx.first_copy) payload_.emplace(rx.index, rx.message);
        }
        return std::nullopt;
    }
    std::optional<DisseminationMessage> on_round_end(std::size_t j, int, const NeighborView& view) override {
        if (decided_[j]) return std::nullopt;
        decided_[j] = 1;
        const auto& g = view.graph;
        ++stamp_;
        for (std::size_t s : heard_[j]) {
            mark_[s] = stamp_;
            for (std::uint32_t v : g.neighbors(s)) mark_[v] = stamp_;
        }
        std::size_t uncovered = 0;
        for (std::uint32_t v : g.neighbors(j)) uncovered += mark_[v] != stamp_;
        heard_[j].clear();
        heard_[j].shrink_to_fit();
        auto node = payload_.extract(j);
        const double p = npb_probability(uncovered, g.degree(j), avg_degree_, params_);
        const DeviceId id = view.topology.at(j).id;
        if (node.empty() || coin(seed_, id, msg_.sequence_number, 0x4e5042) >= p) return std::nullopt;
        return relayed(node.mapped(), id);
    }
    bool wants_round_end() const override { return true; }

private:
    DisseminationMessage msg_;
    NpbParams params_;
    std::uint64_t seed_;
    double avg_degree_;
    std::vector<std::vector<std::size_t>> heard_;
    std::vector<char> decided_;
    std::vector<std::uint32_t> mark_;
    std::uint32_t stamp_ = 0;
    std::map<std::size_t, DisseminationMessage> payload_;
};

class Npb final : public Strategy {
public:
    explicit Npb(const NpbParams& p) : params_(p) {}
    std::string name() const override { return "npb"; }
    std::unique_ptr<StrategyRun> start(const RunContext& ctx) const override {
        return std::make_unique<NpbRun>(ctx, params_);
    }

private:
    NpbParams params_;
};

// ------------------------------------------------------------ FiFo family

// Relays follow the relay lists (each forwards at most once); every other
// device is handed to `inner`, if any.
class FifoRun final : public StrategyRun {
public:
    FifoRun(const RunContext& ctx, const FishboneRoute& route, std::unique_ptr<StrategyRun> inner)
        : source_(ctx.topology.at(ctx.source_index).id),
          message_(forwarded_by(source_, route.message)),
          relay_(ctx.topology.size(), 0),
          done_(ctx.topology.size(), 0),
          seen_(ctx.topology.size()),
          inner_(std::move(inner)) {
        for (DeviceId id : route.relays) relay_[ctx.topology.index_of(id)] = 1;
        relay_[ctx.source_index] = 1;
        done_[ctx.source_index] = 1;
    }
    DisseminationMessage initial_message() override { return message_; }
    std::optional<DisseminationMessage> on_receive(const Reception& rx, const NeighborView& view) override {
        if (!relay_[rx.index]) return inner_ ? inner_->on_receive(rx, view) : std::nullopt;
        if (done_[rx.index]) return std::nullopt;
        auto d = relay_decision(rx.device, rx.message, seen_[rx.index]);
        if (auto* f = std::get_if<Forward>(&d)) {
            done_[rx.index] = 1;
            return std::move(f->message);
        }
        return std::nullopt;
    }
    std::optional<DisseminationMessage> on_round_end(std::size_t index, int round, const NeighborView& view) override {
        if (relay_[index] || !inner_) return std::nullopt;
        return inner_->on_round_end(index, round, view);
    }
    std::optional<DisseminationMessage> on_idle(std::size_t index, int round, const NeighborView& view) override {
        if (relay_[index] || !inner_) return std::nullopt;
        return inner_->on_idle(index, round, view);
    }
    bool wants_round_end() const override { return inner_ && inner_->wants_round_end(); }
    bool wants_idle() const override { return inner_ && inner_->wants_idle(); }

private:
    DeviceId source_;
    DisseminationMessage message_;
    std::vector<char> relay_;
    std::vector<char> done_;
    std::vector<SeenSet> seen_;
    std::unique_ptr<StrategyRun> inner_;
};

class Fifo final : public Strategy {
public:
    Fifo(std::shared_ptr<const FishbonePlan> plan, std::shared_ptr<const Strategy> inner)
        : plan_(std::move(plan)), inner_(std::move(inner)) {
        if (!plan_) throw InvalidArgument("fishbone strategies need a plan");
    }
    std::string name() const override { return inner_ ? "fifo_ma+" + inner_->name() : "fifo"; }
    std::unique_ptr<StrategyRun> start(const RunContext& ctx) const override {
        ChainSelection sel;
        if (inner_) sel.sub = false;
        const DeviceId src = ctx.topology.at(ctx.source_index).id;
        const auto route = compile_route(*plan_, ctx.topology, ctx.graph, src, sel, ctx.sequence_number);
        return std::make_unique<FifoRun>(ctx, route, inner_ ? inner_->start(ctx) : nullptr);
    }

private:
    std::shared_ptr<const FishbonePlan> plan_;
    std::shared_ptr<const Strategy> inner_;
};

}  // namespace

double npb_probability(std::size_t uncovered, std::size_t total, double avg_degree, const NpbParams& params) {
    if (total == 0) return 0.0;
    const double ratio = static_cast<double>(uncovered) / static_cast<double>(total);
    const double c = std::clamp(avg_degree / static_cast<double>(total), params.c_min, params.c_max);
    return std::min(1.0, params.coverage_ratio_weight * ratio * c);
}

std::vector<std::size_t> bip_transmitters(const UnitDiskGraph& graph, const PlanarTopology& topology,
                                          std::size_t source_index) {
    const std::size_t n = topology.size();
    std::vector<char> covered(n, 0), transmits(n, 0);
    std::vector<std::size_t> out;
    // Candidate links (length, covered u, uncovered v); stale entries are skipped.
    using Link = std::tuple<double, std::size_t, std::size_t>;
    std::priority_queue<Link, std::vector<Link>, std::greater<>> heap;

    auto cover = [&](std::size_t v) {
        covered[v] = 1;
        for (std::uint32_t w : graph.neighbors(v))
            if (!covered[w]) heap.emplace(distance(topology.at(v).pos, topology.at(w).pos), v, w);
    };
    auto make_transmitter = [&](std::size_t u) {
        transmits[u] = 1;
        out.push_back(u);
        std::vector<std::size_t> fresh;
        for (std::uint32_t w : graph.neighbors(u))
            if (!covered[w]) fresh.push_back(w);
        for (std::size_t w : fresh) cover(w);
    };

    covered[source_index] = 1;
    make_transmitter(source_index);
    while (!heap.empty()) {
        const auto [d, u, v] = heap.top();
        heap.pop();
        if (covered[v] || transmits[u]) continue;
        make_transmitter(u);
    }
    return out;
}

std::shared_ptr<const Strategy> epidemic_strategy() { return std::make_shared<Epidemic>(); }
std::shared_ptr<const Strategy> flood_once_strategy() { return std::make_shared<FloodOnce>(); }
std::shared_ptr<const Strategy> modified_bip_strategy() { return std::make_shared<ModifiedBip>(); }

std::shared_ptr<const Strategy> pf_strategy(double p_f) {
    if (!(p_f >= 0.0 && p_f <= 1.0)) throw InvalidArgument("p_f must lie in [0, 1]");
    return std::make_shared<Pf>(p_f);
}

std::shared_ptr<const Strategy> npb_strategy(const NpbParams& params) {
    if (!(params.coverage_ratio_weight > 0.0)) throw InvalidArgument("coverage_ratio_weight must be > 0");
    if (!(params.c_min > 0.0 && params.c_min <= params.c_max))
        throw InvalidArgument("NPB clamp needs 0 < c_min <= c_max");
    return std::make_shared<Npb>(params);
}

std::shared_ptr<const Strategy> fifo_strategy(std::shared_ptr<const FishbonePlan> plan) {
    return std::make_shared<Fifo>(std::move(plan), nullptr);
}

std::shared_ptr<const Strategy> fifo_ma_hybrid(std::shared_ptr<const Strategy> inner,
                                               std::shared_ptr<const FishbonePlan> plan) {
    if (!inner) throw InvalidArgument("hybrid needs an inner strategy");
    return std::make_shared<Fifo>(std::move(plan), std::move(inner));
}

}  // namespace fishbone
