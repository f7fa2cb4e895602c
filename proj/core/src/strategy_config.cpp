#include <sstream>

#include "fishbone/errors.hpp"
#include "fishbone/strategies.hpp"

namespace fishbone {

std::string StrategyConfig::name() const {
    if (!label.empty()) return label;
    std::ostringstream os;
    switch (kind) {
        case StrategyKind::Epidemic: return "epidemic";
        case StrategyKind::FloodOnce: return "flood_once";
        case StrategyKind::ModifiedBip: return "modified_bip";
        case StrategyKind::Pf: os << "pf_" << p_f; return os.str();
        case StrategyKind::Npb: return "npb";
        case StrategyKind::Fifo: return "fifo";
        case StrategyKind::FifoMaHybrid: return "fifo_ma+" + (inner ? inner->name() : std::string("?"));
    }
    return "?";
}

void StrategyConfig::validate() const {
    switch (kind) {
        case StrategyKind::Pf:
            if (!(p_f >= 0.0 && p_f <= 1.0)) throw ConfigError(name() + ": p_f must lie in [0, 1]");
            break;
        case StrategyKind::Npb:
            if (!(npb.coverage_ratio_weight > 0.0 && npb.c_min > 0.0 && npb.c_max >= npb.c_min))
                throw ConfigError(name() + ": NPB parameters must be positive with c_min <= c_max");
            break;
        case StrategyKind::FifoMaHybrid:
            if (!inner) throw ConfigError("hybrid strategy needs an inner strategy");
            if (inner->kind != StrategyKind::Pf && inner->kind != StrategyKind::Npb)
                throw ConfigError("hybrid inner strategy must be pf or npb");
            inner->validate();
            break;
        default:
            break;
    }
}

std::shared_ptr<const Strategy> make_strategy(const StrategyConfig& config, std::shared_ptr<const FishbonePlan> plan) {
    config.validate();
    const bool fishbone = config.kind == StrategyKind::Fifo || config.kind == StrategyKind::FifoMaHybrid;
    if (fishbone && !plan) throw ConfigError(config.name() + " needs a fishbone plan");
    switch (config.kind) {
        case StrategyKind::Epidemic: return epidemic_strategy();
        case StrategyKind::FloodOnce: return flood_once_strategy();
        case StrategyKind::ModifiedBip: return modified_bip_strategy();
        case StrategyKind::Pf: return pf_strategy(config.p_f);
        case StrategyKind::Npb: return npb_strategy(config.npb);
        case StrategyKind::Fifo: return fifo_strategy(std::move(plan));
        case StrategyKind::FifoMaHybrid: return fifo_ma_hybrid(make_strategy(*config.inner), std::move(plan));
    }
    throw InvalidArgument("unknown strategy kind");
}

}  // namespace fishbone
