#include "fishbone/metrics.hpp"

#include "fishbone/errors.hpp"

namespace fishbone {

void EnergyParams::validate() const {
    if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in (0, 1]");
    if (!(p_t > 0.0 && p_r > 0.0 && p_s > 0.0)) throw InvalidArgument("powers must be positive");
}

Totals Totals::of(const SimOutcome& o) {
    return {o.total_covered(), o.total_transmissions(), o.total_receptions(), o.total_standby_misses()};
}

double coverage_probability(const Totals& t, std::size_t n_devices) {
    if (n_devices == 0) throw InvalidArgument("coverage needs at least one device");
    return static_cast<double>(t.covered) / static_cast<double>(n_devices);
}

double coverage_probability(const SimOutcome& outcome, std::size_t n_devices) {
    return coverage_probability(Totals::of(outcome), n_devices);
}

double forwarding_efficiency(const Totals& t) {
    if (t.transmissions == 0) throw UndefinedMetricError("forwarding efficiency undefined: no transmissions");
    return static_cast<double>(t.covered) / static_cast<double>(t.transmissions);
}

double forwarding_efficiency(const SimOutcome& outcome) { return forwarding_efficiency(Totals::of(outcome)); }

double energy_efficiency(const Totals& t, const EnergyParams& p) {
    p.validate();
    const double watts = p.p_t / p.beta * static_cast<double>(t.transmissions) +
                         p.p_r * static_cast<double>(t.receptions) + p.p_s * static_cast<double>(t.standby_misses);
    if (!(watts > 0.0)) throw UndefinedMetricError("energy efficiency undefined: no power consumed");
    return static_cast<double>(t.covered) / watts;
}

double energy_efficiency(const SimOutcome& outcome, const EnergyParams& params) {
    return energy_efficiency(Totals::of(outcome), params);
}

}  // namespace fishbone
