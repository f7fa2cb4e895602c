#pragma once

#include <cstddef>
#include <cstdint>

#include "fishbone/simulator.hpp"

namespace fishbone {

/// Powers in watts.
struct EnergyParams {
    double beta = 1.0;  // power-amplifier efficiency, (0, 1]
    double p_t = 0.480;
    double p_r = 0.075;
    double p_s = 0.000015;

    void validate() const;
};

struct Totals {
    std::uint64_t covered = 0;
    std::uint64_t transmissions = 0;
    std::uint64_t receptions = 0;
    std::uint64_t standby_misses = 0;

    static Totals of(const SimOutcome& outcome);
};

double coverage_probability(const Totals& t, std::size_t n_devices);
double coverage_probability(const SimOutcome& outcome, std::size_t n_devices);

/// Covered devices per transmission.
double forwarding_efficiency(const Totals& t);
double forwarding_efficiency(const SimOutcome& outcome);

/// Covered devices per watt of transmit, receive and standby power.
double energy_efficiency(const Totals& t, const EnergyParams& params);
double energy_efficiency(const SimOutcome& outcome, const EnergyParams& params);

}  // namespace fishbone
