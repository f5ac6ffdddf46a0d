#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "population.hpp"

namespace idsim {

struct SensorModel {
    double p_detect = 1.0;        // per-device detection probability inside the resonant zone
    double clutter_rate = 0.0;    // Poisson mean of spurious counts per region per scan
    std::uint32_t threshold = 1;  // minimum count estimate to declare presence
    std::uint32_t latency_epochs = 0;  // scan duration; report usable only after it elapses
};

struct SensingReport {
    std::uint32_t region = 0;
    std::uint64_t count_estimate = 0;
    bool detected = false;          // count_estimate >= threshold
    std::uint64_t acquired_at = 0;  // scan start epoch
    std::uint64_t available_at = 0; // acquired_at + latency_epochs
};

void validate(const SensorModel& model);

// One scan over every region: the count estimate is a Binomial(n_R, p_detect)
// thinning of the true occupancy plus Poisson clutter. Deterministic given the
// seed; regions use independent derived streams.
std::vector<SensingReport> scan(const SensorModel& model, const VascularGraph& graph,
                                std::span<const Device> devices, std::uint64_t epoch,
                                std::uint64_t seed);

// Exact P(count estimate >= threshold) for a region holding `occupancy`
// devices: the Binomial + Poisson upper tail.
double detection_probability(const SensorModel& model, std::uint64_t occupancy);

// Empirical (P_detect at the given occupancy, P_false at occupancy zero).
std::pair<double, double> detection_roc(const SensorModel& model, std::uint64_t occupancy,
                                        std::uint64_t trials, std::uint64_t seed);

}  // namespace idsim
