#include "sensing.hpp"

#include <cmath>

namespace idsim {

void validate(const SensorModel& model) {
    if (!(model.p_detect >= 0.0 && model.p_detect <= 1.0))
        throw ConfigError("sensor: p_detect must lie in [0, 1]");
    if (!(model.clutter_rate >= 0.0) || model.clutter_rate > 1e6)
        throw ConfigError("sensor: clutter_rate must lie in [0, 1e6]");
    if (model.threshold < 1) throw ConfigError("sensor: threshold must be >= 1");
}

std::vector<SensingReport> scan(const SensorModel& model, const VascularGraph& graph,
                                std::span<const Device> devices, std::uint64_t epoch,
                                std::uint64_t seed) {
    validate(model);
    const auto regions = static_cast<std::uint32_t>(graph.region_labels().size());
    std::vector<std::uint64_t> occupancy(regions, 0);
    for (const Device& d : devices) {
        if (d.exited) continue;
        std::int32_t r = graph.region_of_edge(d.edge);
        if (r >= 0) occupancy[static_cast<std::uint32_t>(r)] += 1;
    }
    std::vector<SensingReport> reports;
    reports.reserve(regions);
    for (std::uint32_t r = 0; r < regions; ++r) {
        Rng rng(derive_seed({seed, 0x5CA7ULL, r}));
        std::uint64_t count = 0;
        if (model.p_detect >= 1.0) {
            count = occupancy[r];
        } else if (model.p_detect > 0.0) {
            for (std::uint64_t i = 0; i < occupancy[r]; ++i)
                if (rng.bernoulli(model.p_detect)) ++count;
        }
        count += rng.poisson(model.clutter_rate);
        SensingReport report;
        report.region = r;
        report.count_estimate = count;
        report.detected = count >= model.threshold;
        report.acquired_at = epoch;
        report.available_at = epoch + model.latency_epochs;
        reports.push_back(report);
    }
    return reports;
}

namespace {

// P(Poisson(mu) >= m), exact partial sum.
double poisson_upper_tail(double mu, std::int64_t m) {
    if (m <= 0) return 1.0;
    if (mu <= 0.0) return 0.0;
    double term = std::exp(-mu);
    double cdf = term;
    for (std::int64_t j = 1; j < m; ++j) {
        term *= mu / static_cast<double>(j);
        cdf += term;
    }
    return std::max(0.0, 1.0 - cdf);
}

}  // namespace

double detection_probability(const SensorModel& model, std::uint64_t occupancy) {
    validate(model);
    const double p = model.p_detect;
    const auto tau = static_cast<std::int64_t>(model.threshold);
    const auto n = static_cast<std::int64_t>(occupancy);
    if (p >= 1.0) return poisson_upper_tail(model.clutter_rate, tau - n);
    if (p <= 0.0 || n == 0) return poisson_upper_tail(model.clutter_rate, tau);
    // Sum over binomial outcomes in log space; terms below ~e^-45 are dropped.
    double total = 0.0;
    const double log_p = std::log(p);
    const double log_1p = std::log1p(-p);
    const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
    for (std::int64_t b = 0; b <= n; ++b) {
        double log_pmf = lg_n1 - std::lgamma(static_cast<double>(b) + 1.0) -
                         std::lgamma(static_cast<double>(n - b) + 1.0) +
                         static_cast<double>(b) * log_p + static_cast<double>(n - b) * log_1p;
        if (log_pmf < -45.0) continue;
        total += std::exp(log_pmf) * poisson_upper_tail(model.clutter_rate, tau - b);
    }
    return std::min(1.0, total);
}

std::pair<double, double> detection_roc(const SensorModel& model, std::uint64_t occupancy,
                                        std::uint64_t trials, std::uint64_t seed) {
    validate(model);
    if (trials < 1) throw ConfigError("detection_roc: trials must be >= 1");
    Rng rng(derive_seed({seed, 0x0C0CULL}));
    std::uint64_t hits = 0;
    std::uint64_t false_hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::uint64_t count = 0;
        for (std::uint64_t i = 0; i < occupancy; ++i)
            if (rng.bernoulli(model.p_detect)) ++count;
        count += rng.poisson(model.clutter_rate);
        if (count >= model.threshold) ++hits;
        std::uint64_t clutter_only = rng.poisson(model.clutter_rate);
        if (clutter_only >= model.threshold) ++false_hits;
    }
    return {static_cast<double>(hits) / static_cast<double>(trials),
            static_cast<double>(false_hits) / static_cast<double>(trials)};
}

}  // namespace idsim
