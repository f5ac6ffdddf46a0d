#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace idsim {

// Error kinds double as process exit codes (0 is success).
enum class ErrorKind : int {
    config = 2,
    infeasible = 3,
    runtime = 4,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(ErrorKind::config, msg) {}
};

struct FeasibilityError : Error {
    explicit FeasibilityError(const std::string& msg) : Error(ErrorKind::infeasible, msg) {}
};

struct RuntimeError : Error {
    explicit RuntimeError(const std::string& msg) : Error(ErrorKind::runtime, msg) {}
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Folds an arbitrary list of tags into one well-mixed seed. Used to derive
// independent substreams (per epoch, per device, per sweep cell, ...) from a
// single run seed so that results do not depend on scheduling or worker count.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    for (std::uint64_t p : parts) {
        h ^= p;
        (void)splitmix64(h);
        h = splitmix64(h);
    }
    return h;
}

// Small deterministic PRNG (splitmix64 stream). Not cryptographic; plenty for
// simulation. All distribution helpers are hand-rolled so that sequences are
// identical across platforms and standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_unit() < p; }

    // Uniform in {0, ..., n-1}, unbiased via rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw RuntimeError("Rng::below: n must be positive");
        if ((n & (n - 1)) == 0) return next_u64() & (n - 1);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        for (;;) {
            std::uint64_t v = next_u64();
            if (v < limit) return v % n;
        }
    }

    // Index drawn according to `weights` (need not be normalized).
    std::size_t categorical(const std::vector<double>& cumulative) {
        // cumulative: strictly increasing partial sums, last entry = total.
        double u = next_unit() * cumulative.back();
        std::size_t lo = 0, hi = cumulative.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (u < cumulative[mid])
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

    std::uint64_t poisson(double mu) {
        if (!(mu >= 0.0)) throw RuntimeError("Rng::poisson: mean must be nonnegative");
        std::uint64_t total = 0;
        // Knuth's product method underflows for large means; split into chunks
        // (a sum of independent Poissons is Poisson).
        while (mu > 30.0) {
            total += poisson_knuth(30.0);
            mu -= 30.0;
        }
        return total + poisson_knuth(mu);
    }

  private:
    std::uint64_t poisson_knuth(double mu) {
        if (mu <= 0.0) return 0;
        const double limit = std::exp(-mu);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= next_unit();
        } while (p > limit);
        return k - 1;
    }

    std::uint64_t state_;
};

// Kahan-style compensated accumulator for exact enumeration sums.
class CompensatedSum {
  public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline std::size_t effective_workers(std::size_t requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

// Runs body(i) for i in [0, n). Distinct indices may run on different threads;
// callers must make per-index work independent (results written by index).
template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& body) {
    workers = effective_workers(workers);
    if (workers <= 1 || n < 1024) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    if (workers > n) workers = n;
    std::atomic<std::size_t> next{0};
    const std::size_t chunk = 256;
    auto run = [&]() {
        for (;;) {
            std::size_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            std::size_t end = std::min(begin + chunk, n);
            for (std::size_t i = begin; i < end; ++i) body(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

}  // namespace idsim
