#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "util.hpp"

namespace idsim {

using Symbol = std::uint32_t;

struct BscParams {
    double crossover = 0.0;  // p in [0, 0.5]; p > 0.5 is the same channel relabeled
};

// Discrete memoryless channel W(y|x). Immutable after construction and safe
// to share across threads.
class Dmc {
  public:
    Dmc(std::size_t inputs, std::size_t outputs, std::vector<double> transition);

    static Dmc bsc(const BscParams& params);
    static Dmc identity(std::size_t size);

    std::size_t input_count() const { return inputs_; }
    std::size_t output_count() const { return outputs_; }

    double prob(Symbol x, Symbol y) const { return rows_[x * outputs_ + y]; }
    std::span<const double> row(Symbol x) const { return {rows_.data() + x * outputs_, outputs_}; }

    // Output symbols with nonzero probability for input x.
    std::span<const Symbol> support(Symbol x) const;
    std::size_t max_support() const { return max_support_; }
    // True iff every row is a point mass.
    bool noiseless() const { return max_support_ == 1; }

    // If the channel is a BSC, returns its crossover probability.
    bool bsc_crossover(double* p_out) const;

    std::string to_json_text() const;
    static Dmc from_json_text(const std::string& text);

  private:
    std::size_t inputs_ = 0;
    std::size_t outputs_ = 0;
    std::vector<double> rows_;
    std::vector<Symbol> support_flat_;
    std::vector<std::size_t> support_offset_;
    std::size_t max_support_ = 0;
    std::vector<double> row_cumulative_;  // per-row CDF for sampling
    friend std::vector<Symbol> sample_output(const Dmc&, std::span<const Symbol>, std::uint64_t);
    friend void sample_output_into(const Dmc&, std::span<const Symbol>, Rng&, std::vector<Symbol>&);
};

// One use of the n-fold channel: an input block and the observed output block.
struct ChannelUse {
    std::size_t blocklength = 0;
    std::vector<Symbol> input;
    std::vector<Symbol> output;

    static ChannelUse make(std::vector<Symbol> input, std::vector<Symbol> output);
};

// Product-channel probability of output block y given input block x.
double product_prob(const Dmc& ch, std::span<const Symbol> x, std::span<const Symbol> y);

// Draws each output symbol independently from the row of its input symbol.
std::vector<Symbol> sample_output(const Dmc& ch, std::span<const Symbol> x, std::uint64_t seed);
void sample_output_into(const Dmc& ch, std::span<const Symbol> x, Rng& rng, std::vector<Symbol>& out);

ChannelUse transmit(const Dmc& ch, std::vector<Symbol> x, std::uint64_t seed);

double binary_entropy(double p);             // bits
double capacity_bsc(const BscParams& params);  // 1 - h2(p)

struct CapacityResult {
    double capacity_bits = 0.0;
    std::vector<double> input_distribution;
    std::size_t iterations = 0;
    double bound_gap = 0.0;
};

// Alternating-maximization capacity computation. Stops once the gap between
// the per-iteration upper and lower capacity bounds is <= tolerance.
CapacityResult capacity_iterative(const Dmc& ch, double tolerance);

// Enumerates output blocks over the support of W^n(.|x), calling
// f(std::span<const Symbol> y, double prob) for each.
template <typename F>
void for_each_output(const Dmc& ch, std::span<const Symbol> x, F&& f) {
    std::vector<Symbol> y(x.size());
    struct Frame {
        std::span<const Symbol> sup;
        std::size_t pos;
        double prefix;
    };
    if (x.empty()) {
        f(std::span<const Symbol>(y), 1.0);
        return;
    }
    std::vector<Frame> stack(x.size());
    std::size_t depth = 0;
    stack[0] = {ch.support(x[0]), 0, 1.0};
    while (true) {
        Frame& fr = stack[depth];
        if (fr.pos == fr.sup.size()) {
            if (depth == 0) return;
            --depth;
            continue;
        }
        Symbol s = fr.sup[fr.pos++];
        y[depth] = s;
        double p = fr.prefix * ch.prob(x[depth], s);
        if (depth + 1 == x.size()) {
            f(std::span<const Symbol>(y), p);
        } else {
            ++depth;
            stack[depth] = {ch.support(x[depth]), 0, p};
        }
    }
}

}  // namespace idsim
