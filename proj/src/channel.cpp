#include "channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace idsim {

namespace {

constexpr double kRowSumTolerance = 1e-12;

}  // namespace

Dmc::Dmc(std::size_t inputs, std::size_t outputs, std::vector<double> transition)
    : inputs_(inputs), outputs_(outputs), rows_(std::move(transition)) {
    if (inputs_ == 0 || outputs_ == 0)
        throw ConfigError("channel: alphabets must be nonempty");
    if (rows_.size() != inputs_ * outputs_)
        throw ConfigError("channel: transition matrix must have |X|*|Y| entries");
    support_offset_.assign(inputs_ + 1, 0);
    for (std::size_t x = 0; x < inputs_; ++x) {
        double sum = 0.0;
        for (std::size_t y = 0; y < outputs_; ++y) {
            double w = rows_[x * outputs_ + y];
            if (!(w >= 0.0 && w <= 1.0))
                throw ConfigError("channel: transition probabilities must lie in [0, 1]");
            sum += w;
            if (w > 0.0) support_flat_.push_back(static_cast<Symbol>(y));
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance)
            throw ConfigError("channel: row " + std::to_string(x) + " sums to " +
                              std::to_string(sum) + ", expected 1");
        support_offset_[x + 1] = support_flat_.size();
        max_support_ = std::max(max_support_, support_offset_[x + 1] - support_offset_[x]);
    }
    row_cumulative_.resize(inputs_ * outputs_);
    for (std::size_t x = 0; x < inputs_; ++x) {
        double acc = 0.0;
        for (std::size_t y = 0; y < outputs_; ++y) {
            acc += rows_[x * outputs_ + y];
            row_cumulative_[x * outputs_ + y] = acc;
        }
        row_cumulative_[x * outputs_ + outputs_ - 1] = 1.0;
    }
}

Dmc Dmc::bsc(const BscParams& params) {
    double p = params.crossover;
    if (!(p >= 0.0 && p <= 0.5))
        throw ConfigError("bsc: crossover must lie in [0, 0.5], got " + std::to_string(p));
    return Dmc(2, 2, {1.0 - p, p, p, 1.0 - p});
}

Dmc Dmc::identity(std::size_t size) {
    std::vector<double> rows(size * size, 0.0);
    for (std::size_t i = 0; i < size; ++i) rows[i * size + i] = 1.0;
    return Dmc(size, size, std::move(rows));
}

std::span<const Symbol> Dmc::support(Symbol x) const {
    std::size_t begin = support_offset_[x];
    return {support_flat_.data() + begin, support_offset_[x + 1] - begin};
}

bool Dmc::bsc_crossover(double* p_out) const {
    if (inputs_ != 2 || outputs_ != 2) return false;
    double p = rows_[1];
    if (std::abs(rows_[2] - p) > 1e-15 || std::abs(rows_[0] - (1.0 - p)) > 1e-15 ||
        std::abs(rows_[3] - (1.0 - p)) > 1e-15)
        return false;
    if (p_out) *p_out = p;
    return true;
}

std::string Dmc::to_json_text() const {
    nlohmann::ordered_json j;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t x = 0; x < inputs_; ++x) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t y = 0; y < outputs_; ++y) row.push_back(rows_[x * outputs_ + y]);
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j.dump();
}

Dmc Dmc::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("channel json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("inputs") || !j.contains("outputs") || !j.contains("rows"))
        throw ConfigError("channel json: expected object with inputs, outputs, rows");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "inputs" && it.key() != "outputs" && it.key() != "rows")
            throw ConfigError("channel json: unknown key \"" + it.key() + "\"");
    }
    if (!j["inputs"].is_number_unsigned() || !j["outputs"].is_number_unsigned())
        throw ConfigError("channel json: inputs and outputs must be positive integers");
    std::size_t inputs = j["inputs"].get<std::size_t>();
    std::size_t outputs = j["outputs"].get<std::size_t>();
    if (!j["rows"].is_array() || j["rows"].size() != inputs)
        throw ConfigError("channel json: rows must be an array with one row per input symbol");
    std::vector<double> flat;
    flat.reserve(inputs * outputs);
    for (const auto& row : j["rows"]) {
        if (!row.is_array() || row.size() != outputs)
            throw ConfigError("channel json: each row needs one entry per output symbol");
        for (const auto& v : row) {
            if (!v.is_number()) throw ConfigError("channel json: row entries must be numbers");
            flat.push_back(v.get<double>());
        }
    }
    return Dmc(inputs, outputs, std::move(flat));
}

ChannelUse ChannelUse::make(std::vector<Symbol> input, std::vector<Symbol> output) {
    if (input.size() != output.size())
        throw ConfigError("channel use: input and output blocks must have equal length");
    ChannelUse use;
    use.blocklength = input.size();
    use.input = std::move(input);
    use.output = std::move(output);
    return use;
}

double product_prob(const Dmc& ch, std::span<const Symbol> x, std::span<const Symbol> y) {
    if (x.size() != y.size())
        throw ConfigError("product_prob: input and output blocks must have equal length");
    double p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= ch.input_count() || y[i] >= ch.output_count())
            throw ConfigError("product_prob: symbol outside channel alphabet at position " +
                              std::to_string(i));
        p *= ch.prob(x[i], y[i]);
    }
    return p;
}

void sample_output_into(const Dmc& ch, std::span<const Symbol> x, Rng& rng,
                        std::vector<Symbol>& out) {
    out.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= ch.input_count())
            throw ConfigError("sample_output: symbol outside channel input alphabet");
        auto sup = ch.support(x[i]);
        if (sup.size() == 1) {
            out[i] = sup[0];
            continue;
        }
        double u = rng.next_unit();
        const double* cdf = ch.row_cumulative_.data() + x[i] * ch.output_count();
        std::size_t y = 0;
        while (u >= cdf[y]) ++y;
        out[i] = static_cast<Symbol>(y);
    }
}

std::vector<Symbol> sample_output(const Dmc& ch, std::span<const Symbol> x, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Symbol> out;
    sample_output_into(ch, x, rng, out);
    return out;
}

ChannelUse transmit(const Dmc& ch, std::vector<Symbol> x, std::uint64_t seed) {
    auto y = sample_output(ch, x, seed);
    return ChannelUse::make(std::move(x), std::move(y));
}

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double capacity_bsc(const BscParams& params) {
    if (!(params.crossover >= 0.0 && params.crossover <= 0.5))
        throw ConfigError("bsc: crossover must lie in [0, 0.5]");
    return 1.0 - binary_entropy(params.crossover);
}

CapacityResult capacity_iterative(const Dmc& ch, double tolerance) {
    if (!(tolerance > 0.0)) throw ConfigError("capacity_iterative: tolerance must be positive");
    const std::size_t m = ch.input_count();
    const std::size_t n = ch.output_count();
    constexpr std::size_t kMaxIterations = 100000;

    std::vector<double> p(m, 1.0 / static_cast<double>(m));
    std::vector<double> q(n, 0.0);
    std::vector<double> d(m, 0.0);

    CapacityResult result;
    for (std::size_t iter = 1; iter <= kMaxIterations; ++iter) {
        std::fill(q.begin(), q.end(), 0.0);
        for (std::size_t x = 0; x < m; ++x)
            for (std::size_t y = 0; y < n; ++y) q[y] += p[x] * ch.prob(x, y);
        // d[x] = D( W(.|x) || q ) in bits; W entries of 0 contribute nothing,
        // and q[y] > 0 whenever W(y|x) > 0 because p stays strictly positive.
        double upper = -1.0;
        for (std::size_t x = 0; x < m; ++x) {
            double dx = 0.0;
            for (Symbol y : ch.support(static_cast<Symbol>(x))) {
                double w = ch.prob(static_cast<Symbol>(x), y);
                dx += w * std::log2(w / q[y]);
            }
            d[x] = dx;
            upper = std::max(upper, dx);
        }
        double z = 0.0;
        for (std::size_t x = 0; x < m; ++x) z += p[x] * std::exp2(d[x]);
        double lower = std::log2(z);
        for (std::size_t x = 0; x < m; ++x) p[x] = p[x] * std::exp2(d[x]) / z;

        result.iterations = iter;
        result.bound_gap = upper - lower;
        result.capacity_bits = std::max(0.0, lower);
        result.input_distribution = p;
        if (result.bound_gap <= tolerance) return result;
    }
    std::ostringstream msg;
    msg << "capacity_iterative: no convergence within " << kMaxIterations
        << " iterations; last estimate " << result.capacity_bits << " bits, bound gap "
        << result.bound_gap;
    throw RuntimeError(msg.str());
}

}  // namespace idsim
