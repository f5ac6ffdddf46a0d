#include "coding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>

namespace idsim {

namespace {

// One enumerated output block counts as one state; caps keep exact suites in
// the seconds range on commodity hardware.
constexpr double kLog2StatesPerEval = 26.0;
constexpr double kLog2TotalWork = 28.0;

double log2_states_per_evaluation(const IdentificationCode& code, const Dmc& ch) {
    double per_block = static_cast<double>(code.blocklength()) *
                       std::log2(static_cast<double>(std::max<std::size_t>(1, ch.max_support())));
    return std::log2(static_cast<double>(code.randomness_count())) + per_block;
}

void check_eval_guard(const IdentificationCode& code, const Dmc& ch) {
    if (log2_states_per_evaluation(code, ch) > kLog2StatesPerEval) {
        std::ostringstream msg;
        msg << "exact identification-error enumeration exceeds the 2^26-state guard"
            << " (|R|=" << code.randomness_count() << ", n=" << code.blocklength()
            << ", outputs per symbol up to " << ch.max_support()
            << "); use id_errors_mc instead";
        throw FeasibilityError(msg.str());
    }
}

void check_total_work(const IdentificationCode& code, const Dmc& ch, double evaluations) {
    double log2_work = std::log2(std::max(1.0, evaluations)) + log2_states_per_evaluation(code, ch);
    if (log2_work > kLog2TotalWork) {
        std::ostringstream msg;
        msg << "exact identification-error scan over " << evaluations
            << " identities/pairs exceeds the enumeration work cap; use id_errors_mc or an"
            << " explicit pair list";
        throw FeasibilityError(msg.str());
    }
}

bool is_identity_channel(const Dmc& ch) {
    if (!ch.noiseless() || ch.input_count() > ch.output_count()) return false;
    for (Symbol x = 0; x < ch.input_count(); ++x) {
        auto sup = ch.support(x);
        if (sup.size() != 1 || sup[0] != x) return false;
    }
    return true;
}

double rejection_mass(const IdentificationCode& code, const Dmc& ch, std::uint64_t tester,
                      std::span<const Symbol> x) {
    CompensatedSum sum;
    for_each_output(ch, x, [&](std::span<const Symbol> y, double p) {
        if (!code.accepts(tester, y)) sum.add(p);
    });
    return sum.value();
}

double acceptance_mass(const IdentificationCode& code, const Dmc& ch, std::uint64_t tester,
                       std::span<const Symbol> x) {
    CompensatedSum sum;
    for_each_output(ch, x, [&](std::span<const Symbol> y, double p) {
        if (code.accepts(tester, y)) sum.add(p);
    });
    return sum.value();
}

void check_identity_index(const IdentificationCode& code, std::uint64_t identity) {
    if (identity >= code.identity_count())
        throw ConfigError("identity index " + std::to_string(identity) +
                          " outside identity space of size " +
                          std::to_string(code.identity_count()));
}

}  // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint64_t d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

RepetitionCode::RepetitionCode(std::size_t bits, std::size_t repetitions)
    : TransmissionCode(bits * repetitions, std::uint64_t{1} << bits),
      bits_(bits),
      reps_(repetitions) {
    if (bits == 0 || bits > 62)
        throw ConfigError("repetition code: bit count must be in [1, 62]");
    if (repetitions == 0 || repetitions % 2 == 0)
        throw ConfigError("repetition code: repetition factor must be odd, got " +
                          std::to_string(repetitions));
}

std::vector<Symbol> RepetitionCode::codeword(std::uint64_t message) const {
    std::vector<Symbol> out;
    codeword_into(message, out);
    return out;
}

void RepetitionCode::codeword_into(std::uint64_t message, std::vector<Symbol>& out) const {
    if (message >= message_count())
        throw ConfigError("repetition code: message index out of range");
    out.resize(blocklength());
    std::size_t pos = 0;
    for (std::size_t b = 0; b < bits_; ++b) {
        Symbol bit = static_cast<Symbol>((message >> (bits_ - 1 - b)) & 1u);
        for (std::size_t r = 0; r < reps_; ++r) out[pos++] = bit;
    }
}

std::optional<std::uint64_t> RepetitionCode::decode(std::span<const Symbol> y) const {
    if (y.size() != blocklength())
        throw ConfigError("repetition code: output block has wrong length");
    std::uint64_t message = 0;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < bits_; ++b) {
        std::size_t ones = 0;
        for (std::size_t r = 0; r < reps_; ++r) {
            Symbol s = y[pos++];
            if (s > 1) throw ConfigError("repetition code: non-binary output symbol");
            ones += s;
        }
        message = (message << 1) | (ones * 2 > reps_ ? 1u : 0u);
    }
    return message;
}

std::shared_ptr<const TransmissionCode> make_repetition_code(std::size_t bits,
                                                             std::size_t repetitions) {
    return std::make_shared<RepetitionCode>(bits, repetitions);
}

double transmission_error(const TransmissionCode& code, const Dmc& ch, std::uint64_t message) {
    if (message >= code.message_count())
        throw ConfigError("transmission_error: message index out of range");
    double log2_states = static_cast<double>(code.blocklength()) *
                         std::log2(static_cast<double>(std::max<std::size_t>(1, ch.max_support())));
    if (log2_states > 24.0)
        throw FeasibilityError(
            "transmission_error: blocklength exceeds the exact enumeration guard "
            "(n*log2|Y| <= 24); estimate the error by Monte Carlo sampling instead");
    auto x = code.codeword(message);
    CompensatedSum wrong;
    for_each_output(ch, x, [&](std::span<const Symbol> y, double p) {
        auto decoded = code.decode(y);
        if (!decoded || *decoded != message) wrong.add(p);
    });
    return wrong.value();
}

TagCode::Prepared TagCode::prepare(const TagCodeParams& params,
                                   std::shared_ptr<const TransmissionCode> inner) {
    const std::uint64_t q = params.field_size;
    if (!is_prime(q))
        throw ConfigError("tag code: field size must be prime, got " + std::to_string(q));
    if (q > 65536) throw ConfigError("tag code: field size above 2^16 is not supported");
    if (params.degree_bound < 1 || params.degree_bound > q)
        throw ConfigError("tag code: degree bound must satisfy 1 <= k <= q");

    Prepared prepared;
    prepared.identities = 1;
    for (std::uint32_t i = 0; i < params.degree_bound; ++i) {
        if (prepared.identities > (std::uint64_t{1} << 63) / q)
            throw ConfigError("tag code: identity space q^k exceeds 2^63");
        prepared.identities *= q;
    }
    prepared.symbol_bits = static_cast<std::uint32_t>(std::bit_width(q - 1));
    if (inner) {
        if (inner->message_count() != (std::uint64_t{1} << (2 * prepared.symbol_bits)))
            throw ConfigError("tag code: inner code must carry 2*ceil(log2 q) bits");
        prepared.inner = std::move(inner);
    } else {
        prepared.inner = make_repetition_code(2 * prepared.symbol_bits, params.inner_repetitions);
    }
    return prepared;
}

TagCode::TagCode(const TagCodeParams& params, std::shared_ptr<const TransmissionCode> inner)
    : TagCode(params, prepare(params, std::move(inner))) {}

TagCode::TagCode(const TagCodeParams& params, Prepared prepared)
    : IdentificationCode(prepared.inner->blocklength(), prepared.identities, params.field_size),
      params_(params),
      symbol_bits_(prepared.symbol_bits),
      inner_(std::move(prepared.inner)) {}

std::uint32_t TagCode::tag_of(std::uint64_t identity, std::uint32_t point) const {
    const std::uint64_t q = params_.field_size;
    std::uint64_t digits[64];
    std::uint32_t k = params_.degree_bound;
    std::uint64_t rest = identity;
    for (std::uint32_t m = 0; m < k; ++m) {
        digits[m] = rest % q;
        rest /= q;
    }
    std::uint64_t acc = 0;
    for (std::uint32_t m = k; m-- > 0;) acc = (acc * point + digits[m]) % q;
    return static_cast<std::uint32_t>(acc);
}

std::vector<Symbol> TagCode::encode(std::uint64_t identity, std::uint64_t r) const {
    std::vector<Symbol> out;
    encode_into(identity, r, out);
    return out;
}

void TagCode::encode_into(std::uint64_t identity, std::uint64_t r,
                          std::vector<Symbol>& out) const {
    check_identity_index(*this, identity);
    if (r >= params_.field_size)
        throw ConfigError("tag code: randomness value outside {0..q-1}");
    std::uint64_t tag = tag_of(identity, static_cast<std::uint32_t>(r));
    std::uint64_t message = (r << symbol_bits_) | tag;
    inner_->codeword_into(message, out);
}

std::optional<std::pair<std::uint32_t, std::uint32_t>> TagCode::decode_pair(
    std::span<const Symbol> y) const {
    auto message = inner_->decode(y);
    if (!message) return std::nullopt;
    std::uint32_t point = static_cast<std::uint32_t>(*message >> symbol_bits_);
    std::uint32_t tag =
        static_cast<std::uint32_t>(*message & ((std::uint64_t{1} << symbol_bits_) - 1));
    if (point >= params_.field_size || tag >= params_.field_size) return std::nullopt;
    return std::make_pair(point, tag);
}

bool TagCode::accepts(std::uint64_t identity, std::span<const Symbol> y) const {
    check_identity_index(*this, identity);
    auto pair = decode_pair(y);
    return pair && tag_of(identity, pair->first) == pair->second;
}

std::shared_ptr<const TagCode> make_tag_code(const TagCodeParams& params) {
    return std::make_shared<TagCode>(params);
}

namespace {

class FixedRandomnessCode final : public IdentificationCode {
  public:
    FixedRandomnessCode(std::shared_ptr<const IdentificationCode> base, std::uint64_t fixed_r)
        : IdentificationCode(base->blocklength(), base->identity_count(), 1),
          base_(std::move(base)),
          fixed_r_(fixed_r) {
        if (fixed_r_ >= base_->randomness_count())
            throw ConfigError("deterministic_variant: fixed randomness value outside the space");
    }

    std::vector<Symbol> encode(std::uint64_t identity, std::uint64_t) const override {
        return base_->encode(identity, fixed_r_);
    }
    void encode_into(std::uint64_t identity, std::uint64_t,
                     std::vector<Symbol>& out) const override {
        base_->encode_into(identity, fixed_r_, out);
    }
    bool accepts(std::uint64_t identity, std::span<const Symbol> y) const override {
        return base_->accepts(identity, y);
    }

  private:
    std::shared_ptr<const IdentificationCode> base_;
    std::uint64_t fixed_r_;
};

}  // namespace

std::shared_ptr<const IdentificationCode> deterministic_variant(
    std::shared_ptr<const IdentificationCode> code, std::uint64_t fixed_r) {
    return std::make_shared<FixedRandomnessCode>(std::move(code), fixed_r);
}

double second_kind_bound(const TagCodeParams& params) {
    if (!is_prime(params.field_size)) throw ConfigError("tag code: field size must be prime");
    if (params.degree_bound < 1 || params.degree_bound > params.field_size)
        throw ConfigError("tag code: degree bound must satisfy 1 <= k <= q");
    return static_cast<double>(params.degree_bound - 1) / static_cast<double>(params.field_size);
}

double first_kind_exact_given_r(const IdentificationCode& code, const Dmc& ch,
                                std::uint64_t identity, std::uint64_t r) {
    check_identity_index(code, identity);
    auto x = code.encode(identity, r);
    return rejection_mass(code, ch, identity, x);
}

double first_kind_exact(const IdentificationCode& code, const Dmc& ch, std::uint64_t identity) {
    check_eval_guard(code, ch);
    check_identity_index(code, identity);
    const std::uint64_t R = code.randomness_count();
    CompensatedSum sum;
    std::vector<Symbol> x;
    for (std::uint64_t r = 0; r < R; ++r) {
        code.encode_into(identity, r, x);
        sum.add(rejection_mass(code, ch, identity, x));
    }
    return sum.value() / static_cast<double>(R);
}

double second_kind_exact_given_r(const IdentificationCode& code, const Dmc& ch,
                                 std::uint64_t tester, std::uint64_t sender, std::uint64_t r) {
    check_identity_index(code, tester);
    check_identity_index(code, sender);
    auto x = code.encode(sender, r);
    return acceptance_mass(code, ch, tester, x);
}

double second_kind_exact(const IdentificationCode& code, const Dmc& ch, std::uint64_t tester,
                         std::uint64_t sender) {
    check_eval_guard(code, ch);
    check_identity_index(code, tester);
    check_identity_index(code, sender);
    if (tester == sender)
        throw ConfigError("second_kind_exact: tester and sender identities must differ");
    const std::uint64_t R = code.randomness_count();
    CompensatedSum sum;
    std::vector<Symbol> x;
    for (std::uint64_t r = 0; r < R; ++r) {
        code.encode_into(sender, r, x);
        sum.add(acceptance_mass(code, ch, tester, x));
    }
    return sum.value() / static_cast<double>(R);
}

namespace {

// All-pairs scan for the polynomial tag code on a channel that reproduces its
// input exactly. Acceptance then reduces to tag agreement, and the worst/mean
// pair errors depend only on the coefficient-wise difference polynomial: it is
// nonzero for every ordered pair, every nonzero polynomial is realized by
// exactly N ordered pairs, and lambda2(i, j) = |roots(T_i - T_j)| / q. The scan
// therefore enumerates nonzero polynomials instead of pairs; the result is the
// same exact all-pairs value.
ErrorReport tag_all_pairs_identity_channel(const TagCode& code, const Dmc& ch) {
    const std::uint64_t N = code.identity_count();
    const std::uint32_t q = code.params().field_size;
    ErrorReport report;
    report.method = "exact";
    report.pair_coverage = PairCoverage::all_pairs;
    report.identities_evaluated = N;
    report.pairs_evaluated = N * (N - 1);

    // Errors of the first kind: direct per-(identity, r) check on the clean block.
    double worst1 = 0.0;
    CompensatedSum sum1;
    std::vector<Symbol> x;
    for (std::uint64_t i = 0; i < N; ++i) {
        std::size_t rejected = 0;
        for (std::uint32_t r = 0; r < q; ++r) {
            code.encode_into(i, r, x);
            if (!code.accepts(i, x)) ++rejected;
        }
        double l1 = static_cast<double>(rejected) / static_cast<double>(q);
        worst1 = std::max(worst1, l1);
        sum1.add(l1);
    }
    report.lambda1 = worst1;
    report.lambda1_mean = sum1.value() / static_cast<double>(N);

    if (N < 2) return report;
    std::uint64_t worst_roots = 0;
    std::uint64_t total_roots = 0;
    for (std::uint64_t diff = 1; diff < N; ++diff) {
        std::uint64_t roots = 0;
        for (std::uint32_t r = 0; r < q; ++r)
            if (code.tag_of(diff, r) == 0) ++roots;
        worst_roots = std::max(worst_roots, roots);
        total_roots += roots;
    }
    report.lambda2 = static_cast<double>(worst_roots) / static_cast<double>(q);
    report.lambda2_mean = static_cast<double>(total_roots) /
                          (static_cast<double>(N - 1) * static_cast<double>(q));
    return report;
}

}  // namespace

ErrorReport id_errors_exact(const IdentificationCode& code, const Dmc& ch,
                            const PairSpec& pair_spec) {
    check_eval_guard(code, ch);
    const std::uint64_t N = code.identity_count();

    if (pair_spec.all_pairs) {
        const auto* tag = dynamic_cast<const TagCode*>(&code);
        if (tag && is_identity_channel(ch) &&
            dynamic_cast<const RepetitionCode*>(&tag->inner()) != nullptr) {
            double per_poly_work = static_cast<double>(N) * tag->params().field_size;
            if (per_poly_work > std::exp2(kLog2TotalWork))
                throw FeasibilityError(
                    "exact all-pairs scan: identity space too large for enumeration; use "
                    "id_errors_mc or an explicit pair list");
            return tag_all_pairs_identity_channel(*tag, ch);
        }
        double evaluations =
            static_cast<double>(N) * std::max<double>(1.0, static_cast<double>(N) - 1.0) +
            static_cast<double>(N);
        check_total_work(code, ch, evaluations);

        ErrorReport report;
        report.method = "exact";
        report.pair_coverage = PairCoverage::all_pairs;
        report.identities_evaluated = N;
        report.pairs_evaluated = N >= 2 ? N * (N - 1) : 0;
        CompensatedSum sum1, sum2;
        std::vector<Symbol> x;
        for (std::uint64_t i = 0; i < N; ++i) {
            CompensatedSum rej;
            for (std::uint64_t r = 0; r < code.randomness_count(); ++r) {
                code.encode_into(i, r, x);
                rej.add(rejection_mass(code, ch, i, x));
            }
            double l1 = rej.value() / static_cast<double>(code.randomness_count());
            report.lambda1 = std::max(report.lambda1, l1);
            sum1.add(l1);
        }
        report.lambda1_mean = sum1.value() / static_cast<double>(N);
        for (std::uint64_t j = 0; j < N && N >= 2; ++j) {
            // Transmissions of j, evaluated against every other tester.
            for (std::uint64_t i = 0; i < N; ++i) {
                if (i == j) continue;
                double l2 = second_kind_exact(code, ch, i, j);
                report.lambda2 = std::max(report.lambda2, l2);
                sum2.add(l2);
            }
        }
        if (N >= 2)
            report.lambda2_mean = sum2.value() / static_cast<double>(N * (N - 1));
        return report;
    }

    if (pair_spec.pairs.empty())
        throw ConfigError("id_errors_exact: explicit pair list must be nonempty");
    std::vector<std::uint64_t> identities;
    for (const auto& p : pair_spec.pairs) {
        check_identity_index(code, p.tester);
        check_identity_index(code, p.sender);
        if (p.tester == p.sender)
            throw ConfigError("id_errors_exact: pair identities must differ");
        identities.push_back(p.tester);
        identities.push_back(p.sender);
    }
    std::sort(identities.begin(), identities.end());
    identities.erase(std::unique(identities.begin(), identities.end()), identities.end());
    check_total_work(code, ch,
                     static_cast<double>(pair_spec.pairs.size() + identities.size()));

    ErrorReport report;
    report.method = "exact";
    report.pair_coverage = PairCoverage::sampled_pairs;
    report.identities_evaluated = identities.size();
    report.pairs_evaluated = pair_spec.pairs.size();
    CompensatedSum sum1, sum2;
    for (std::uint64_t i : identities) {
        double l1 = first_kind_exact(code, ch, i);
        report.lambda1 = std::max(report.lambda1, l1);
        sum1.add(l1);
    }
    report.lambda1_mean = sum1.value() / static_cast<double>(identities.size());
    for (const auto& p : pair_spec.pairs) {
        double l2 = second_kind_exact(code, ch, p.tester, p.sender);
        report.lambda2 = std::max(report.lambda2, l2);
        sum2.add(l2);
    }
    report.lambda2_mean = sum2.value() / static_cast<double>(pair_spec.pairs.size());
    return report;
}

ErrorReport id_errors_mc(const IdentificationCode& code, const Dmc& ch, std::uint64_t trials,
                         std::uint64_t pair_sample, std::uint64_t seed, std::size_t workers) {
    if (trials < 1) throw ConfigError("id_errors_mc: trials must be >= 1");
    if (pair_sample > (std::uint64_t{1} << 20))
        throw ConfigError("id_errors_mc: pair_sample above 2^20 is not supported");
    const std::uint64_t N = code.identity_count();

    std::vector<IdentityPair> pairs;
    bool all_pairs = false;
    if (N >= 2 && pair_sample > 0) {
        if (N <= 1024 && N * (N - 1) <= pair_sample) {
            all_pairs = true;
            for (std::uint64_t j = 0; j < N; ++j)
                for (std::uint64_t i = 0; i < N; ++i)
                    if (i != j) pairs.push_back({i, j});
        } else {
            Rng rng(derive_seed({seed, 0x70617273ULL}));
            std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
            std::uint64_t attempts = 0;
            const std::uint64_t max_attempts = 64 * pair_sample + 1024;
            while (pairs.size() < pair_sample && attempts++ < max_attempts) {
                std::uint64_t i = rng.below(N);
                std::uint64_t j = rng.below(N);
                if (i == j) continue;
                if (seen.insert({i, j}).second) pairs.push_back({i, j});
            }
        }
    }

    std::vector<std::uint64_t> identities;
    if (all_pairs || (N <= 1024 && pairs.empty())) {
        for (std::uint64_t i = 0; i < N; ++i) identities.push_back(i);
    } else {
        for (const auto& p : pairs) {
            identities.push_back(p.tester);
            identities.push_back(p.sender);
        }
        std::sort(identities.begin(), identities.end());
        identities.erase(std::unique(identities.begin(), identities.end()), identities.end());
        if (identities.empty()) identities.push_back(0);
    }

    std::vector<double> lambda1_vals(identities.size(), 0.0);
    std::vector<double> lambda2_vals(pairs.size(), 0.0);

    const std::size_t cells = identities.size() + pairs.size();
    parallel_for(cells, workers, [&](std::size_t cell) {
        std::vector<Symbol> x, y;
        if (cell < identities.size()) {
            std::uint64_t i = identities[cell];
            Rng rng(derive_seed({seed, 0x6C31ULL, i}));
            std::uint64_t rejected = 0;
            for (std::uint64_t t = 0; t < trials; ++t) {
                std::uint64_t r = rng.below(code.randomness_count());
                code.encode_into(i, r, x);
                sample_output_into(ch, x, rng, y);
                if (!code.accepts(i, y)) ++rejected;
            }
            lambda1_vals[cell] = static_cast<double>(rejected) / static_cast<double>(trials);
        } else {
            const auto& p = pairs[cell - identities.size()];
            Rng rng(derive_seed({seed, 0x6C32ULL, p.tester, p.sender}));
            std::uint64_t accepted = 0;
            for (std::uint64_t t = 0; t < trials; ++t) {
                std::uint64_t r = rng.below(code.randomness_count());
                code.encode_into(p.sender, r, x);
                sample_output_into(ch, x, rng, y);
                if (code.accepts(p.tester, y)) ++accepted;
            }
            lambda2_vals[cell - identities.size()] =
                static_cast<double>(accepted) / static_cast<double>(trials);
        }
    });

    ErrorReport report;
    report.method = "monte_carlo";
    report.pair_coverage = all_pairs ? PairCoverage::all_pairs : PairCoverage::sampled_pairs;
    report.identities_evaluated = identities.size();
    report.pairs_evaluated = pairs.size();
    report.trials = trials;
    report.seed = seed;
    double sum1 = 0.0;
    for (double v : lambda1_vals) {
        report.lambda1 = std::max(report.lambda1, v);
        sum1 += v;
    }
    report.lambda1_mean = identities.empty() ? 0.0 : sum1 / static_cast<double>(identities.size());
    double sum2 = 0.0;
    for (double v : lambda2_vals) {
        report.lambda2 = std::max(report.lambda2, v);
        sum2 += v;
    }
    report.lambda2_mean = pairs.empty() ? 0.0 : sum2 / static_cast<double>(pairs.size());
    report.lambda1_stderr =
        std::sqrt(report.lambda1 * (1.0 - report.lambda1) / static_cast<double>(trials));
    report.lambda2_stderr =
        std::sqrt(report.lambda2 * (1.0 - report.lambda2) / static_cast<double>(trials));
    return report;
}

}  // namespace idsim
