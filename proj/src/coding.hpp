#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "channel.hpp"

namespace idsim {

bool is_prime(std::uint64_t n);

// Transmission code: M codewords with a total decoder Y^n -> message or
// erasure. Decoding sets are the decoder preimages, disjoint by construction.
class TransmissionCode {
  public:
    virtual ~TransmissionCode() = default;

    std::size_t blocklength() const { return blocklength_; }
    std::uint64_t message_count() const { return message_count_; }

    virtual std::vector<Symbol> codeword(std::uint64_t message) const = 0;
    virtual std::optional<std::uint64_t> decode(std::span<const Symbol> y) const = 0;

    // Allocation-free variant for hot loops.
    virtual void codeword_into(std::uint64_t message, std::vector<Symbol>& out) const {
        out = codeword(message);
    }

  protected:
    TransmissionCode(std::size_t blocklength, std::uint64_t message_count)
        : blocklength_(blocklength), message_count_(message_count) {}

  private:
    std::size_t blocklength_ = 0;
    std::uint64_t message_count_ = 0;
};

// Each message bit repeated `repetitions` times (odd), decoded by per-bit
// majority vote over {0,1}. The decoder is total: it never erases.
class RepetitionCode final : public TransmissionCode {
  public:
    RepetitionCode(std::size_t bits, std::size_t repetitions);

    std::size_t bit_count() const { return bits_; }
    std::size_t repetitions() const { return reps_; }

    std::vector<Symbol> codeword(std::uint64_t message) const override;
    std::optional<std::uint64_t> decode(std::span<const Symbol> y) const override;
    void codeword_into(std::uint64_t message, std::vector<Symbol>& out) const override;

  private:
    std::size_t bits_;
    std::size_t reps_;
};

std::shared_ptr<const TransmissionCode> make_repetition_code(std::size_t bits,
                                                             std::size_t repetitions);

// Exact P(decode != message | codeword sent), enumerated over all output
// blocks. Guarded by n*log2|Y| <= 24.
double transmission_error(const TransmissionCode& code, const Dmc& ch, std::uint64_t message);

struct TagCodeParams {
    std::uint32_t field_size = 0;        // prime q
    std::uint32_t degree_bound = 0;      // k, 1 <= k <= q; identities are degree-<k polynomials
    std::size_t inner_repetitions = 1;   // odd repetition factor of the default inner code
};

// Randomized identification code: identity-indexed encoding distributions
// (realized as a uniform draw over a randomness space) plus per-identity
// acceptance predicates on output blocks. Acceptance regions may overlap.
class IdentificationCode {
  public:
    virtual ~IdentificationCode() = default;

    std::size_t blocklength() const { return blocklength_; }
    std::uint64_t identity_count() const { return identity_count_; }
    std::uint64_t randomness_count() const { return randomness_count_; }

    virtual std::vector<Symbol> encode(std::uint64_t identity, std::uint64_t r) const = 0;
    virtual bool accepts(std::uint64_t identity, std::span<const Symbol> y) const = 0;

    virtual void encode_into(std::uint64_t identity, std::uint64_t r,
                             std::vector<Symbol>& out) const {
        out = encode(identity, r);
    }

  protected:
    IdentificationCode(std::size_t blocklength, std::uint64_t identities, std::uint64_t randomness)
        : blocklength_(blocklength), identity_count_(identities), randomness_count_(randomness) {}

  private:
    std::size_t blocklength_ = 0;
    std::uint64_t identity_count_ = 0;
    std::uint64_t randomness_count_ = 0;
};

// Polynomial tag code over Z_q: identity i is the degree-<k polynomial T_i
// whose coefficients are the base-q digits of i. A transmission carries the
// evaluation pair (r, T_i(r)) as two fixed-width big-endian symbols through
// the inner transmission code; a tester for identity i accepts output y iff
// the decoded pair (r', t') is in range and t' = T_i(r').
class TagCode final : public IdentificationCode {
  public:
    explicit TagCode(const TagCodeParams& params,
                     std::shared_ptr<const TransmissionCode> inner = nullptr);

    const TagCodeParams& params() const { return params_; }
    const TransmissionCode& inner() const { return *inner_; }
    std::uint32_t symbol_bits() const { return symbol_bits_; }
    std::size_t payload_bits() const { return 2 * static_cast<std::size_t>(symbol_bits_); }

    // T_identity(point) in Z_q.
    std::uint32_t tag_of(std::uint64_t identity, std::uint32_t point) const;

    // Decoded (r', t') pair, or nothing when the inner decoder erases or a
    // decoded value falls outside the field. Out-of-range values are treated
    // as rejections rather than reduced mod q, so corrupted blocks count
    // toward errors of the first kind instead of inflating collisions.
    std::optional<std::pair<std::uint32_t, std::uint32_t>> decode_pair(
        std::span<const Symbol> y) const;

    std::vector<Symbol> encode(std::uint64_t identity, std::uint64_t r) const override;
    bool accepts(std::uint64_t identity, std::span<const Symbol> y) const override;
    void encode_into(std::uint64_t identity, std::uint64_t r,
                     std::vector<Symbol>& out) const override;

  private:
    struct Prepared {
        std::uint32_t symbol_bits;
        std::uint64_t identities;
        std::shared_ptr<const TransmissionCode> inner;
    };
    static Prepared prepare(const TagCodeParams& params,
                            std::shared_ptr<const TransmissionCode> inner);
    TagCode(const TagCodeParams& params, Prepared prepared);

    TagCodeParams params_;
    std::uint32_t symbol_bits_;
    std::shared_ptr<const TransmissionCode> inner_;
};

std::shared_ptr<const TagCode> make_tag_code(const TagCodeParams& params);

// Same tester, degenerate encoder that always transmits with `fixed_r`.
std::shared_ptr<const IdentificationCode> deterministic_variant(
    std::shared_ptr<const IdentificationCode> code, std::uint64_t fixed_r);

// Noiseless-channel collision bound of the tag code: two distinct degree-<k
// polynomials agree on at most k-1 points, so lambda2 <= (k-1)/q.
double second_kind_bound(const TagCodeParams& params);

enum class PairCoverage { all_pairs, sampled_pairs };

struct IdentityPair {
    std::uint64_t tester = 0;  // i in "tester_i accepts a transmission of j"
    std::uint64_t sender = 0;  // j != i
};

struct PairSpec {
    static PairSpec all() { return PairSpec{true, {}}; }
    static PairSpec explicit_pairs(std::vector<IdentityPair> pairs) {
        return PairSpec{false, std::move(pairs)};
    }
    bool all_pairs = true;
    std::vector<IdentityPair> pairs;
};

struct ErrorReport {
    double lambda1 = 0.0;       // worst case over evaluated identities
    double lambda2 = 0.0;       // worst case over evaluated ordered pairs
    double lambda1_mean = 0.0;
    double lambda2_mean = 0.0;
    std::string method;         // "exact" or "monte_carlo"
    PairCoverage pair_coverage = PairCoverage::all_pairs;
    std::uint64_t identities_evaluated = 0;
    std::uint64_t pairs_evaluated = 0;
    std::uint64_t trials = 0;          // per evaluated cell (Monte Carlo only)
    double lambda1_stderr = 0.0;       // binomial SE of the worst cell (Monte Carlo only)
    double lambda2_stderr = 0.0;
    std::uint64_t seed = 0;
};

// Exact identity-level error quantities, enumerated over the randomness space
// and the output support. Guard: |R| * (max row support)^n <= 2^26.
double first_kind_exact(const IdentificationCode& code, const Dmc& ch, std::uint64_t identity);
double first_kind_exact_given_r(const IdentificationCode& code, const Dmc& ch,
                                std::uint64_t identity, std::uint64_t r);
double second_kind_exact(const IdentificationCode& code, const Dmc& ch, std::uint64_t tester,
                         std::uint64_t sender);
double second_kind_exact_given_r(const IdentificationCode& code, const Dmc& ch,
                                 std::uint64_t tester, std::uint64_t sender, std::uint64_t r);

// Exact worst-case/mean errors over all identity pairs or an explicit list.
// Throws FeasibilityError (naming id_errors_mc) when the enumeration guards
// are exceeded.
ErrorReport id_errors_exact(const IdentificationCode& code, const Dmc& ch, const PairSpec& pairs);

// Seeded Monte Carlo estimates of the same quantities. Evaluates all ordered
// pairs when there are at most `pair_sample` of them, otherwise a seeded
// sample of `pair_sample` distinct pairs.
ErrorReport id_errors_mc(const IdentificationCode& code, const Dmc& ch, std::uint64_t trials,
                         std::uint64_t pair_sample, std::uint64_t seed, std::size_t workers = 0);

}  // namespace idsim
