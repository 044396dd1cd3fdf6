#pragma once

#include "mcdcert/bounds.hpp"
#include "mcdcert/response.hpp"

#include <cstdint>
#include <string_view>

namespace mcdcert {

/// Samples are drawn in fixed-size blocks, block b seeded with
/// derive_seed(seed, b), so results do not depend on the worker count.
inline constexpr std::size_t kSampleBlock = 4096;

struct MeanEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    /// Successful evaluations; failed draws are counted separately.
    std::size_t samples = 0;
    std::size_t failures = 0;
};

/// Sample mean and standard error of F under the declared input
/// distributions. Evaluation failures are skipped; more than 1% of them is
/// an EvaluationError.
MeanEstimate estimate_mean(const ResponseFunction& f, std::size_t samples, std::uint64_t seed,
                           std::size_t workers = 0);

enum class Verdict { Consistent, Violated };

std::string_view to_string(Verdict v);

struct ValidationResult {
    std::size_t samples = 0;
    double mean_hat = 0.0;
    double se_mean = 0.0;
    double mean_used = 0.0;
    double bound_tested = 0.0;
    Direction direction = Direction::Plus;
    std::size_t exceed_count = 0;
    double exceed_frac = 0.0;
    double epsilon = 0.0;
    /// Probability the count is compared against: epsilon per side, 2 epsilon two-sided.
    double pof_tested = 0.0;
    double binomial_slack = 0.0;
    Verdict verdict = Verdict::Consistent;
    std::size_t failures = 0;
};

/// Counts deviations beyond `bound` from `mean` in `direction` over
/// `samples` draws and checks the exceedance fraction against epsilon plus
/// a 3-sigma binomial slack. samples >= 100.
ValidationResult validate_bound(const ResponseFunction& f, double mean, double bound, double epsilon,
                                std::size_t samples, std::uint64_t seed, Direction direction = Direction::Plus,
                                std::size_t workers = 0);

/// Same, with separate bounds above and below the mean (absolute bounds).
ValidationResult validate_bounds(const ResponseFunction& f, double mean, double bound_plus, double bound_minus,
                                 double epsilon, std::size_t samples, std::uint64_t seed, Direction direction,
                                 std::size_t workers = 0);

}  // namespace mcdcert
