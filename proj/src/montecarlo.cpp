#include "mcdcert/montecarlo.hpp"

#include "mcdcert/error.hpp"
#include "mcdcert/parallel.hpp"

#include <cmath>
#include <optional>

namespace mcdcert {

std::string_view to_string(Verdict v) { return v == Verdict::Consistent ? "consistent" : "violated"; }

namespace {

// Values of F on every sample, in sample order; nullopt for failed evaluations.
std::vector<std::optional<double>> sample_values(const ResponseFunction& f, std::size_t samples, std::uint64_t seed,
                                                 std::size_t workers) {
    std::vector<std::optional<double>> values(samples);
    const std::size_t blocks = (samples + kSampleBlock - 1) / kSampleBlock;
    parallel_for(blocks, workers, [&](std::size_t b) {
        const std::size_t first = b * kSampleBlock;
        const std::size_t count = std::min(kSampleBlock, samples - first);
        const auto points = sample(f.domain(), count, derive_seed(seed, b));
        for (std::size_t k = 0; k < count; ++k) {
            try {
                values[first + k] = f.eval_at(points[k]);
            } catch (const EvaluationError&) {
                values[first + k].reset();
            }
        }
    });
    return values;
}

std::size_t count_failures(const std::vector<std::optional<double>>& values) {
    std::size_t failed = 0;
    for (const auto& v : values) failed += v ? 0 : 1;
    if (failed * 100 > values.size()) {
        throw EvaluationError(std::to_string(failed) + " of " + std::to_string(values.size()) +
                              " sample evaluations failed (more than 1%)");
    }
    return failed;
}

MeanEstimate summarize_values(const std::vector<std::optional<double>>& values, std::size_t failures) {
    MeanEstimate m;
    m.samples = values.size() - failures;
    m.failures = failures;
    const std::size_t ok = values.size() - failures;
    if (ok == 0) throw EvaluationError("no sample could be evaluated");
    double sum = 0.0;
    for (const auto& v : values) {
        if (v) sum += *v;
    }
    m.mean = sum / static_cast<double>(ok);
    if (ok > 1) {
        double ss = 0.0;
        for (const auto& v : values) {
            if (v) ss += (*v - m.mean) * (*v - m.mean);
        }
        m.standard_error = std::sqrt(ss / static_cast<double>(ok - 1) / static_cast<double>(ok));
    }
    return m;
}

}  // namespace

MeanEstimate estimate_mean(const ResponseFunction& f, std::size_t samples, std::uint64_t seed, std::size_t workers) {
    if (samples < 2) throw InvalidArgument("mean estimation needs at least 2 samples");
    const auto values = sample_values(f, samples, seed, workers);
    return summarize_values(values, count_failures(values));
}

ValidationResult validate_bounds(const ResponseFunction& f, double mean, double bound_plus, double bound_minus,
                                 double epsilon, std::size_t samples, std::uint64_t seed, Direction direction,
                                 std::size_t workers) {
    if (samples < 100) throw InvalidArgument("validation needs at least 100 samples");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
    if (!(bound_plus >= 0.0) || !(bound_minus >= 0.0)) throw InvalidArgument("bounds must be nonnegative");

    const auto values = sample_values(f, samples, seed, workers);
    const std::size_t failures = count_failures(values);
    const MeanEstimate m = summarize_values(values, failures);

    ValidationResult r;
    r.samples = samples - failures;
    r.failures = failures;
    r.mean_hat = m.mean;
    r.se_mean = m.standard_error;
    r.mean_used = mean;
    r.bound_tested = direction == Direction::Minus ? bound_minus : bound_plus;
    r.direction = direction;
    r.epsilon = epsilon;
    for (const auto& v : values) {
        if (!v) continue;
        const double dev = *v - mean;
        const bool above = dev > bound_plus;
        const bool below = -dev > bound_minus;
        switch (direction) {
        case Direction::Plus: r.exceed_count += above ? 1 : 0; break;
        case Direction::Minus: r.exceed_count += below ? 1 : 0; break;
        case Direction::TwoSided: r.exceed_count += (above || below) ? 1 : 0; break;
        }
    }
    r.exceed_frac = static_cast<double>(r.exceed_count) / static_cast<double>(r.samples);
    r.pof_tested = direction == Direction::TwoSided ? std::min(1.0, 2.0 * epsilon) : epsilon;
    r.binomial_slack = 3.0 * std::sqrt(r.pof_tested * (1.0 - r.pof_tested) / static_cast<double>(r.samples));
    r.verdict = r.exceed_frac > r.pof_tested + r.binomial_slack ? Verdict::Violated : Verdict::Consistent;
    return r;
}

ValidationResult validate_bound(const ResponseFunction& f, double mean, double bound, double epsilon,
                                std::size_t samples, std::uint64_t seed, Direction direction, std::size_t workers) {
    return validate_bounds(f, mean, bound, bound, epsilon, samples, seed, direction, workers);
}

}  // namespace mcdcert
