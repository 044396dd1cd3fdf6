#include "mcdcert/certify.hpp"

#include "mcdcert/error.hpp"

#include <cmath>
#include <cstdio>

namespace mcdcert {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

CertificationReport certify(const BoundsSummary& summary, double margin, Direction direction, std::string problem) {
    if (!(margin >= 0.0) || !std::isfinite(margin)) throw InvalidArgument("margin must be finite and nonnegative");
    CertificationReport rep;
    rep.problem = std::move(problem);
    rep.direction = direction;
    rep.margin = margin;
    rep.epsilon = summary.epsilon;
    rep.summary = summary;
    rep.design_point = 0.5 * (summary.f_max_value + summary.f_min);
    rep.uncertainty = 0.5 * summary.delta_f;
    if (rep.uncertainty > 0.0) rep.confidence_ratio = margin / rep.uncertainty;

    rep.required_absolute = summary.absolute_for(direction);
    rep.required_mcdiarmid = summary.mcdiarmid;
    rep.absolute_pass = margin >= rep.required_absolute;
    rep.mcdiarmid_pass = margin >= rep.required_mcdiarmid;

    if (rep.absolute_pass && rep.mcdiarmid_pass) {
        rep.recommendation = rep.required_mcdiarmid < rep.required_absolute ? Recommendation::McDiarmid
                                                                            : Recommendation::Absolute;
    } else if (rep.absolute_pass) {
        rep.recommendation = Recommendation::Absolute;
    } else if (rep.mcdiarmid_pass) {
        rep.recommendation = Recommendation::McDiarmid;
    } else {
        rep.recommendation = Recommendation::Neither;
    }

    if (rep.absolute_pass) {
        rep.claimed_pof = 0.0;
    } else if (rep.mcdiarmid_pass) {
        rep.claimed_pof = direction == Direction::TwoSided ? 2.0 * rep.epsilon : rep.epsilon;
    }

    rep.caveats.push_back("margins pass when equal to the bound");
    if (summary.mean_source == MeanSource::Midpoint) {
        rep.caveats.push_back("mean assumed midway between F_min and F_max");
    } else if (summary.mean_source == MeanSource::Estimated) {
        rep.caveats.push_back("mean estimated by Monte Carlo sampling");
    }
    if (direction == Direction::TwoSided && rep.mcdiarmid_pass && !rep.absolute_pass) {
        rep.caveats.push_back("two-sided McDiarmid certification: per-side epsilon " + fixed(rep.epsilon, 6) +
                              ", total " + fixed(2.0 * rep.epsilon, 6));
    }
    return rep;
}

CertificationReport certify(const DiameterEstimate& estimate, std::optional<double> mean, double margin,
                            double epsilon, Direction direction, MeanSource mean_source, std::string problem) {
    if (mean && !(*mean >= estimate.f_min && *mean <= estimate.f_max)) {
        throw InvalidArgument("inconsistent estimate: mean lies outside [F_min, F_max]");
    }
    const BoundsSummary summary =
        summarize(estimate.diameters, estimate.f_min, estimate.f_max, epsilon, mean, mean_source);
    CertificationReport rep = certify(summary, margin, direction, std::move(problem));
    if (estimate.exactness == Exactness::LowerEstimate) {
        rep.caveats.insert(rep.caveats.begin(),
                           "diameters and range are lower estimates (" + estimate.method.label() +
                               "); bounds may be optimistic");
    }
    if (!estimate.reliable) {
        rep.caveats.insert(rep.caveats.begin(), "estimate unreliable: " + std::to_string(estimate.failed_probes) +
                                                    " of " + std::to_string(estimate.probes) +
                                                    " search probes failed");
    }
    return rep;
}

UsefulnessAdvice usefulness_check(double n_eff, double epsilon, std::optional<double> r) {
    UsefulnessAdvice a;
    a.n_eff = n_eff;
    a.epsilon = epsilon;
    a.threshold = required_neff(epsilon);
    a.useful = n_eff > a.threshold;
    a.message = "n_eff = " + fixed(n_eff, 4) + (a.useful ? " exceeds" : " does not exceed") +
                " the threshold 2 ln(1/epsilon) = " + fixed(a.threshold, 4) + " at epsilon = " +
                fixed(epsilon, 6) + ": the McDiarmid bound " +
                (a.useful ? "can improve on" : "cannot improve on") + " the absolute bound";
    if (r) {
        a.fraction = *r;
        a.fraction_threshold = required_neff_fraction(epsilon, *r);
        a.fraction_useful = n_eff > *a.fraction_threshold;
        a.message += "; a margin of " + fixed(*r, 4) + " x Delta F needs n_eff > " +
                     fixed(*a.fraction_threshold, 4) + (*a.fraction_useful ? " (met)" : " (not met)");
    }
    return a;
}

}  // namespace mcdcert
