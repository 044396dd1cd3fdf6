#include "mcdcert/bounds.hpp"

#include "mcdcert/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mcdcert {

std::string_view to_string(Direction d) {
    switch (d) {
    case Direction::Plus: return "plus";
    case Direction::Minus: return "minus";
    case Direction::TwoSided: return "two-sided";
    }
    return "?";
}

Direction parse_direction(std::string_view s) {
    if (s == "plus") return Direction::Plus;
    if (s == "minus") return Direction::Minus;
    if (s == "two-sided") return Direction::TwoSided;
    throw InvalidArgument("direction must be plus, minus or two-sided, got '" + std::string(s) + "'");
}

std::string_view to_string(Recommendation r) {
    switch (r) {
    case Recommendation::Absolute: return "ABSOLUTE";
    case Recommendation::McDiarmid: return "MCDIARMID";
    case Recommendation::Neither: return "NEITHER";
    }
    return "?";
}

std::string_view to_string(MeanSource m) {
    switch (m) {
    case MeanSource::Midpoint: return "midpoint";
    case MeanSource::Estimated: return "estimated";
    case MeanSource::Given: return "given";
    }
    return "?";
}

namespace {

void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw InvalidArgument("epsilon must lie in (0, 1), got " + std::to_string(epsilon));
    }
}

void check_diameters(std::span<const double> diameters) {
    for (double d : diameters) {
        if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidArgument("diameters must be finite and nonnegative");
    }
}

struct Sums {
    double linear = 0.0;
    double squares = 0.0;
    double max_square = 0.0;
};

Sums sums(std::span<const double> diameters) {
    check_diameters(diameters);
    Sums s;
    for (double d : diameters) {
        const double sq = d * d;
        s.linear += d;
        s.squares += sq;
        s.max_square = std::max(s.max_square, sq);
    }
    return s;
}

}  // namespace

double system_diameter(std::span<const double> diameters) { return std::sqrt(sums(diameters).squares); }

double effective_n(std::span<const double> diameters) {
    const Sums s = sums(diameters);
    if (s.linear == 0.0) throw UndefinedQuantity("n_eff is undefined when every diameter is zero");
    return (s.linear * s.linear) / s.squares;
}

double effective_n_cap(std::span<const double> diameters) {
    const Sums s = sums(diameters);
    if (s.linear == 0.0) throw UndefinedQuantity("n_eff is undefined when every diameter is zero");
    return (s.linear * s.linear) / s.max_square;
}

double mcdiarmid_tail(double delta, double system_diam) {
    if (!(delta >= 0.0) || !(system_diam >= 0.0)) throw InvalidArgument("delta and D_F must be nonnegative");
    if (system_diam == 0.0) {
        if (delta == 0.0) return 1.0;
        throw UndefinedQuantity("tail bound is undefined for delta > 0 when D_F = 0");
    }
    return std::exp(-2.0 * delta * delta / (system_diam * system_diam));
}

namespace {

/// sqrt(ln(1/epsilon) / 2), shared so B and its lower bound round alike.
double bound_factor(double epsilon) { return std::sqrt(-0.5 * std::log(epsilon)); }

}  // namespace

double mcdiarmid_bound(double epsilon, double system_diam) {
    check_epsilon(epsilon);
    if (!(system_diam >= 0.0)) throw InvalidArgument("D_F must be nonnegative");
    return system_diam * bound_factor(epsilon);
}

double theorem_lower_bound(double epsilon, double delta_f, double n_eff) {
    check_epsilon(epsilon);
    if (!(delta_f >= 0.0)) throw InvalidArgument("delta F must be nonnegative");
    if (delta_f == 0.0) return 0.0;
    if (!(n_eff >= 1.0)) throw InvalidArgument("n_eff must be at least 1");
    // Rounded toward zero by 8 ulps, about twice the worst accumulated
    // rounding error, so at equality (linear F) it never exceeds B.
    constexpr double kDown = 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
    return delta_f / std::sqrt(n_eff) * bound_factor(epsilon) * kDown;
}

double required_neff(double epsilon) {
    check_epsilon(epsilon);
    return 2.0 * std::log(1.0 / epsilon);
}

double required_neff_fraction(double epsilon, double r) {
    check_epsilon(epsilon);
    if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument("margin fraction r must lie in (0, 1]");
    return std::log(1.0 / epsilon) / (2.0 * r * r);
}

AbsoluteBounds absolute_bounds(double f_min, double f_max, double mean) {
    if (!(f_min <= mean && mean <= f_max)) {
        throw InvalidArgument("mean " + std::to_string(mean) + " lies outside [" + std::to_string(f_min) + ", " +
                              std::to_string(f_max) + "]");
    }
    const double range = f_max - f_min;
    if (range == 0.0) return {0.0, 0.0, 0.5, 0.5};
    AbsoluteBounds b;
    b.abs_plus = f_max - mean;
    b.abs_minus = mean - f_min;
    b.r_plus = b.abs_plus / range;
    b.r_minus = 1.0 - b.r_plus;
    return b;
}

double BoundsSummary::absolute_for(Direction d) const {
    switch (d) {
    case Direction::Plus: return abs_plus;
    case Direction::Minus: return abs_minus;
    case Direction::TwoSided: return std::max(abs_plus, abs_minus);
    }
    return abs_plus;
}

BoundsSummary summarize(std::span<const double> diameters, double f_min, double f_max, double epsilon,
                        std::optional<double> mean, MeanSource source) {
    check_epsilon(epsilon);
    if (!(f_min <= f_max)) throw InvalidArgument("F_min exceeds F_max");
    BoundsSummary s;
    s.diameters.assign(diameters.begin(), diameters.end());
    s.system_diam = system_diameter(diameters);
    s.f_min = f_min;
    s.f_max_value = f_max;
    s.delta_f = f_max - f_min;
    s.epsilon = epsilon;
    if (mean) {
        s.mean = *mean;
        s.mean_source = source;
    } else {
        s.mean = f_min + 0.5 * s.delta_f;
        s.mean_source = MeanSource::Midpoint;
    }
    const AbsoluteBounds ab = absolute_bounds(f_min, f_max, s.mean);
    s.abs_plus = ab.abs_plus;
    s.abs_minus = ab.abs_minus;
    s.r_plus = ab.r_plus;
    s.r_minus = ab.r_minus;

    const Sums sm = sums(diameters);
    if (sm.linear > 0.0) {
        for (double d : diameters) s.fractions.push_back(d / sm.linear);
        s.f_max = *std::max_element(s.fractions.begin(), s.fractions.end());
        s.n_eff = effective_n(diameters);
        s.n_eff_cap = effective_n_cap(diameters);
        s.theorem_lb = theorem_lower_bound(epsilon, s.delta_f, *s.n_eff);
    } else if (s.delta_f == 0.0) {
        s.theorem_lb = 0.0;
    }
    s.mcdiarmid = mcdiarmid_bound(epsilon, s.system_diam);
    s.neff_required = required_neff(epsilon);
    return s;
}

Recommendation compare(double epsilon, const BoundsSummary& summary, Direction direction) {
    const double b = mcdiarmid_bound(epsilon, summary.system_diam);
    double absolute = 0.0;
    switch (direction) {
    case Direction::Plus: absolute = summary.abs_plus; break;
    case Direction::Minus: absolute = summary.abs_minus; break;
    case Direction::TwoSided: absolute = std::min(summary.abs_plus, summary.abs_minus); break;
    }
    return absolute <= b ? Recommendation::Absolute : Recommendation::McDiarmid;
}

}  // namespace mcdcert
