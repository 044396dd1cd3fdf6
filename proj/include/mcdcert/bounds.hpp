#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mcdcert {

enum class Direction { Plus, Minus, TwoSided };

std::string_view to_string(Direction d);
/// "plus", "minus" or "two-sided"; throws InvalidArgument otherwise.
Direction parse_direction(std::string_view s);

enum class Recommendation { Absolute, McDiarmid, Neither };

std::string_view to_string(Recommendation r);

/// sqrt(sum D_i^2).
double system_diameter(std::span<const double> diameters);

/// (sum D_i)^2 / sum D_i^2. Throws UndefinedQuantity when every D_i is zero.
double effective_n(std::span<const double> diameters);

/// (sum D_i)^2 / max_i D_i^2, i.e. 1/f_max^2, computed so that
/// effective_n(D) <= effective_n_cap(D) holds in floating point as well.
double effective_n_cap(std::span<const double> diameters);

/// One-sided tail bound exp(-2 delta^2 / D_F^2). With D_F = 0 only delta = 0
/// is defined (value 1).
double mcdiarmid_tail(double delta, double system_diam);

/// Deviation whose one-sided exceedance probability is at most epsilon:
/// D_F sqrt(ln(1/epsilon) / 2).
double mcdiarmid_bound(double epsilon, double system_diam);

/// Delta_F sqrt(ln(1/epsilon) / (2 n_eff)), a lower bound on mcdiarmid_bound
/// whenever Delta_F <= sum D_i. Zero when Delta_F is zero.
double theorem_lower_bound(double epsilon, double delta_f, double n_eff);

/// n_eff must exceed 2 ln(1/epsilon) for the McDiarmid bound to beat the
/// symmetric absolute bound.
double required_neff(double epsilon);

/// n_eff must exceed ln(1/epsilon) / (2 r^2) for the McDiarmid bound to fall
/// below a margin of r * Delta_F.
double required_neff_fraction(double epsilon, double r);

struct AbsoluteBounds {
    double abs_minus = 0.0;
    double abs_plus = 0.0;
    double r_minus = 0.5;
    double r_plus = 0.5;
};

/// Largest possible deviations below and above `mean`. Degenerate range
/// gives zeros with r = 1/2.
AbsoluteBounds absolute_bounds(double f_min, double f_max, double mean);

enum class MeanSource { Midpoint, Estimated, Given };

std::string_view to_string(MeanSource m);

struct BoundsSummary {
    std::vector<double> diameters;
    double system_diam = 0.0;
    /// f_i = D_i / sum D_i; empty when every D_i is zero.
    std::vector<double> fractions;
    std::optional<double> f_max;
    std::optional<double> n_eff;
    std::optional<double> n_eff_cap;
    double delta_f = 0.0;
    double f_min = 0.0;
    double f_max_value = 0.0;
    double mean = 0.0;
    MeanSource mean_source = MeanSource::Midpoint;
    double r_plus = 0.5;
    double r_minus = 0.5;
    double epsilon = 0.005;
    double mcdiarmid = 0.0;
    std::optional<double> theorem_lb;
    double neff_required = 0.0;
    double abs_plus = 0.0;
    double abs_minus = 0.0;

    /// Absolute bound relevant to a certification direction (two-sided takes
    /// the larger side, which both sides must clear).
    double absolute_for(Direction d) const;
};

/// Without a mean the midpoint of [f_min, f_max] is used.
BoundsSummary summarize(std::span<const double> diameters, double f_min, double f_max, double epsilon,
                        std::optional<double> mean = std::nullopt, MeanSource source = MeanSource::Given);

/// ABSOLUTE when the absolute bound in the relevant direction is no larger
/// than B_F(epsilon) (two-sided compares against the smaller side), else
/// MCDIARMID.
Recommendation compare(double epsilon, const BoundsSummary& summary, Direction direction);

}  // namespace mcdcert
