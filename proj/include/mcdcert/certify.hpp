#pragma once

#include "mcdcert/bounds.hpp"
#include "mcdcert/diameter.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mcdcert {

struct CertificationReport {
    std::string problem;
    Direction direction = Direction::TwoSided;
    double margin = 0.0;
    double epsilon = 0.005;
    BoundsSummary summary;
    double design_point = 0.0;
    double uncertainty = 0.0;
    /// M / U; absent when U = 0.
    std::optional<double> confidence_ratio;
    /// Margin needed by each bound in this direction.
    double required_absolute = 0.0;
    double required_mcdiarmid = 0.0;
    bool absolute_pass = false;
    bool mcdiarmid_pass = false;
    Recommendation recommendation = Recommendation::Neither;
    /// 0 when the absolute bound passes, epsilon per side when only the
    /// McDiarmid bound does, absent when not certified.
    std::optional<double> claimed_pof;
    std::vector<std::string> caveats;

    bool certified() const { return recommendation != Recommendation::Neither; }
};

/// Certifies margin M at per-side POF epsilon. Margins pass on equality.
/// Throws InvalidArgument if M < 0, epsilon is outside (0, 1) or the mean
/// lies outside [F_min, F_max].
CertificationReport certify(const DiameterEstimate& estimate, std::optional<double> mean, double margin,
                            double epsilon, Direction direction, MeanSource mean_source = MeanSource::Given,
                            std::string problem = {});

/// Same decision from a bounds summary alone (no estimate metadata).
CertificationReport certify(const BoundsSummary& summary, double margin, Direction direction,
                            std::string problem = {});

struct UsefulnessAdvice {
    double n_eff = 0.0;
    double epsilon = 0.0;
    double threshold = 0.0;
    /// n_eff > 2 ln(1/epsilon): the McDiarmid bound can possibly beat the
    /// symmetric absolute bound.
    bool useful = false;
    std::optional<double> fraction;
    std::optional<double> fraction_threshold;
    std::optional<bool> fraction_useful;
    std::string message;
};

UsefulnessAdvice usefulness_check(double n_eff, double epsilon, std::optional<double> r = std::nullopt);

}  // namespace mcdcert
