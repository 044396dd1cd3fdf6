#pragma once

// Estimation of McDiarmid diameters
//
//   D_i = sup |F(.., x_i, ..) - F(.., x_i', ..)|
//
// and of the range F_min, F_max over a box. Every method reports suprema it
// actually observed, so results are lower estimates of the true values unless
// flagged exact (vertex method on a function declared coordinate-monotone).

#include "mcdcert/domain.hpp"
#include "mcdcert/response.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mcdcert {

enum class Exactness { Exact, LowerEstimate };

struct Method {
    enum class Kind { Vertex, Grid, Multistart, Merged };

    Kind kind = Kind::Vertex;
    std::size_t resolution = 0;  // Grid
    std::size_t starts = 0;      // Multistart
    std::size_t iters = 0;       // Multistart
    std::string merged_label;    // Merged

    static Method vertex() { return {}; }
    static Method grid(std::size_t resolution) { return {Kind::Grid, resolution, 0, 0, {}}; }
    static Method multistart(std::size_t starts, std::size_t iters) { return {Kind::Multistart, 0, starts, iters, {}}; }

    /// "vertex", "grid:R", "multistart:S,I" or "merged(a+b)".
    std::string label() const;

    friend bool operator==(const Method&, const Method&) = default;
};

/// Parses "vertex", "grid:R" or "multistart:S,I". Throws InvalidArgument.
Method parse_method(std::string_view text);

/// vertex for n <= 12, multistart(16, 30) otherwise.
Method default_method(std::size_t n);

/// Two points that differ only in one coordinate, with their F values.
struct WitnessPair {
    Point x;
    Point x_prime;
    double f_x = 0.0;
    double f_x_prime = 0.0;

    friend bool operator==(const WitnessPair&, const WitnessPair&) = default;
};

struct DiameterEstimate {
    BoxDomain domain;
    std::vector<double> diameters;
    /// Empty points when no successful probe pair was found for that input.
    std::vector<WitnessPair> witnesses;
    double f_min = 0.0;
    double f_max = 0.0;
    double delta_f = 0.0;
    Point argmin;
    Point argmax;
    Method method;
    Exactness exactness = Exactness::LowerEstimate;
    std::uint64_t budget_used = 0;
    std::uint64_t probes = 0;
    std::uint64_t failed_probes = 0;
    /// False when more than 10% of search probes failed.
    bool reliable = true;

    double sum_diameters() const;
};

struct EstimateOptions {
    std::size_t workers = 0;
    std::size_t vertex_limit = kDefaultVertexLimit;
    std::uint64_t grid_budget = std::uint64_t{1} << 22;
    /// The caller asserts F is monotone in each coordinate, which makes the
    /// vertex method exact.
    bool assume_monotone = false;
};

DiameterEstimate estimate_vertex(const ResponseFunction& f, const EstimateOptions& options = {});

/// Exhaustive search over `resolution` equally spaced levels per axis,
/// endpoints included.
DiameterEstimate estimate_grid(const ResponseFunction& f, std::size_t resolution, const EstimateOptions& options = {});

/// Random starts followed by cyclic coordinate search with golden-section
/// refinement, run separately for each D_i (over the n+1 variables
/// (x, x_i')) and for F_max, F_min.
DiameterEstimate estimate_multistart(const ResponseFunction& f, std::size_t starts, std::size_t iters,
                                     std::uint64_t seed, const EstimateOptions& options = {});

DiameterEstimate estimate(const ResponseFunction& f, const Method& method, std::uint64_t seed,
                          const EstimateOptions& options = {});

/// Coordinatewise max of D_i, min of F_min, max of F_max; ties keep `a`.
DiameterEstimate merge(const DiameterEstimate& a, const DiameterEstimate& b);

}  // namespace mcdcert
