#include "mcdcert/diameter.hpp"

#include "mcdcert/error.hpp"
#include "mcdcert/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace mcdcert {

std::string Method::label() const {
    switch (kind) {
    case Kind::Vertex: return "vertex";
    case Kind::Grid: return "grid:" + std::to_string(resolution);
    case Kind::Multistart: return "multistart:" + std::to_string(starts) + "," + std::to_string(iters);
    case Kind::Merged: return "merged(" + merged_label + ")";
    }
    return "?";
}

namespace {

std::size_t parse_count(std::string_view s, std::string_view what) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InvalidArgument("bad " + std::string(what) + " '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

Method parse_method(std::string_view text) {
    if (text == "vertex") return Method::vertex();
    if (text.starts_with("grid:")) {
        const std::size_t r = parse_count(text.substr(5), "grid resolution");
        if (r < 2) throw InvalidArgument("grid resolution must be at least 2");
        return Method::grid(r);
    }
    if (text.starts_with("multistart:")) {
        const std::string_view rest = text.substr(11);
        const auto comma = rest.find(',');
        if (comma == std::string_view::npos) throw InvalidArgument("multistart needs S,I");
        const std::size_t s = parse_count(rest.substr(0, comma), "start count");
        const std::size_t i = parse_count(rest.substr(comma + 1), "iteration count");
        if (s < 1 || i < 1) throw InvalidArgument("multistart starts and iters must be at least 1");
        return Method::multistart(s, i);
    }
    throw InvalidArgument("unknown method '" + std::string(text) + "' (vertex, grid:R, multistart:S,I)");
}

Method default_method(std::size_t n) { return n <= 12 ? Method::vertex() : Method::multistart(16, 30); }

double DiameterEstimate::sum_diameters() const {
    double s = 0.0;
    for (double d : diameters) s += d;
    return s;
}

namespace {

// Shared reduction for vertex and grid: values laid out in mixed radix with
// coordinate 0 most significant, `levels[i]` holding the axis values.
DiameterEstimate reduce_product_set(const ResponseFunction& f, const std::vector<std::vector<double>>& levels,
                                    const std::vector<double>& values) {
    const std::size_t n = levels.size();
    auto point_at = [&](std::uint64_t idx) {
        Point p(n);
        for (std::size_t i = n; i-- > 0;) {
            const std::uint64_t r = levels[i].size();
            p[i] = levels[i][idx % r];
            idx /= r;
        }
        return p;
    };

    DiameterEstimate est{f.domain(), std::vector<double>(n, 0.0), std::vector<WitnessPair>(n), 0, 0, 0, {}, {}, {}};
    std::uint64_t imin = 0, imax = 0;
    for (std::uint64_t k = 1; k < values.size(); ++k) {
        if (values[k] < values[imin]) imin = k;
        if (values[k] > values[imax]) imax = k;
    }
    est.f_min = values[imin];
    est.f_max = values[imax];
    est.delta_f = est.f_max - est.f_min;
    est.argmin = point_at(imin);
    est.argmax = point_at(imax);

    std::uint64_t stride = 1;
    for (std::size_t i = n; i-- > 0;) {
        const std::uint64_t r = levels[i].size();
        double best = -1.0;
        std::uint64_t wa = 0, wb = 0;
        // Lines along axis i start at indices whose digit i is zero.
        for (std::uint64_t base = 0; base < values.size(); ++base) {
            if ((base / stride) % r != 0) continue;
            std::uint64_t lo_k = base, hi_k = base;
            for (std::uint64_t t = 1; t < r; ++t) {
                const std::uint64_t k = base + t * stride;
                if (values[k] < values[lo_k]) lo_k = k;
                if (values[k] > values[hi_k]) hi_k = k;
            }
            const double d = values[hi_k] - values[lo_k];
            if (d > best) {
                best = d;
                wa = std::min(lo_k, hi_k);
                wb = std::max(lo_k, hi_k);
            }
        }
        est.diameters[i] = best;
        est.witnesses[i] = WitnessPair{point_at(wa), point_at(wb), values[wa], values[wb]};
        stride *= r;
    }
    return est;
}

std::vector<double> evaluate_product_set(const ResponseFunction& f, const std::vector<std::vector<double>>& levels,
                                         std::uint64_t total, std::size_t workers) {
    const std::size_t n = levels.size();
    std::vector<double> values(total);
    constexpr std::uint64_t kChunk = 256;
    const std::uint64_t chunks = (total + kChunk - 1) / kChunk;
    parallel_for(chunks, workers, [&](std::size_t c) {
        Point p(n);
        const std::uint64_t end = std::min<std::uint64_t>(total, (c + 1) * kChunk);
        for (std::uint64_t k = c * kChunk; k < end; ++k) {
            std::uint64_t idx = k;
            for (std::size_t i = n; i-- > 0;) {
                const std::uint64_t r = levels[i].size();
                p[i] = levels[i][idx % r];
                idx /= r;
            }
            values[k] = f.eval_at(p);
        }
    });
    return values;
}

}  // namespace

DiameterEstimate estimate_vertex(const ResponseFunction& f, const EstimateOptions& options) {
    const BoxDomain& d = f.domain();
    const CornerRange range(d, options.vertex_limit);
    std::vector<std::vector<double>> levels;
    for (const auto& in : d.inputs()) levels.push_back({in.lo, in.hi});

    const std::uint64_t before = f.eval_count();
    const auto values = evaluate_product_set(f, levels, range.size(), options.workers);
    DiameterEstimate est = reduce_product_set(f, levels, values);
    est.method = Method::vertex();
    est.exactness = options.assume_monotone ? Exactness::Exact : Exactness::LowerEstimate;
    est.budget_used = f.eval_count() - before;
    est.probes = values.size();
    return est;
}

DiameterEstimate estimate_grid(const ResponseFunction& f, std::size_t resolution, const EstimateOptions& options) {
    if (resolution < 2) throw InvalidArgument("grid resolution must be at least 2");
    const BoxDomain& d = f.domain();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (total > options.grid_budget / resolution) {
            throw LimitExceeded("grid of resolution " + std::to_string(resolution) + " in " + std::to_string(d.size()) +
                                " dimensions exceeds the budget of " + std::to_string(options.grid_budget) +
                                " points");
        }
        total *= resolution;
    }

    std::vector<std::vector<double>> levels;
    for (const auto& in : d.inputs()) {
        std::vector<double> axis(resolution);
        for (std::size_t k = 0; k < resolution; ++k) {
            // t is the correctly rounded k/(R-1), so nested grids share their common levels exactly.
            const double t = static_cast<double>(k) / static_cast<double>(resolution - 1);
            axis[k] = (k + 1 == resolution) ? in.hi : in.lo + t * (in.hi - in.lo);
        }
        levels.push_back(std::move(axis));
    }

    const std::uint64_t before = f.eval_count();
    const auto values = evaluate_product_set(f, levels, total, options.workers);
    DiameterEstimate est = reduce_product_set(f, levels, values);
    est.method = Method::grid(resolution);
    est.exactness = Exactness::LowerEstimate;
    est.budget_used = f.eval_count() - before;
    est.probes = values.size();
    return est;
}

namespace {

constexpr double kFailed = -std::numeric_limits<double>::infinity();
constexpr std::size_t kGoldenSteps = 5;

struct SearchOutcome {
    std::vector<double> z;
    double value = kFailed;
    std::uint64_t probes = 0;
    std::uint64_t failures = 0;
};

// Maximizes `objective` over the box [lo, hi] starting from z. The objective
// returns kFailed for points where F could not be evaluated.
SearchOutcome coordinate_search(const std::function<double(const std::vector<double>&)>& objective,
                                const std::vector<double>& lo, const std::vector<double>& hi, std::vector<double> z,
                                std::size_t iters) {
    SearchOutcome out;
    const std::size_t m = z.size();
    auto probe = [&](const std::vector<double>& p) {
        ++out.probes;
        const double v = objective(p);
        if (v == kFailed) ++out.failures;
        return v;
    };

    std::vector<double> step(m);
    for (std::size_t j = 0; j < m; ++j) step[j] = (hi[j] - lo[j]) / 4.0;
    double value = probe(z);

    static const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
    std::vector<double> trial;
    for (std::size_t sweep = 0; sweep < iters; ++sweep) {
        bool improved = false;
        for (std::size_t j = 0; j < m; ++j) {
            if (hi[j] == lo[j]) continue;
            const double s = step[j];
            double best = value;
            double best_c = z[j];
            trial = z;
            auto try_at = [&](double c) {
                trial[j] = c;
                const double v = probe(trial);
                if (v > best) {
                    best = v;
                    best_c = c;
                }
                return v;
            };
            for (const double c : {std::max(lo[j], z[j] - s), std::min(hi[j], z[j] + s)}) {
                if (c != z[j]) try_at(c);
            }

            // Golden-section refinement on the bracket around the best point.
            double a = std::max(lo[j], best_c - s);
            double b = std::min(hi[j], best_c + s);
            double x1 = b - kGolden * (b - a);
            double x2 = a + kGolden * (b - a);
            double f1 = try_at(x1);
            double f2 = try_at(x2);
            for (std::size_t g = 0; g < kGoldenSteps; ++g) {
                if (f1 < f2) {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + kGolden * (b - a);
                    f2 = try_at(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - kGolden * (b - a);
                    f1 = try_at(x1);
                }
            }

            if (best > value) {
                z[j] = best_c;
                value = best;
                improved = true;
            }
        }
        if (!improved) {
            for (double& s : step) s *= 0.5;
        }
        bool converged = true;
        for (std::size_t j = 0; j < m; ++j) {
            if (hi[j] > lo[j] && step[j] >= 1e-9 * (hi[j] - lo[j])) converged = false;
        }
        if (converged) break;
    }
    out.z = std::move(z);
    out.value = value;
    return out;
}

double checked_eval(const ResponseFunction& f, const std::vector<double>& x) {
    try {
        return f.eval_at(x);
    } catch (const EvaluationError&) {
        return kFailed;
    }
}

}  // namespace

DiameterEstimate estimate_multistart(const ResponseFunction& f, std::size_t starts, std::size_t iters,
                                     std::uint64_t seed, const EstimateOptions& options) {
    if (starts < 1 || iters < 1) throw InvalidArgument("multistart needs starts >= 1 and iters >= 1");
    const BoxDomain& d = f.domain();
    const std::size_t n = d.size();
    const std::size_t targets = n + 2;  // D_1..D_n, F_max, F_min

    std::vector<double> lo, hi;
    for (const auto& in : d.inputs()) {
        lo.push_back(in.lo);
        hi.push_back(in.hi);
    }

    const std::uint64_t before = f.eval_count();
    std::vector<SearchOutcome> outcomes(targets * starts);
    parallel_for(outcomes.size(), options.workers, [&](std::size_t task) {
        const std::size_t target = task / starts;
        const std::size_t start = task % starts;
        std::vector<double> tlo = lo, thi = hi;
        std::function<double(const std::vector<double>&)> objective;
        if (target < n) {
            tlo.push_back(lo[target]);
            thi.push_back(hi[target]);
            objective = [&f, n, target](const std::vector<double>& z) {
                std::vector<double> x(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
                const double a = checked_eval(f, x);
                if (a == kFailed) return kFailed;
                x[target] = z[n];
                const double b = checked_eval(f, x);
                if (b == kFailed) return kFailed;
                return std::fabs(a - b);
            };
        } else {
            const double sign = target == n ? 1.0 : -1.0;
            objective = [&f, sign](const std::vector<double>& z) {
                const double v = checked_eval(f, z);
                return v == kFailed ? kFailed : sign * v;
            };
        }
        std::mt19937_64 rng(derive_seed(derive_seed(seed, target), start));
        std::vector<double> z(tlo.size());
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            z[j] = std::min(thi[j], tlo[j] + u * (thi[j] - tlo[j]));
        }
        outcomes[task] = coordinate_search(objective, tlo, thi, std::move(z), iters);
    });

    DiameterEstimate est{d, std::vector<double>(n, 0.0), std::vector<WitnessPair>(n), 0, 0, 0, {}, {}, {}};
    est.method = Method::multistart(starts, iters);
    est.exactness = Exactness::LowerEstimate;

    auto best_of = [&](std::size_t target) -> const SearchOutcome* {
        const SearchOutcome* best = nullptr;
        for (std::size_t s = 0; s < starts; ++s) {
            const SearchOutcome& o = outcomes[target * starts + s];
            if (o.value == kFailed) continue;
            if (best == nullptr || o.value > best->value) best = &o;
        }
        return best;
    };

    bool missing = false;
    for (std::size_t i = 0; i < n; ++i) {
        const SearchOutcome* best = best_of(i);
        if (best == nullptr) {
            missing = true;
            continue;
        }
        Point x(best->z.begin(), best->z.begin() + static_cast<std::ptrdiff_t>(n));
        Point xp = x;
        xp[i] = best->z[n];
        const double fx = f.eval_at(x);
        const double fxp = f.eval_at(xp);
        est.diameters[i] = std::fabs(fx - fxp);
        est.witnesses[i] = WitnessPair{std::move(x), std::move(xp), fx, fxp};
    }
    const SearchOutcome* top = best_of(n);
    const SearchOutcome* bottom = best_of(n + 1);
    if (top == nullptr || bottom == nullptr) {
        throw EvaluationError("multistart search found no point where F could be evaluated");
    }
    est.argmax = top->z;
    est.argmin = bottom->z;
    est.f_max = f.eval_at(est.argmax);
    est.f_min = f.eval_at(est.argmin);
    est.delta_f = est.f_max - est.f_min;

    for (const auto& o : outcomes) {
        est.probes += o.probes;
        est.failed_probes += o.failures;
    }
    est.reliable = !missing && est.failed_probes * 10 <= est.probes;
    est.budget_used = f.eval_count() - before;
    return est;
}

DiameterEstimate estimate(const ResponseFunction& f, const Method& method, std::uint64_t seed,
                          const EstimateOptions& options) {
    switch (method.kind) {
    case Method::Kind::Vertex: return estimate_vertex(f, options);
    case Method::Kind::Grid: return estimate_grid(f, method.resolution, options);
    case Method::Kind::Multistart: return estimate_multistart(f, method.starts, method.iters, seed, options);
    case Method::Kind::Merged: break;
    }
    throw InvalidArgument("a merged method cannot be run directly");
}

DiameterEstimate merge(const DiameterEstimate& a, const DiameterEstimate& b) {
    if (!(a.domain == b.domain)) throw InvalidArgument("cannot merge estimates over different domains");
    DiameterEstimate out = a;
    for (std::size_t i = 0; i < a.diameters.size(); ++i) {
        if (b.diameters[i] > a.diameters[i]) {
            out.diameters[i] = b.diameters[i];
            out.witnesses[i] = b.witnesses[i];
        }
    }
    if (b.f_min < a.f_min) {
        out.f_min = b.f_min;
        out.argmin = b.argmin;
    }
    if (b.f_max > a.f_max) {
        out.f_max = b.f_max;
        out.argmax = b.argmax;
    }
    out.delta_f = out.f_max - out.f_min;
    if (!(a.method == b.method)) {
        Method m;
        m.kind = Method::Kind::Merged;
        auto inner = [](const Method& x) { return x.kind == Method::Kind::Merged ? x.merged_label : x.label(); };
        m.merged_label = inner(a.method) + "+" + inner(b.method);
        out.method = m;
    }
    // An exact input dominates any lower estimate of the same quantity.
    out.exactness = (a.exactness == Exactness::Exact || b.exactness == Exactness::Exact) ? Exactness::Exact
                                                                                          : Exactness::LowerEstimate;
    out.budget_used = a.budget_used + b.budget_used;
    out.probes = a.probes + b.probes;
    out.failed_probes = a.failed_probes + b.failed_probes;
    out.reliable = a.reliable && b.reliable;
    return out;
}

}  // namespace mcdcert
