#include "mcdcert/domain.hpp"

#include "mcdcert/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace mcdcert {

namespace {

double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double draw(const InputSpec& in, std::mt19937_64& rng) {
    const double u = unit_double(rng);
    return std::visit(
        [&](const auto& dist) -> double {
            using T = std::decay_t<decltype(dist)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return std::min(in.hi, in.lo + u * (in.hi - in.lo));
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return dist.value;
            } else {
                // Inverse CDF of the triangular law on [lo, hi] with the given mode.
                const double w = in.hi - in.lo;
                if (w == 0.0) return in.lo;
                const double c = (dist.mode - in.lo) / w;
                double t;
                if (u < c) {
                    t = std::sqrt(u * c);
                } else {
                    t = 1.0 - std::sqrt((1.0 - u) * (1.0 - c));
                }
                return std::clamp(in.lo + t * w, in.lo, in.hi);
            }
        },
        in.dist);
}

}  // namespace

BoxDomain::BoxDomain(std::vector<InputSpec> inputs) : inputs_(std::move(inputs)) {
    if (inputs_.empty()) throw InvalidArgument("domain must declare at least one input");
    std::set<std::string> seen;
    for (const auto& in : inputs_) {
        if (in.name.empty()) throw InvalidArgument("input name must be nonempty");
        if (!seen.insert(in.name).second) throw InvalidArgument("duplicate input name '" + in.name + "'");
        if (!std::isfinite(in.lo) || !std::isfinite(in.hi)) {
            throw InvalidArgument("input '" + in.name + "' must have finite bounds");
        }
        if (in.lo > in.hi) throw InvalidArgument("input '" + in.name + "' has lo > hi");
        if (const auto* t = std::get_if<Triangular>(&in.dist)) {
            if (!(t->mode >= in.lo && t->mode <= in.hi)) {
                throw InvalidArgument("triangular mode of '" + in.name + "' lies outside its range");
            }
        } else if (const auto* p = std::get_if<PointMass>(&in.dist)) {
            if (!(p->value >= in.lo && p->value <= in.hi)) {
                throw InvalidArgument("point mass of '" + in.name + "' lies outside its range");
            }
        }
    }
}

std::vector<std::string> BoxDomain::names() const {
    std::vector<std::string> out;
    out.reserve(inputs_.size());
    for (const auto& in : inputs_) out.push_back(in.name);
    return out;
}

bool BoxDomain::contains(const Point& x) const {
    if (x.size() != inputs_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= inputs_[i].lo && x[i] <= inputs_[i].hi)) return false;
    }
    return true;
}

BoxDomain unit_box(std::size_t n, double lo, double hi) {
    std::vector<InputSpec> inputs;
    for (std::size_t i = 0; i < n; ++i) inputs.push_back({"x" + std::to_string(i + 1), lo, hi, Uniform{}});
    return BoxDomain(std::move(inputs));
}

CornerRange::CornerRange(const BoxDomain& d, std::size_t limit) {
    if (d.size() > limit || d.size() > 62) {
        throw LimitExceeded("vertex enumeration needs 2^" + std::to_string(d.size()) +
                            " points, above the limit of 2^" + std::to_string(limit) +
                            "; use the grid or multistart method instead");
    }
    for (const auto& in : d.inputs()) {
        lo_.push_back(in.lo);
        hi_.push_back(in.hi);
    }
}

Point CornerRange::operator[](std::uint64_t k) const {
    const std::size_t n = lo_.size();
    Point p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = ((k >> (n - 1 - i)) & 1U) ? hi_[i] : lo_[i];
    return p;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over a combination of both words.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<Point> sample(const BoxDomain& d, std::size_t count, std::uint64_t seed) {
    if (count < 1) throw InvalidArgument("sample count must be at least 1");
    std::mt19937_64 rng(seed);
    std::vector<Point> out(count, Point(d.size()));
    for (auto& p : out) {
        for (std::size_t i = 0; i < d.size(); ++i) p[i] = draw(d[i], rng);
    }
    return out;
}

std::vector<Point> sample_uniform(const BoxDomain& d, std::size_t count, std::uint64_t seed) {
    if (count < 1) throw InvalidArgument("sample count must be at least 1");
    std::mt19937_64 rng(seed);
    std::vector<Point> out(count, Point(d.size()));
    for (auto& p : out) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double u = unit_double(rng);
            p[i] = std::min(d[i].hi, d[i].lo + u * (d[i].hi - d[i].lo));
        }
    }
    return out;
}

}  // namespace mcdcert
