#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <string>
#include <variant>
#include <vector>

namespace mcdcert {

struct Uniform {
    friend bool operator==(const Uniform&, const Uniform&) = default;
};

struct Triangular {
    double mode = 0.0;
    friend bool operator==(const Triangular&, const Triangular&) = default;
};

struct PointMass {
    double value = 0.0;
    friend bool operator==(const PointMass&, const PointMass&) = default;
};

using Distribution = std::variant<Uniform, Triangular, PointMass>;

struct InputSpec {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    Distribution dist = Uniform{};

    double width() const noexcept { return hi - lo; }
    double midpoint() const noexcept { return lo + 0.5 * (hi - lo); }

    friend bool operator==(const InputSpec&, const InputSpec&) = default;
};

using Point = std::vector<double>;

/// Ordered box of named, bounded inputs. Construction validates: nonempty,
/// unique names, finite lo <= hi, distributions supported in [lo, hi].
class BoxDomain {
public:
    explicit BoxDomain(std::vector<InputSpec> inputs);

    std::size_t size() const noexcept { return inputs_.size(); }
    const InputSpec& operator[](std::size_t i) const { return inputs_[i]; }
    const std::vector<InputSpec>& inputs() const noexcept { return inputs_; }
    std::vector<std::string> names() const;

    bool contains(const Point& x) const;

    friend bool operator==(const BoxDomain&, const BoxDomain&) = default;

private:
    std::vector<InputSpec> inputs_;
};

/// Convenience: n inputs x1..xn on [lo, hi], uniform.
BoxDomain unit_box(std::size_t n, double lo = 0.0, double hi = 1.0);

inline constexpr std::size_t kDefaultVertexLimit = 20;

/// The 2^n vertices of a box in lexicographic lo/hi order: vertex k takes
/// hi in coordinate i when bit (n-1-i) of k is set.
class CornerRange {
public:
    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = Point;
        using difference_type = std::ptrdiff_t;

        iterator() = default;
        iterator(const CornerRange* range, std::uint64_t k) : range_(range), k_(k) {}

        Point operator*() const { return (*range_)[k_]; }
        iterator& operator++() {
            ++k_;
            return *this;
        }
        iterator operator++(int) {
            iterator t = *this;
            ++k_;
            return t;
        }
        friend bool operator==(const iterator& a, const iterator& b) { return a.k_ == b.k_; }

    private:
        const CornerRange* range_ = nullptr;
        std::uint64_t k_ = 0;
    };

    CornerRange(const BoxDomain& d, std::size_t limit = kDefaultVertexLimit);

    std::uint64_t size() const noexcept { return std::uint64_t{1} << lo_.size(); }
    Point operator[](std::uint64_t k) const;

    iterator begin() const { return {this, 0}; }
    iterator end() const { return {this, size()}; }

private:
    std::vector<double> lo_;
    std::vector<double> hi_;
};

inline CornerRange corners(const BoxDomain& d, std::size_t limit = kDefaultVertexLimit) {
    return CornerRange(d, limit);
}

/// Mixes a base seed with a stream index into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// `count` points drawn with independent coordinates per each input's
/// distribution. Deterministic in `seed` and independent of the platform's
/// standard distribution implementations.
std::vector<Point> sample(const BoxDomain& d, std::size_t count, std::uint64_t seed);

/// Uniform draws over the box regardless of the declared distributions.
std::vector<Point> sample_uniform(const BoxDomain& d, std::size_t count, std::uint64_t seed);

}  // namespace mcdcert
