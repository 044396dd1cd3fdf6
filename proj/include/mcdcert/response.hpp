#pragma once

#include "mcdcert/domain.hpp"
#include "mcdcert/expr.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mcdcert {

/// Something that maps an input vector to a scalar. Implementations must be
/// safe to call concurrently.
class Backend {
public:
    virtual ~Backend() = default;

    /// Throws EvaluationError on failure.
    virtual double evaluate(std::span<const double> x) const = 0;

    /// Required input count, or 0 when any count is accepted.
    virtual std::size_t arity() const { return 0; }

    virtual std::string describe() const = 0;
};

class ExpressionBackend final : public Backend {
public:
    ExpressionBackend(expr::Expression e, std::span<const std::string> names);

    double evaluate(std::span<const double> x) const override { return bound_(x); }
    std::size_t arity() const override { return bound_.arity(); }
    std::string describe() const override;

private:
    expr::BoundExpression bound_;
};

/// Runs an external program once per evaluation. The input vector goes to
/// its stdin as one line of space-separated reals (declared order); the
/// first line of its stdout must hold the scalar result.
class CommandBackend final : public Backend {
public:
    explicit CommandBackend(std::vector<std::string> argv, std::size_t max_parallel = 0);
    ~CommandBackend() override;

    double evaluate(std::span<const double> x) const override;
    std::string describe() const override;

    const std::vector<std::string>& argv() const noexcept { return argv_; }

private:
    struct Gate;
    std::vector<std::string> argv_;
    std::unique_ptr<Gate> gate_;
};

/// sum_i w_i x_i + offset
class LinearBackend final : public Backend {
public:
    explicit LinearBackend(std::vector<double> weights, double offset = 0.0);

    double evaluate(std::span<const double> x) const override;
    std::size_t arity() const override { return weights_.size(); }
    std::string describe() const override { return "linear"; }

    const std::vector<double>& weights() const noexcept { return weights_; }
    double offset() const noexcept { return offset_; }

private:
    std::vector<double> weights_;
    double offset_;
};

/// prod_i x_i
class ProductBackend final : public Backend {
public:
    double evaluate(std::span<const double> x) const override;
    std::string describe() const override { return "product"; }
};

/// sum_i w_i x_i + coupling * sum_{i<j} x_i x_j
class InteractionBackend final : public Backend {
public:
    InteractionBackend(std::vector<double> weights, double coupling);

    double evaluate(std::span<const double> x) const override;
    std::size_t arity() const override { return weights_.size(); }
    std::string describe() const override { return "interaction"; }

private:
    std::vector<double> weights_;
    double coupling_;
};

struct ResponseOptions {
    /// Maximum number of cached values; further new points are evaluated but not stored.
    std::size_t cache_limit = std::size_t{1} << 20;
};

/// F over a box with memoization and evaluation accounting. eval_at is safe
/// for concurrent use; concurrent requests for the same point share a
/// single backend invocation.
class ResponseFunction {
public:
    ResponseFunction(BoxDomain domain, std::shared_ptr<const Backend> backend, ResponseOptions options = {});
    ~ResponseFunction();
    ResponseFunction(ResponseFunction&&) noexcept;
    ResponseFunction& operator=(ResponseFunction&&) noexcept;

    /// Points within a 1e-12 relative tolerance outside the box are clamped;
    /// farther points are rejected with InvalidArgument.
    double eval_at(std::span<const double> x) const;

    const BoxDomain& domain() const noexcept;
    const Backend& backend() const noexcept;
    std::size_t dimension() const noexcept { return domain().size(); }

    /// Number of backend invocations so far (cache hits excluded).
    std::uint64_t eval_count() const noexcept;
    std::size_t cache_size() const;

private:
    struct State;
    std::unique_ptr<State> state_;
};

ResponseFunction make_expression_function(BoxDomain domain, std::string_view text, ResponseOptions options = {});

}  // namespace mcdcert
