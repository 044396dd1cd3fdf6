#pragma once

// Scalar expressions over named input variables.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?        right associative
//   primary := number | name | name '(' args ')' | '(' sum ')'
//
// Functions: sin cos tan exp log sqrt abs (one argument), min max (two).

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcdcert::expr {

enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Min, Max };

struct Node {
    Kind kind = Kind::Number;
    double value = 0.0;      // Number
    std::string name;        // Variable
    Func func = Func::Sin;   // Call
    std::vector<Node> args;  // operands, in order

    friend bool operator==(const Node&, const Node&) = default;
};

/// Immutable parsed expression. Copies share the same tree.
class Expression {
public:
    explicit Expression(Node root);

    const Node& root() const noexcept { return *root_; }

    /// Variable names in order of first appearance.
    std::vector<std::string> variables() const;

    friend bool operator==(const Expression& a, const Expression& b) { return a.root() == b.root(); }

private:
    std::shared_ptr<const Node> root_;
};

Expression parse(std::string_view text);

/// Fully parenthesized rendering that reparses to the same tree.
std::string to_string(const Expression& e);

std::string_view function_name(Func f);
int function_arity(Func f);

/// Evaluate with variables looked up by name. Throws EvaluationError for
/// unbound variables and domain errors.
double evaluate(const Expression& e, const std::map<std::string, double, std::less<>>& point);

/// Expression with variable references resolved to positions in an ordered
/// variable list. Evaluation is reentrant.
class BoundExpression {
public:
    /// Throws InvalidArgument if the expression names a variable not in `names`.
    BoundExpression(Expression e, std::span<const std::string> names);

    double operator()(std::span<const double> x) const;

    const Expression& expression() const noexcept { return expr_; }
    std::size_t arity() const noexcept { return arity_; }

private:
    struct Instr {
        Kind kind;
        Func func;
        double value;
        std::size_t index;
    };

    Expression expr_;
    std::size_t arity_;
    std::vector<Instr> program_;  // postfix
    std::size_t max_stack_ = 0;
};

}  // namespace mcdcert::expr
