#include "mcdcert/error.hpp"
#include "mcdcert/expr.hpp"
#include "support/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <thread>

using namespace mcdcert;
using namespace mcdcert::expr;

namespace {

Node var(const std::string& n) {
    Node v;
    v.kind = Kind::Variable;
    v.name = n;
    return v;
}

Node lit(double x) {
    Node v;
    v.kind = Kind::Number;
    v.value = x;
    return v;
}

Node op(Kind k, std::vector<Node> args) {
    Node v;
    v.kind = k;
    v.args = std::move(args);
    return v;
}

double eval_text(std::string_view text, std::map<std::string, double, std::less<>> point) {
    return evaluate(parse(text), point);
}

}  // namespace

TEST_CASE("parse builds the expected trees") {
    CHECK(parse("x1*x2") == Expression(op(Kind::Mul, {var("x1"), var("x2")})));
    CHECK(parse("-x1^2") == Expression(op(Kind::Neg, {op(Kind::Pow, {var("x1"), lit(2)})})));

    Node min_node = op(Kind::Call, {var("x1"), op(Kind::Sub, {lit(1), var("x2")})});
    min_node.func = Func::Min;
    CHECK(parse("min(x1, 1 - x2)") == Expression(min_node));
}

TEST_CASE("precedence and associativity") {
    CHECK(eval_text("-x1^2", {{"x1", 2}}) == -4.0);
    CHECK(eval_text("2^3^2", {}) == 512.0);
    CHECK(eval_text("2*3+4*5", {}) == 26.0);
    CHECK(eval_text("(2+3)*4", {}) == 20.0);
    CHECK(eval_text("8/4/2", {}) == 1.0);
    CHECK(eval_text("10-4-3", {}) == 3.0);
    CHECK(eval_text("2^-1", {}) == 0.5);
    CHECK(eval_text("  2 *\tx ", {{"x", 3}}) == 6.0);
    CHECK(eval_text("1.5e2 + .5", {}) == 150.5);
}

TEST_CASE("evaluate examples") {
    CHECK(eval_text("x1*x2", {{"x1", 0.5}, {"x2", 0.5}}) == 0.25);
    CHECK(eval_text("2*x1 + 3*x2", {{"x1", 1}, {"x2", 1}}) == 5.0);
    CHECK(eval_text("log(x)", {{"x", std::exp(1.0)}}) == doctest::Approx(1.0));
    CHECK(eval_text("max(abs(-3), sqrt(4))", {}) == 3.0);
    CHECK(eval_text("sin(0) + cos(0) + tan(0) + exp(0)", {}) == 2.0);
}

TEST_CASE("evaluation failures carry the point") {
    try {
        eval_text("log(x1)", {{"x1", 0.0}});
        FAIL("expected failure");
    } catch (const EvaluationError& e) {
        CHECK(e.point() == std::vector<double>{0.0});
        CHECK(std::string(e.what()).find("log") != std::string::npos);
    }
    CHECK_THROWS_AS(eval_text("sqrt(x)", {{"x", -1}}), EvaluationError);
    CHECK_THROWS_AS(eval_text("1/x", {{"x", 0}}), EvaluationError);
    CHECK_THROWS_AS(eval_text("x^0.5", {{"x", -4}}), EvaluationError);
    CHECK(eval_text("x^3", {{"x", -2}}) == -8.0);
    CHECK_THROWS_AS(eval_text("exp(x)", {{"x", 1e6}}), EvaluationError);
    CHECK_THROWS_AS(eval_text("x + y", {{"x", 1}}), EvaluationError);
}

TEST_CASE("syntax errors are located") {
    auto offset_of = [](std::string_view text) -> std::size_t {
        try {
            parse(text);
        } catch (const ParseError& e) {
            return e.offset();
        }
        return std::string::npos;
    };
    CHECK(offset_of("") == 0);
    CHECK(offset_of("(x1 + 2") == 7);
    CHECK(offset_of("x1 + 2)") == 6);
    CHECK(offset_of("((x))) ") == 5);
    CHECK(offset_of("x1 + * 2") == 5);
    CHECK(offset_of("foo(x1)") == 0);
    CHECK(offset_of("1 + min(x1)") == 4);
    CHECK(offset_of("2 $ 3") == 2);
    CHECK(offset_of("1e999") == 0);
    CHECK(offset_of("+x") == 0);
}

TEST_CASE("binding checks variable names") {
    const std::vector<std::string> names{"a", "b"};
    CHECK_THROWS_AS(BoundExpression(parse("a + c"), names), InvalidArgument);
    const BoundExpression e(parse("a - 2*b"), names);
    const std::vector<double> x{5.0, 1.0};
    CHECK(e(x) == 3.0);
    CHECK(parse("a*b + a").variables() == names);
}

TEST_CASE("bound and map evaluation agree and are reentrant") {
    oracle::ExpressionGenerator gen(7);
    const std::vector<std::string> names{"x1", "x2", "x3"};
    for (int k = 0; k < 200; ++k) {
        const Expression e = parse(gen.generate(3, 4));
        const BoundExpression b(e, names);
        const std::vector<double> x{0.3 * k / 200.0, -1.25, 2.0};
        const double direct = b(x);
        CHECK(direct == evaluate(e, {{"x1", x[0]}, {"x2", x[1]}, {"x3", x[2]}}));

        std::vector<double> results(4);
        std::vector<std::jthread> pool;
        for (int t = 0; t < 4; ++t) pool.emplace_back([&, t] { results[t] = b(x); });
        pool.clear();
        for (double r : results) CHECK(r == direct);
    }
}

TEST_CASE("printing round-trips to an identical tree") {
    oracle::ExpressionGenerator gen(42);
    for (int k = 0; k < 500; ++k) {
        const std::string text = gen.generate(4, 1 + k % 5);
        const Expression e = parse(text);
        const Expression again = parse(to_string(e));
        CHECK_MESSAGE(e == again, text);
        CHECK(to_string(again) == to_string(e));
    }
    // Literals survive exactly.
    const Expression tiny = parse("0.1 + 1e-300 + 123456789.123456789");
    CHECK(parse(to_string(tiny)) == tiny);
}
