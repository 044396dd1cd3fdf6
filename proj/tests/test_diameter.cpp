#include "mcdcert/diameter.hpp"
#include "mcdcert/error.hpp"
#include "support/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace mcdcert;

namespace {

ResponseFunction linear23() { return ResponseFunction(unit_box(2), std::make_shared<LinearBackend>(std::vector<double>{2, 3})); }

ResponseFunction product(std::size_t n) { return ResponseFunction(unit_box(n), std::make_shared<ProductBackend>()); }

BoxDomain random_box(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> lo(-2.0, 1.0), width(0.1, 3.0);
    std::vector<InputSpec> inputs;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = lo(rng);
        inputs.push_back({"x" + std::to_string(i + 1), a, a + width(rng)});
    }
    return BoxDomain(std::move(inputs));
}

void check_witnesses(const ResponseFunction& f, const DiameterEstimate& e) {
    for (std::size_t i = 0; i < e.diameters.size(); ++i) {
        const auto& w = e.witnesses[i];
        REQUIRE(w.x.size() == f.dimension());
        for (std::size_t k = 0; k < w.x.size(); ++k) {
            if (k != i) CHECK(w.x[k] == w.x_prime[k]);
        }
        const double again = std::fabs(f.eval_at(w.x) - f.eval_at(w.x_prime));
        CHECK(again == doctest::Approx(e.diameters[i]).epsilon(1e-9));
    }
    CHECK(f.eval_at(e.argmin) == e.f_min);
    CHECK(f.eval_at(e.argmax) == e.f_max);
    CHECK(e.delta_f == e.f_max - e.f_min);
}

}  // namespace

TEST_CASE("method labels parse back") {
    for (const char* s : {"vertex", "grid:5", "multistart:16,30"}) CHECK(parse_method(s).label() == s);
    CHECK_THROWS_AS(parse_method("grid:1"), InvalidArgument);
    CHECK_THROWS_AS(parse_method("grid:x"), InvalidArgument);
    CHECK_THROWS_AS(parse_method("multistart:3"), InvalidArgument);
    CHECK_THROWS_AS(parse_method("simplex"), InvalidArgument);
    CHECK(default_method(12) == Method::vertex());
    CHECK(default_method(13) == Method::multistart(16, 30));
}

TEST_CASE("vertex method on the reference functions") {
    SUBCASE("product on the unit cube") {
        const auto f = product(3);
        const auto e = estimate_vertex(f);
        CHECK(e.diameters == std::vector<double>{1, 1, 1});
        CHECK(e.delta_f == 1.0);
        CHECK(e.sum_diameters() == 3.0);
        CHECK(e.budget_used == 8);
        check_witnesses(f, e);
    }
    SUBCASE("linear 2 x1 + 3 x2") {
        const auto f = linear23();
        const auto e = estimate_vertex(f);
        CHECK(e.diameters == std::vector<double>{2, 3});
        CHECK(e.delta_f == 5.0);
        const auto truth = oracle::grid_pairs(f, 11);
        // Interior grid levels carry rounding; the oracle agrees to rounding error.
        CHECK(truth.diameters[0] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(truth.diameters[1] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(truth.f_max - truth.f_min == 5.0);
    }
    SUBCASE("constant") {
        const auto f = make_expression_function(unit_box(4), "7");
        const auto e = estimate_vertex(f);
        CHECK(e.diameters == std::vector<double>(4, 0.0));
        CHECK(e.delta_f == 0.0);
        CHECK(e.f_min == 7.0);
    }
    SUBCASE("exactness follows the monotone assertion") {
        CHECK(estimate_vertex(product(2)).exactness == Exactness::LowerEstimate);
        EstimateOptions opt;
        opt.assume_monotone = true;
        CHECK(estimate_vertex(product(2), opt).exactness == Exactness::Exact);
    }
    SUBCASE("limits and failures") {
        EstimateOptions opt;
        opt.vertex_limit = 3;
        CHECK_THROWS_AS(estimate_vertex(product(4), opt), LimitExceeded);
        const auto f = make_expression_function(unit_box(2), "log(x1) + x2");
        CHECK_THROWS_AS(estimate_vertex(f), EvaluationError);
    }
}

TEST_CASE("grid method") {
    SUBCASE("x1*x2 at resolution 2") {
        const auto e = estimate_grid(make_expression_function(unit_box(2), "x1*x2"), 2);
        CHECK(e.diameters == std::vector<double>{1, 1});
        CHECK(e.delta_f == 1.0);
        CHECK(e.exactness == Exactness::LowerEstimate);
    }
    SUBCASE("linear at resolution 3") {
        const auto e = estimate_grid(linear23(), 3);
        CHECK(e.diameters == std::vector<double>{2, 3});
    }
    SUBCASE("interior maximum found only by finer grids") {
        const auto f = make_expression_function(BoxDomain({{"x", -1, 1}}), "1 - x^2");
        CHECK(estimate_grid(f, 2).diameters[0] == 0.0);
        CHECK(estimate_grid(f, 3).diameters[0] == 1.0);
    }
    SUBCASE("budget") {
        EstimateOptions opt;
        opt.grid_budget = 100;
        CHECK_THROWS_AS(estimate_grid(product(3), 5, opt), LimitExceeded);
        CHECK_NOTHROW(estimate_grid(product(2), 10, opt));
        CHECK_THROWS_AS(estimate_grid(product(2), 1), InvalidArgument);
    }
}

TEST_CASE("grid method agrees with brute-force pair enumeration") {
    std::mt19937_64 rng(2024);
    oracle::ExpressionGenerator gen(77);
    for (int k = 0; k < 40; ++k) {
        const std::size_t n = 1 + k % 3;
        const std::string text = gen.generate(n, 3);
        const auto f = make_expression_function(random_box(n, rng), text);
        const std::size_t res = 2 + k % 4;
        const auto e = estimate_grid(f, res);
        const auto truth = oracle::grid_pairs(f, res);
        CHECK_MESSAGE(e.diameters == truth.diameters, text);
        CHECK(e.f_min == truth.f_min);
        CHECK(e.f_max == truth.f_max);
        check_witnesses(f, e);
    }
}

TEST_CASE("vertex method equals grid method at resolution 2") {
    std::mt19937_64 rng(5);
    oracle::ExpressionGenerator gen(6);
    for (int k = 0; k < 40; ++k) {
        const std::size_t n = 1 + k % 4;
        const auto f = make_expression_function(random_box(n, rng), gen.generate(n, 3));
        const auto v = estimate_vertex(f);
        const auto g = estimate_grid(f, 2);
        CHECK(v.diameters == g.diameters);
        CHECK(v.witnesses == g.witnesses);
        CHECK(v.f_min == g.f_min);
        CHECK(v.f_max == g.f_max);
        CHECK(v.argmin == g.argmin);
        CHECK(v.argmax == g.argmax);
    }
}

TEST_CASE("finer nested grids never lower an estimate") {
    std::mt19937_64 rng(8);
    oracle::ExpressionGenerator gen(9);
    for (int k = 0; k < 20; ++k) {
        const std::size_t n = 1 + k % 3;
        const auto f = make_expression_function(random_box(n, rng), gen.generate(n, 3));
        DiameterEstimate prev = estimate_grid(f, 2);
        for (std::size_t res : {3, 5, 9}) {
            const auto e = estimate_grid(f, res);
            for (std::size_t i = 0; i < n; ++i) CHECK(e.diameters[i] >= prev.diameters[i]);
            CHECK(e.delta_f >= prev.delta_f);
            prev = e;
        }
    }
}

TEST_CASE("multistart search") {
    SUBCASE("linear recovers the exact diameters for any seed") {
        for (std::uint64_t seed : {0ULL, 1ULL, 12345ULL, 0xdeadbeefULL}) {
            const auto f = linear23();
            const auto e = estimate_multistart(f, 8, 20, seed);
            CHECK(e.diameters[0] == doctest::Approx(2.0).epsilon(1e-6));
            CHECK(e.diameters[1] == doctest::Approx(3.0).epsilon(1e-6));
            CHECK(e.delta_f == doctest::Approx(5.0).epsilon(1e-6));
            CHECK(e.exactness == Exactness::LowerEstimate);
            check_witnesses(f, e);
        }
    }
    SUBCASE("constant gives exactly zero") {
        const auto e = estimate_multistart(make_expression_function(unit_box(3), "7"), 4, 10, 1);
        CHECK(e.diameters == std::vector<double>(3, 0.0));
        CHECK(e.delta_f == 0.0);
    }
    SUBCASE("product on the 5-cube") {
        const auto f = product(5);
        const auto e = estimate_multistart(f, 16, 30, 3);
        for (double d : e.diameters) CHECK(d >= 0.99);
        CHECK(e.delta_f >= 0.99);
        check_witnesses(f, e);
    }
    SUBCASE("interior extremum") {
        const auto f = make_expression_function(BoxDomain({{"x", -1, 1}, {"y", 0, 1}}), "(1 - x^2) * (1 + y)");
        const auto e = estimate_multistart(f, 8, 30, 4);
        CHECK(e.diameters[0] == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(e.f_max == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("result does not depend on the worker count") {
        const auto f1 = make_expression_function(unit_box(3), "sin(3*x1) * x2 + x3^2 * x1");
        const auto f2 = make_expression_function(unit_box(3), "sin(3*x1) * x2 + x3^2 * x1");
        EstimateOptions seq, par;
        seq.workers = 1;
        par.workers = 4;
        const auto a = estimate_multistart(f1, 6, 10, 21, seq);
        const auto b = estimate_multistart(f2, 6, 10, 21, par);
        CHECK(a.diameters == b.diameters);
        CHECK(a.witnesses == b.witnesses);
        CHECK(a.argmax == b.argmax);
        CHECK(a.budget_used == b.budget_used);
    }
    SUBCASE("more starts or sweeps never lower an estimate") {
        const auto f = make_expression_function(unit_box(3), "sin(5*x1*x2) + cos(4*x3) * x1");
        const auto base = estimate_multistart(f, 4, 5, 10);
        for (const auto& bigger : {estimate_multistart(f, 8, 5, 10), estimate_multistart(f, 4, 12, 10)}) {
            for (std::size_t i = 0; i < 3; ++i) CHECK(bigger.diameters[i] >= base.diameters[i]);
            CHECK(bigger.f_max >= base.f_max);
            CHECK(bigger.f_min <= base.f_min);
        }
    }
    SUBCASE("failing probes mark the estimate unreliable") {
        const auto f = make_expression_function(BoxDomain({{"x", -1, 1}, {"y", 0, 1}}), "log(x) + y");
        const auto e = estimate_multistart(f, 4, 10, 2);
        CHECK(e.failed_probes > 0);
        CHECK_FALSE(e.reliable);
        const auto ok = estimate_multistart(linear23(), 2, 5, 2);
        CHECK(ok.reliable);
        CHECK(ok.failed_probes == 0);
    }
    SUBCASE("argument checks") {
        CHECK_THROWS_AS(estimate_multistart(linear23(), 0, 5, 1), InvalidArgument);
        CHECK_THROWS_AS(estimate_multistart(linear23(), 1, 0, 1), InvalidArgument);
    }
}

TEST_CASE("merge takes coordinatewise extremes") {
    const auto f = make_expression_function(unit_box(2), "sin(3*x1) * x2");
    const auto v = estimate_vertex(f);
    const auto g = estimate_grid(f, 7);

    const auto same = merge(v, v);
    CHECK(same.diameters == v.diameters);
    CHECK(same.witnesses == v.witnesses);
    CHECK(same.f_min == v.f_min);
    CHECK(same.f_max == v.f_max);
    CHECK(same.method == v.method);

    const auto m = merge(v, g);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(m.diameters[i] >= v.diameters[i]);
        CHECK(m.diameters[i] >= g.diameters[i]);
    }
    CHECK(m.f_min <= std::min(v.f_min, g.f_min));
    CHECK(m.f_max >= std::max(v.f_max, g.f_max));
    CHECK(m.method.label() == "merged(vertex+grid:7)");
    check_witnesses(f, m);

    DiameterEstimate a = v, b = v;
    a.diameters = {1, 0};
    b.diameters = {0, 1};
    CHECK(merge(a, b).diameters == std::vector<double>{1, 1});

    const auto other = estimate_vertex(product(2));
    DiameterEstimate shifted = other;
    shifted.domain = BoxDomain({{"x1", 0, 2}, {"x2", 0, 1}});
    CHECK_THROWS_AS(merge(other, shifted), InvalidArgument);
}
