#include "mcdcert/error.hpp"
#include "mcdcert/report.hpp"

#include <doctest.h>

#include "support/oracle.hpp"

#include <memory>

using namespace mcdcert;

namespace {

Json reparse(const Json& j) { return Json::parse(dump_structured(j)); }

}  // namespace

TEST_CASE("number formatting") {
    const Json j = {{"a", 0.1}, {"b", 1.0}, {"c", 3}, {"d", std::vector<double>{0.5, 2.0}}, {"e", "x"}};
    const std::string text = dump_structured(j);
    CHECK(text.find("0.10000000000000001") != std::string::npos);
    CHECK(text.find("\"b\": 1.0") != std::string::npos);
    CHECK(text.find("\"c\": 3") != std::string::npos);
    CHECK(text.find("[0.5, 2.0]") != std::string::npos);
    CHECK(text.back() == '\n');
    CHECK(Json::parse(text)["a"].get<double>() == 0.1);
}

TEST_CASE("domain round trip") {
    const BoxDomain d({InputSpec{"a", -1.0, 2.0, Uniform{}}, InputSpec{"b", 0.0, 1.0, Triangular{0.25}},
                       InputSpec{"c", 3.0, 4.0, PointMass{3.5}}});
    CHECK(domain_from_json(reparse(domain_to_json(d))) == d);
    const Json short_form = Json::array({{{"name", "x"}, {"min", 0}, {"max", 1}, {"dist", "uniform"}}});
    CHECK(domain_from_json(short_form).names()[0] == "x");
    CHECK_THROWS(domain_from_json(Json::array({{{"name", "x"}, {"min", 1}, {"max", 0}}})));
}

TEST_CASE("reports reparse to identical values") {
    oracle::ExpressionGenerator gen(17);
    for (int k = 0; k < 20; ++k) {
        const auto text = gen.generate(3, 3);
        const auto f = make_expression_function(unit_box(3, -1.0, 2.0), text);
        const auto est = estimate_grid(f, 5);
        const Json je = to_json(est);
        const Json je2 = to_json(estimate_from_json(reparse(je)));
        CHECK(dump_structured(je) == dump_structured(je2));

        const double mean = 0.5 * (est.f_min + est.f_max) + 0.1 * est.delta_f;
        const auto rep = certify(est, mean, 0.3 * est.delta_f, 0.01, Direction::TwoSided);
        const Json jc = to_json(rep);
        CHECK(dump_structured(jc) == dump_structured(to_json(certification_from_json(reparse(jc)))));
        const Json jb = to_json(rep.summary);
        CHECK(dump_structured(jb) == dump_structured(to_json(bounds_from_json(reparse(jb)))));

        const auto v = validate_bound(f, mean, rep.summary.mcdiarmid, 0.01, 500, 3, Direction::TwoSided);
        const Json jv = to_json(v);
        CHECK(dump_structured(jv) == dump_structured(to_json(validation_from_json(reparse(jv)))));

        const Json report = {{"estimate", je}, {"certification", jc}, {"validation", jv}};
        CHECK_NOTHROW(revalidate_report(reparse(report)));
    }
}

TEST_CASE("revalidation catches tampering") {
    const ResponseFunction f(unit_box(3), std::make_shared<ProductBackend>());
    const auto est = estimate_vertex(f);
    const auto rep = certify(est, std::nullopt, 0.6, 0.005, Direction::TwoSided);
    const Json good = reparse({{"estimate", to_json(est)}, {"certification", to_json(rep)}});
    REQUIRE_NOTHROW(revalidate_report(good));

    Json bad = good;
    bad["estimate"]["diameters"][0]["D"] = 0.5;
    CHECK_THROWS_AS(revalidate_report(bad), InvalidArgument);

    bad = good;
    bad["certification"]["verdict_absolute"] = "fail";
    CHECK_THROWS_AS(revalidate_report(bad), InvalidArgument);

    bad = good;
    bad["certification"]["summary"]["r_plus"] = 0.75;
    CHECK_THROWS_AS(revalidate_report(bad), InvalidArgument);
}
