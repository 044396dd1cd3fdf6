#include "mcdcert/report.hpp"

#include "mcdcert/error.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace mcdcert {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_from(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

Json dist_to_json(const Distribution& d) {
    return std::visit(
        [](const auto& v) -> Json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return Json{{"type", "uniform"}};
            } else if constexpr (std::is_same_v<T, Triangular>) {
                return Json{{"type", "triangular"}, {"mode", v.mode}};
            } else {
                return Json{{"type", "point"}, {"value", v.value}};
            }
        },
        d);
}

Distribution dist_from_json(const Json& j) {
    const std::string type = j.is_string() ? j.get<std::string>() : j.at("type").get<std::string>();
    if (type == "uniform") return Uniform{};
    if (type == "triangular") return Triangular{j.at("mode").get<double>()};
    if (type == "point" || type == "point-mass") return PointMass{j.at("value").get<double>()};
    throw InvalidArgument("unknown distribution '" + type + "'");
}

Json method_to_json(const Method& m) {
    Json j{{"label", m.label()}};
    switch (m.kind) {
    case Method::Kind::Vertex: j["kind"] = "vertex"; break;
    case Method::Kind::Grid:
        j["kind"] = "grid";
        j["resolution"] = m.resolution;
        break;
    case Method::Kind::Multistart:
        j["kind"] = "multistart";
        j["starts"] = m.starts;
        j["iters"] = m.iters;
        break;
    case Method::Kind::Merged:
        j["kind"] = "merged";
        j["parts"] = m.merged_label;
        break;
    }
    return j;
}

Method method_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "vertex") return Method::vertex();
    if (kind == "grid") return Method::grid(j.at("resolution").get<std::size_t>());
    if (kind == "multistart") return Method::multistart(j.at("starts").get<std::size_t>(), j.at("iters").get<std::size_t>());
    if (kind == "merged") {
        Method m;
        m.kind = Method::Kind::Merged;
        m.merged_label = j.at("parts").get<std::string>();
        return m;
    }
    throw InvalidArgument("unknown method kind '" + kind + "'");
}

void write_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
    if (std::string_view(buf).find_first_of(".en") == std::string_view::npos) out += ".0";
}

void write(std::string& out, const Json& j, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += inner + Json(it.key()).dump() + ": ";
            write(out, it.value(), indent + 1);
        }
        out += "\n" + pad + "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // Numeric vectors stay on one line.
        bool scalars = true;
        for (const auto& e : j) scalars = scalars && e.is_primitive();
        if (scalars) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i > 0) out += ", ";
                write(out, j[i], indent + 1);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i > 0) out += ",\n";
            out += inner;
            write(out, j[i], indent + 1);
        }
        out += "\n" + pad + "]";
        return;
    }
    case Json::value_t::number_float: write_number(out, j.get<double>()); return;
    default: out += j.dump(); return;
    }
}

[[noreturn]] void invalid(const std::string& what) { throw InvalidArgument("report check failed: " + what); }

bool close_rel(double a, double b, double rel) { return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b)); }

}  // namespace

Json domain_to_json(const BoxDomain& d) {
    Json arr = Json::array();
    for (const auto& in : d.inputs()) {
        arr.push_back(Json{{"name", in.name}, {"min", in.lo}, {"max", in.hi}, {"dist", dist_to_json(in.dist)}});
    }
    return arr;
}

BoxDomain domain_from_json(const Json& j) {
    if (!j.is_array()) throw InvalidArgument("inputs must be an array");
    std::vector<InputSpec> inputs;
    for (const auto& e : j) {
        InputSpec in;
        in.name = e.at("name").get<std::string>();
        in.lo = e.at("min").get<double>();
        in.hi = e.at("max").get<double>();
        if (e.contains("dist")) in.dist = dist_from_json(e.at("dist"));
        inputs.push_back(std::move(in));
    }
    return BoxDomain(std::move(inputs));
}

Json to_json(const DiameterEstimate& e) {
    Json diams = Json::array();
    for (std::size_t i = 0; i < e.diameters.size(); ++i) {
        const auto& w = e.witnesses[i];
        diams.push_back(Json{{"name", e.domain[i].name},
                             {"D", e.diameters[i]},
                             {"witness",
                              Json{{"x", w.x}, {"x_prime", w.x_prime}, {"f_x", w.f_x}, {"f_x_prime", w.f_x_prime}}}});
    }
    return Json{{"method", method_to_json(e.method)},
                {"exactness", e.exactness == Exactness::Exact ? "exact" : "lower-estimate"},
                {"reliable", e.reliable},
                {"budget_used", e.budget_used},
                {"probes", e.probes},
                {"failed_probes", e.failed_probes},
                {"inputs", domain_to_json(e.domain)},
                {"diameters", diams},
                {"F_min", e.f_min},
                {"F_max", e.f_max},
                {"delta_F", e.delta_f},
                {"argmin", e.argmin},
                {"argmax", e.argmax}};
}

DiameterEstimate estimate_from_json(const Json& j) {
    DiameterEstimate e{domain_from_json(j.at("inputs")), {}, {}, 0, 0, 0, {}, {}, {}};
    for (const auto& d : j.at("diameters")) {
        e.diameters.push_back(d.at("D").get<double>());
        const auto& w = d.at("witness");
        e.witnesses.push_back(WitnessPair{w.at("x").get<Point>(), w.at("x_prime").get<Point>(),
                                          w.at("f_x").get<double>(), w.at("f_x_prime").get<double>()});
    }
    if (e.diameters.size() != e.domain.size()) throw InvalidArgument("diameter count does not match inputs");
    e.method = method_from_json(j.at("method"));
    e.exactness = j.at("exactness").get<std::string>() == "exact" ? Exactness::Exact : Exactness::LowerEstimate;
    e.reliable = j.at("reliable").get<bool>();
    e.budget_used = j.at("budget_used").get<std::uint64_t>();
    e.probes = j.at("probes").get<std::uint64_t>();
    e.failed_probes = j.at("failed_probes").get<std::uint64_t>();
    e.f_min = j.at("F_min").get<double>();
    e.f_max = j.at("F_max").get<double>();
    e.delta_f = j.at("delta_F").get<double>();
    e.argmin = j.at("argmin").get<Point>();
    e.argmax = j.at("argmax").get<Point>();
    return e;
}

Json to_json(const BoundsSummary& s) {
    Json fsq = Json::array();
    for (double f : s.fractions) fsq.push_back(f * f);
    return Json{{"diameters", s.diameters},
                {"D_F", s.system_diam},
                {"f", s.fractions},
                {"f_squared", fsq},
                {"f_max", optional_number(s.f_max)},
                {"n_eff", optional_number(s.n_eff)},
                {"n_eff_cap", optional_number(s.n_eff_cap)},
                {"F_min", s.f_min},
                {"F_max", s.f_max_value},
                {"delta_F", s.delta_f},
                {"mean", s.mean},
                {"mean_source", std::string(to_string(s.mean_source))},
                {"r_plus", s.r_plus},
                {"r_minus", s.r_minus},
                {"abs_plus", s.abs_plus},
                {"abs_minus", s.abs_minus},
                {"epsilon", s.epsilon},
                {"mcdiarmid_bound", s.mcdiarmid},
                {"theorem_lower_bound", optional_number(s.theorem_lb)},
                {"neff_required", s.neff_required}};
}

BoundsSummary bounds_from_json(const Json& j) {
    BoundsSummary s;
    s.diameters = j.at("diameters").get<std::vector<double>>();
    s.system_diam = j.at("D_F").get<double>();
    s.fractions = j.at("f").get<std::vector<double>>();
    s.f_max = optional_from(j, "f_max");
    s.n_eff = optional_from(j, "n_eff");
    s.n_eff_cap = optional_from(j, "n_eff_cap");
    s.f_min = j.at("F_min").get<double>();
    s.f_max_value = j.at("F_max").get<double>();
    s.delta_f = j.at("delta_F").get<double>();
    s.mean = j.at("mean").get<double>();
    const std::string src = j.at("mean_source").get<std::string>();
    s.mean_source = src == "midpoint" ? MeanSource::Midpoint : src == "estimated" ? MeanSource::Estimated : MeanSource::Given;
    s.r_plus = j.at("r_plus").get<double>();
    s.r_minus = j.at("r_minus").get<double>();
    s.abs_plus = j.at("abs_plus").get<double>();
    s.abs_minus = j.at("abs_minus").get<double>();
    s.epsilon = j.at("epsilon").get<double>();
    s.mcdiarmid = j.at("mcdiarmid_bound").get<double>();
    s.theorem_lb = optional_from(j, "theorem_lower_bound");
    s.neff_required = j.at("neff_required").get<double>();
    return s;
}

Json to_json(const CertificationReport& r) {
    return Json{{"problem", r.problem},
                {"direction", std::string(to_string(r.direction))},
                {"margin", r.margin},
                {"epsilon", r.epsilon},
                {"design_point", r.design_point},
                {"U", r.uncertainty},
                {"confidence_ratio", optional_number(r.confidence_ratio)},
                {"required_absolute", r.required_absolute},
                {"required_mcdiarmid", r.required_mcdiarmid},
                {"verdict_absolute", r.absolute_pass ? "pass" : "fail"},
                {"verdict_mcdiarmid", r.mcdiarmid_pass ? "pass" : "fail"},
                {"recommendation", std::string(to_string(r.recommendation))},
                {"claimed_pof", optional_number(r.claimed_pof)},
                {"caveats", r.caveats},
                {"summary", to_json(r.summary)}};
}

CertificationReport certification_from_json(const Json& j) {
    CertificationReport r;
    r.problem = j.at("problem").get<std::string>();
    r.direction = parse_direction(j.at("direction").get<std::string>());
    r.margin = j.at("margin").get<double>();
    r.epsilon = j.at("epsilon").get<double>();
    r.design_point = j.at("design_point").get<double>();
    r.uncertainty = j.at("U").get<double>();
    r.confidence_ratio = optional_from(j, "confidence_ratio");
    r.required_absolute = j.at("required_absolute").get<double>();
    r.required_mcdiarmid = j.at("required_mcdiarmid").get<double>();
    r.absolute_pass = j.at("verdict_absolute").get<std::string>() == "pass";
    r.mcdiarmid_pass = j.at("verdict_mcdiarmid").get<std::string>() == "pass";
    const std::string rec = j.at("recommendation").get<std::string>();
    r.recommendation = rec == "ABSOLUTE"    ? Recommendation::Absolute
                       : rec == "MCDIARMID" ? Recommendation::McDiarmid
                                            : Recommendation::Neither;
    r.claimed_pof = optional_from(j, "claimed_pof");
    r.caveats = j.at("caveats").get<std::vector<std::string>>();
    r.summary = bounds_from_json(j.at("summary"));
    return r;
}

Json to_json(const ValidationResult& v) {
    return Json{{"samples", v.samples},
                {"failures", v.failures},
                {"mean_hat", v.mean_hat},
                {"se_mean", v.se_mean},
                {"mean_used", v.mean_used},
                {"bound_tested", v.bound_tested},
                {"direction", std::string(to_string(v.direction))},
                {"exceed_count", v.exceed_count},
                {"exceed_frac", v.exceed_frac},
                {"epsilon", v.epsilon},
                {"pof_tested", v.pof_tested},
                {"binomial_slack", v.binomial_slack},
                {"verdict", std::string(to_string(v.verdict))}};
}

ValidationResult validation_from_json(const Json& j) {
    ValidationResult v;
    v.samples = j.at("samples").get<std::size_t>();
    v.failures = j.at("failures").get<std::size_t>();
    v.mean_hat = j.at("mean_hat").get<double>();
    v.se_mean = j.at("se_mean").get<double>();
    v.mean_used = j.at("mean_used").get<double>();
    v.bound_tested = j.at("bound_tested").get<double>();
    v.direction = parse_direction(j.at("direction").get<std::string>());
    v.exceed_count = j.at("exceed_count").get<std::size_t>();
    v.exceed_frac = j.at("exceed_frac").get<double>();
    v.epsilon = j.at("epsilon").get<double>();
    v.pof_tested = j.at("pof_tested").get<double>();
    v.binomial_slack = j.at("binomial_slack").get<double>();
    v.verdict = j.at("verdict").get<std::string>() == "violated" ? Verdict::Violated : Verdict::Consistent;
    return v;
}

Json to_json(const UsefulnessAdvice& a) {
    Json j{{"n_eff", a.n_eff}, {"epsilon", a.epsilon}, {"threshold", a.threshold}, {"useful", a.useful}};
    if (a.fraction) {
        j["fraction"] = *a.fraction;
        j["fraction_threshold"] = *a.fraction_threshold;
        j["fraction_useful"] = *a.fraction_useful;
    }
    j["message"] = a.message;
    return j;
}

std::string dump_structured(const Json& j) {
    std::string out;
    write(out, j, 0);
    out += '\n';
    return out;
}

void revalidate_report(const Json& report) {
    if (report.contains("estimate")) {
        const DiameterEstimate e = estimate_from_json(report.at("estimate"));
        if (!(e.delta_f >= 0.0) || e.delta_f != e.f_max - e.f_min) invalid("delta_F must equal F_max - F_min >= 0");
        for (std::size_t i = 0; i < e.diameters.size(); ++i) {
            const auto& w = e.witnesses[i];
            if (!(e.diameters[i] >= 0.0)) invalid("negative diameter");
            if (w.x.empty()) continue;
            for (std::size_t k = 0; k < w.x.size(); ++k) {
                if (k != i && w.x[k] != w.x_prime[k]) invalid("witness pair differs outside its coordinate");
            }
            if (!close_rel(std::fabs(w.f_x - w.f_x_prime), e.diameters[i], 1e-9)) {
                invalid("witness values do not reproduce D_" + std::to_string(i + 1));
            }
        }
    }
    auto check_bounds = [](const BoundsSummary& s) {
        double sq = 0.0;
        for (double d : s.diameters) sq += d * d;
        if (!close_rel(s.system_diam * s.system_diam, sq, 1e-12)) invalid("D_F^2 != sum D_i^2");
        if (s.r_plus + s.r_minus != 1.0) invalid("r_plus + r_minus != 1");
        if (s.n_eff) {
            const double n = static_cast<double>(s.diameters.size());
            if (*s.n_eff < 1.0 - 1e-12 || *s.n_eff > n * (1.0 + 1e-12)) invalid("n_eff outside [1, n]");
            if (s.n_eff_cap && *s.n_eff > *s.n_eff_cap) invalid("n_eff exceeds 1/f_max^2");
        }
        double sum = 0.0;
        for (double d : s.diameters) sum += d;
        // The lower bound only applies when Delta F <= sum D_i, which estimates need not satisfy.
        if (s.theorem_lb && s.delta_f <= sum && *s.theorem_lb > s.mcdiarmid * (1.0 + 1e-12)) {
            invalid("McDiarmid bound below its theorem lower bound");
        }
    };
    if (report.contains("bounds")) check_bounds(bounds_from_json(report.at("bounds")));
    if (report.contains("certification")) {
        const CertificationReport r = certification_from_json(report.at("certification"));
        check_bounds(r.summary);
        if ((r.recommendation == Recommendation::Neither) != (!r.absolute_pass && !r.mcdiarmid_pass)) {
            invalid("recommendation NEITHER must coincide with both verdicts failing");
        }
        if (r.absolute_pass != (r.margin >= r.required_absolute)) invalid("absolute verdict inconsistent with margin");
        if (r.mcdiarmid_pass != (r.margin >= r.required_mcdiarmid)) invalid("McDiarmid verdict inconsistent with margin");
        if (r.confidence_ratio && *r.confidence_ratio != r.margin / r.uncertainty) invalid("confidence ratio != M/U");
    }
    if (report.contains("validation")) {
        const ValidationResult v = validation_from_json(report.at("validation"));
        if (v.samples == 0 || v.exceed_frac != static_cast<double>(v.exceed_count) / static_cast<double>(v.samples)) {
            invalid("exceed_frac != exceed_count / samples");
        }
        const bool violated = v.exceed_frac > v.pof_tested + v.binomial_slack;
        if (violated != (v.verdict == Verdict::Violated)) invalid("verdict inconsistent with exceedance");
    }
}

}  // namespace mcdcert
