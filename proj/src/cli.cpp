#include "mcdcert/cli.hpp"

#include "mcdcert/certify.hpp"
#include "mcdcert/config.hpp"
#include "mcdcert/diameter.hpp"
#include "mcdcert/montecarlo.hpp"
#include "mcdcert/parallel.hpp"
#include "mcdcert/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace mcdcert {

namespace {

struct Flags {
    std::string config;
    double epsilon = 0.005;
    double margin = 0.0;
    double mean = 0.0;
    std::string direction = "two-sided";
    std::string method;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "table";
    std::size_t workers = 0;
    std::string bound_source;

    CLI::Option* epsilon_opt = nullptr;
    CLI::Option* margin_opt = nullptr;
    CLI::Option* mean_opt = nullptr;
    CLI::Option* direction_opt = nullptr;
    CLI::Option* method_opt = nullptr;
    CLI::Option* samples_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "Problem config file (JSON)")->required();
    f.epsilon_opt = cmd->add_option("--epsilon", f.epsilon, "Target probability of failure per side (default 0.005)");
    f.direction_opt = cmd->add_option("--direction", f.direction, "plus | minus | two-sided (default two-sided)");
    f.method_opt = cmd->add_option("--method", f.method, "vertex | grid:R | multistart:S,I");
    f.seed_opt = cmd->add_option("--seed", f.seed, "Random seed (default 0)");
    f.mean_opt = cmd->add_option("--mean", f.mean, "Known mean of F");
    f.samples_opt = cmd->add_option("--samples", f.samples, "Monte Carlo sample count");
    cmd->add_option("--out", f.out, "Write the structured report to this path");
    cmd->add_option("--format", f.format, "table | structured")->check(CLI::IsMember({"table", "structured"}));
    cmd->add_option("--workers", f.workers, "Worker threads (default: hardware parallelism)");
}

/// Flag values merged with config defaults.
struct Settings {
    double epsilon = 0.005;
    Direction direction = Direction::TwoSided;
    Method method;
    std::uint64_t seed = 0;
    std::optional<double> margin;
    std::optional<double> mean;
    std::size_t samples = 100000;
};

Settings resolve(const Flags& f, const ProblemConfig& cfg) {
    Settings s;
    const ProblemDefaults& d = cfg.defaults;
    s.epsilon = f.epsilon_opt->count() ? f.epsilon : d.epsilon.value_or(0.005);
    if (!(s.epsilon > 0.0 && s.epsilon < 1.0)) throw InvalidArgument("--epsilon must lie in (0, 1)");
    s.direction = f.direction_opt->count() ? parse_direction(f.direction) : d.direction.value_or(Direction::TwoSided);
    if (f.method_opt->count()) {
        s.method = parse_method(f.method);
    } else if (d.method) {
        s.method = parse_method(*d.method);
    } else {
        s.method = default_method(cfg.domain.size());
    }
    s.seed = f.seed_opt->count() ? f.seed : d.seed.value_or(0);
    if (f.margin_opt != nullptr && f.margin_opt->count()) {
        s.margin = f.margin;
    } else {
        s.margin = d.margin;
    }
    if (s.margin && !(*s.margin >= 0.0)) throw InvalidArgument("--margin must be nonnegative");
    s.mean = f.mean_opt->count() ? std::optional<double>(f.mean) : d.mean;
    s.samples = f.samples_opt->count() ? f.samples : d.samples.value_or(100000);
    return s;
}

std::string num(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

std::string point_str(const Point& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i > 0) s += ", ";
        s += num(p[i]);
    }
    return s + ")";
}

std::string opt_str(const std::optional<double>& v, int prec = 6) { return v ? num(*v, prec) : "undefined"; }

struct Run {
    const ProblemConfig& cfg;
    Settings s;
    std::size_t workers;
    ResponseFunction f;
    Json report;
    std::vector<std::string> notes;
};

DiameterEstimate run_estimate(Run& r) {
    EstimateOptions opt;
    opt.workers = r.workers;
    opt.assume_monotone = r.cfg.monotone;
    DiameterEstimate est = estimate(r.f, r.s.method, r.s.seed, opt);
    r.report["estimate"] = to_json(est);
    return est;
}

void print_estimate(std::ostream& out, const DiameterEstimate& e, const BoundsSummary& b) {
    out << "method: " << e.method.label() << " ("
        << (e.exactness == Exactness::Exact ? "exact" : "lower estimate") << "), evaluations: " << e.budget_used;
    if (!e.reliable) out << ", UNRELIABLE (" << e.failed_probes << "/" << e.probes << " probes failed)";
    out << "\n\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %12s %12s %14s %10s   %s\n", "input", "lo", "hi", "D_i", "f_i^2",
                  "witness x_i -> x_i'");
    out << line;
    for (std::size_t i = 0; i < e.diameters.size(); ++i) {
        const auto& in = e.domain[i];
        const auto& w = e.witnesses[i];
        const double fsq = b.fractions.empty() ? 0.0 : b.fractions[i] * b.fractions[i];
        const std::string wit = w.x.empty() ? "-" : num(w.x[i]) + " -> " + num(w.x_prime[i]) + " at " + point_str(w.x);
        std::snprintf(line, sizeof line, "%-12s %12s %12s %14s %10s   %s\n", in.name.c_str(), num(in.lo).c_str(),
                      num(in.hi).c_str(), num(e.diameters[i], 8).c_str(), num(fsq, 4).c_str(), wit.c_str());
        out << line;
    }
    out << "\nsum D_i = " << num(e.sum_diameters(), 8) << "   D_F = " << num(b.system_diam, 8)
        << "   n_eff = " << opt_str(b.n_eff, 6) << "   1/f_max^2 = " << opt_str(b.n_eff_cap, 6) << "\n";
    out << "F_min = " << num(e.f_min, 8) << " at " << point_str(e.argmin) << "\n";
    out << "F_max = " << num(e.f_max, 8) << " at " << point_str(e.argmax) << "\n";
    out << "Delta F = " << num(e.delta_f, 8) << "\n";
}

void print_bounds(std::ostream& out, const BoundsSummary& b) {
    out << "\nepsilon = " << num(b.epsilon) << " per side\n";
    out << "mean = " << num(b.mean, 8) << " (" << to_string(b.mean_source) << "), r_plus = " << num(b.r_plus)
        << ", r_minus = " << num(b.r_minus) << "\n";
    out << "absolute bounds: +" << num(b.abs_plus, 8) << " / -" << num(b.abs_minus, 8) << " (POF 0)\n";
    out << "McDiarmid bound B_F(epsilon) = " << num(b.mcdiarmid, 8) << "\n";
    out << "theorem lower bound = " << opt_str(b.theorem_lb, 8) << "\n";
}

void print_certification(std::ostream& out, const CertificationReport& c) {
    out << "\nmargin M = " << num(c.margin, 8) << ", direction " << to_string(c.direction) << "\n";
    out << "design point = " << num(c.design_point, 8) << ", U = " << num(c.uncertainty, 8)
        << ", confidence ratio M/U = " << opt_str(c.confidence_ratio) << "\n";
    out << "absolute:  requires " << num(c.required_absolute, 8) << "  -> " << (c.absolute_pass ? "pass" : "fail")
        << "\n";
    out << "McDiarmid: requires " << num(c.required_mcdiarmid, 8) << "  -> " << (c.mcdiarmid_pass ? "pass" : "fail")
        << "\n";
    out << "recommendation: " << to_string(c.recommendation);
    if (c.claimed_pof) {
        out << " (POF " << (*c.claimed_pof == 0.0 ? std::string("0") : "<= " + num(*c.claimed_pof)) << ")";
    } else {
        out << " (not certified)";
    }
    out << "\n";
    for (const auto& cv : c.caveats) out << "  note: " << cv << "\n";
}

void print_validation(std::ostream& out, const ValidationResult& v, std::string_view source) {
    out << "\nvalidation of the " << source << " bound " << num(v.bound_tested, 8) << " (" << to_string(v.direction)
        << ")\n";
    out << "samples = " << v.samples << ", mean_hat = " << num(v.mean_hat, 8) << " +/- " << num(v.se_mean, 3)
        << ", mean used = " << num(v.mean_used, 8) << "\n";
    out << "exceedances = " << v.exceed_count << " (" << num(v.exceed_frac) << ") vs POF " << num(v.pof_tested)
        << " + slack " << num(v.binomial_slack, 3) << " -> " << to_string(v.verdict) << "\n";
}

/// Mean of F: given, estimated when distributions are declared (or forced),
/// otherwise the midpoint assumption.
std::pair<std::optional<double>, MeanSource> resolve_mean(Run& r, const DiameterEstimate& e, bool force_estimate) {
    if (r.s.mean) {
        if (!(*r.s.mean >= e.f_min && *r.s.mean <= e.f_max)) {
            throw InvalidArgument("given mean lies outside the estimated range [F_min, F_max]");
        }
        return {r.s.mean, MeanSource::Given};
    }
    if (!r.cfg.distributions_given && !force_estimate) return {std::nullopt, MeanSource::Midpoint};
    const MeanEstimate m = estimate_mean(r.f, std::max<std::size_t>(r.s.samples, 2), derive_seed(r.s.seed, 1), r.workers);
    double mean = m.mean;
    if (mean < e.f_min || mean > e.f_max) {
        r.notes.push_back("estimated mean " + num(mean, 8) + " fell outside the estimated range and was clamped");
        mean = std::clamp(mean, e.f_min, e.f_max);
    }
    r.report["mean_estimate"] = Json{{"mean", m.mean}, {"standard_error", m.standard_error}, {"samples", m.samples}, {"failures", m.failures}};
    return {mean, MeanSource::Estimated};
}

Json settings_json(const Run& r) {
    Json j{{"epsilon", r.s.epsilon},
           {"direction", std::string(to_string(r.s.direction))},
           {"method", r.s.method.label()},
           {"seed", r.s.seed},
           {"samples", r.s.samples}};
    j["margin"] = r.s.margin ? Json(*r.s.margin) : Json(nullptr);
    j["mean"] = r.s.mean ? Json(*r.s.mean) : Json(nullptr);
    return j;
}

void emit(Run& r, const Flags& flags, std::ostream& out, const std::string& table) {
    if (!r.notes.empty()) r.report["notes"] = r.notes;
    const std::string structured = dump_structured(r.report);
    if (!flags.out.empty()) {
        std::ofstream file(flags.out, std::ios::binary);
        if (!file) throw ConfigError("cannot write report to '" + flags.out + "'");
        file << structured;
    }
    if (flags.format == "structured") {
        out << structured;
    } else {
        out << table;
        for (const auto& n : r.notes) out << "note: " << n << "\n";
    }
}

int cmd_diameters(Run& r, const Flags& flags, std::ostream& out) {
    const DiameterEstimate e = run_estimate(r);
    const BoundsSummary b = summarize(e.diameters, e.f_min, e.f_max, r.s.epsilon);
    r.report["bounds"] = to_json(b);
    std::ostringstream t;
    t << "problem: " << r.cfg.name << "\n";
    print_estimate(t, e, b);
    emit(r, flags, out, t.str());
    return kExitOk;
}

int cmd_certify(Run& r, const Flags& flags, std::ostream& out) {
    if (!r.s.margin) throw InvalidArgument("certify needs --margin (or defaults.margin in the config)");
    const DiameterEstimate e = run_estimate(r);
    const auto [mean, source] = resolve_mean(r, e, false);
    const CertificationReport c = certify(e, mean, *r.s.margin, r.s.epsilon, r.s.direction, source, r.cfg.name);
    r.report["certification"] = to_json(c);
    std::ostringstream t;
    t << "problem: " << r.cfg.name << "\n";
    print_estimate(t, e, c.summary);
    print_bounds(t, c.summary);
    print_certification(t, c);
    emit(r, flags, out, t.str());
    return c.certified() ? kExitOk : kExitNegative;
}

ValidationResult run_validation(Run& r, const DiameterEstimate& e, const std::string& source, BoundsSummary& b) {
    if (source != "absolute" && source != "mcdiarmid") {
        throw InvalidArgument("--bound-source must be absolute or mcdiarmid");
    }
    if (r.s.samples < 100) throw InvalidArgument("--samples must be at least 100");
    const auto [mean, msrc] = resolve_mean(r, e, true);
    b = summarize(e.diameters, e.f_min, e.f_max, r.s.epsilon, mean, msrc);
    if (source == "absolute") {
        return validate_bounds(r.f, *mean, b.abs_plus, b.abs_minus, r.s.epsilon, r.s.samples, r.s.seed,
                               r.s.direction, r.workers);
    }
    return validate_bound(r.f, *mean, b.mcdiarmid, r.s.epsilon, r.s.samples, r.s.seed, r.s.direction, r.workers);
}

int cmd_validate(Run& r, const Flags& flags, std::ostream& out) {
    if (r.s.samples < 100) throw InvalidArgument("--samples must be at least 100");
    const DiameterEstimate e = run_estimate(r);
    BoundsSummary b;
    const ValidationResult v = run_validation(r, e, flags.bound_source, b);
    r.report["bounds"] = to_json(b);
    r.report["validation"] = to_json(v);
    r.report["validation"]["bound_source"] = flags.bound_source;
    std::ostringstream t;
    t << "problem: " << r.cfg.name << "\n";
    print_estimate(t, e, b);
    print_bounds(t, b);
    print_validation(t, v, flags.bound_source);
    emit(r, flags, out, t.str());
    return v.verdict == Verdict::Consistent ? kExitOk : kExitNegative;
}

int cmd_analyze(Run& r, const Flags& flags, std::ostream& out) {
    const DiameterEstimate e = run_estimate(r);
    std::ostringstream t;
    t << "problem: " << r.cfg.name << "\n";

    int code = kExitOk;
    BoundsSummary b;
    std::optional<CertificationReport> c;
    if (r.s.margin) {
        const auto [mean, source] = resolve_mean(r, e, false);
        c = certify(e, mean, *r.s.margin, r.s.epsilon, r.s.direction, source, r.cfg.name);
        b = c->summary;
    } else {
        const auto [mean, source] = resolve_mean(r, e, false);
        b = summarize(e.diameters, e.f_min, e.f_max, r.s.epsilon, mean, source);
    }
    r.report["bounds"] = to_json(b);
    print_estimate(t, e, b);
    print_bounds(t, b);

    std::optional<double> fraction;
    if (r.s.margin && e.delta_f > 0.0 && *r.s.margin > 0.0 && *r.s.margin <= e.delta_f) {
        fraction = *r.s.margin / e.delta_f;
    }
    if (b.n_eff) {
        const UsefulnessAdvice a = usefulness_check(*b.n_eff, r.s.epsilon, fraction);
        r.report["usefulness"] = to_json(a);
        t << "\nadvisory: " << a.message << "\n";
    } else {
        r.report["usefulness"] = nullptr;
        t << "\nadvisory: every diameter is zero; F is constant over the box and any margin >= 0 certifies\n";
    }

    if (c) {
        r.report["certification"] = to_json(*c);
        print_certification(t, *c);
        code = c->certified() ? kExitOk : kExitNegative;
    }
    if (!flags.bound_source.empty()) {
        BoundsSummary vb;
        const ValidationResult v = run_validation(r, e, flags.bound_source, vb);
        r.report["validation"] = to_json(v);
        r.report["validation"]["bound_source"] = flags.bound_source;
        print_validation(t, v, flags.bound_source);
        if (v.verdict == Verdict::Violated) code = kExitNegative;
    }
    emit(r, flags, out, t.str());
    return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Concentration-of-measure margin certification: McDiarmid diameters, bounds and QMU verdicts",
                 "mcdcert"};
    app.require_subcommand(1);

    CLI::App* diam = app.add_subcommand("diameters", "Estimate McDiarmid diameters and the range of F");
    CLI::App* cert = app.add_subcommand("certify", "Certify a margin at a target probability of failure");
    CLI::App* val = app.add_subcommand("validate", "Check a bound against Monte Carlo sampling");
    CLI::App* ana = app.add_subcommand("analyze", "Diameters, bounds, usefulness advice, optional certification");
    Flags per[4];
    CLI::App* cmds[4] = {diam, cert, val, ana};
    for (int k = 0; k < 4; ++k) add_common(cmds[k], per[k]);
    per[1].margin_opt = cert->add_option("--margin", per[1].margin, "Margin M in units of F");
    per[3].margin_opt = ana->add_option("--margin", per[3].margin, "Margin M in units of F");
    val->add_option("--bound-source", per[2].bound_source, "absolute | mcdiarmid")
        ->required()
        ->check(CLI::IsMember({"absolute", "mcdiarmid"}));
    ana->add_option("--bound-source", per[3].bound_source, "Also validate this bound: absolute | mcdiarmid")
        ->check(CLI::IsMember({"absolute", "mcdiarmid"}));

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kExitUsage;
    }

    int which = 0;
    for (int k = 0; k < 4; ++k) {
        if (cmds[k]->parsed()) which = k;
    }
    Flags& f = per[which];

    try {
        const ProblemConfig cfg = load_config(f.config);
        Run run{cfg, resolve(f, cfg), resolve_workers(f.workers), make_function(cfg, f.workers), Json::object(), {}};
        run.report["tool"] = "mcdcert";
        run.report["command"] = cmds[which]->get_name();
        run.report["problem"] = cfg.name;
        run.report["settings"] = settings_json(run);
        switch (which) {
        case 0: return cmd_diameters(run, f, out);
        case 1: return cmd_certify(run, f, out);
        case 2: return cmd_validate(run, f, out);
        default: return cmd_analyze(run, f, out);
        }
    } catch (const EvaluationError& e) {
        err << "evaluation error: " << e.what() << "\n";
        return kExitEvaluation;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace mcdcert
