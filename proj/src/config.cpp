#include "mcdcert/config.hpp"

#include "mcdcert/report.hpp"

#include <fstream>
#include <sstream>

namespace mcdcert {

namespace {

FunctionSpec parse_function(const Json& j, std::size_t n) {
    FunctionSpec f;
    const std::string type = j.at("type").get<std::string>();
    if (type == "expression") {
        f.type = FunctionSpec::Type::Expression;
        f.text = j.at("text").get<std::string>();
    } else if (type == "command") {
        f.type = FunctionSpec::Type::Command;
        f.argv = j.at("argv").get<std::vector<std::string>>();
        if (f.argv.empty()) throw ConfigError("command function needs a nonempty argv");
    } else if (type == "builtin") {
        f.type = FunctionSpec::Type::Builtin;
        f.builtin = j.at("name").get<std::string>();
        if (f.builtin != "linear" && f.builtin != "product" && f.builtin != "interaction") {
            throw ConfigError("unknown builtin '" + f.builtin + "' (linear, product, interaction)");
        }
        f.weights = j.value("weights", std::vector<double>(n, 1.0));
        f.offset = j.value("offset", 0.0);
        f.coupling = j.value("coupling", 0.0);
        if (f.builtin != "product" && f.weights.size() != n) {
            throw ConfigError("builtin " + f.builtin + " needs one weight per input");
        }
    } else {
        throw ConfigError("unknown function type '" + type + "' (expression, command, builtin)");
    }
    return f;
}

ProblemDefaults parse_defaults(const Json& j) {
    ProblemDefaults d;
    if (j.contains("epsilon")) d.epsilon = j.at("epsilon").get<double>();
    if (j.contains("margin")) d.margin = j.at("margin").get<double>();
    if (j.contains("direction")) d.direction = parse_direction(j.at("direction").get<std::string>());
    if (j.contains("method")) d.method = j.at("method").get<std::string>();
    if (j.contains("seed")) d.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("mean")) d.mean = j.at("mean").get<double>();
    if (j.contains("samples")) d.samples = j.at("samples").get<std::size_t>();
    return d;
}

}  // namespace

ProblemConfig parse_config(std::string_view text) {
    try {
        const Json j = Json::parse(text);
        if (!j.is_object()) throw ConfigError("problem config must be an object");
        BoxDomain domain = domain_from_json(j.at("inputs"));
        bool dists = false;
        for (const auto& in : j.at("inputs")) dists = dists || in.contains("dist");
        FunctionSpec fn = parse_function(j.at("function"), domain.size());
        ProblemConfig cfg{j.value("name", std::string("problem")), std::move(domain), std::move(fn),
                          j.value("monotone", false), dists, {}};
        if (j.contains("defaults")) cfg.defaults = parse_defaults(j.at("defaults"));
        // Bind now so unknown variables and parse errors surface at load time.
        if (cfg.function.type == FunctionSpec::Type::Expression) (void)make_function(cfg, 1);
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("invalid problem config: ") + e.what());
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid problem config: ") + e.what());
    }
}

ProblemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ResponseFunction make_function(const ProblemConfig& config, std::size_t workers) {
    const FunctionSpec& fn = config.function;
    std::shared_ptr<const Backend> backend;
    switch (fn.type) {
    case FunctionSpec::Type::Expression: {
        const auto names = config.domain.names();
        backend = std::make_shared<ExpressionBackend>(expr::parse(fn.text), names);
        break;
    }
    case FunctionSpec::Type::Command: backend = std::make_shared<CommandBackend>(fn.argv, workers); break;
    case FunctionSpec::Type::Builtin:
        if (fn.builtin == "linear") {
            backend = std::make_shared<LinearBackend>(fn.weights, fn.offset);
        } else if (fn.builtin == "product") {
            backend = std::make_shared<ProductBackend>();
        } else {
            backend = std::make_shared<InteractionBackend>(fn.weights, fn.coupling);
        }
        break;
    }
    return ResponseFunction(config.domain, std::move(backend));
}

}  // namespace mcdcert
