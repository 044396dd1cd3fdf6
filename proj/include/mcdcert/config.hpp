#pragma once

#include "mcdcert/bounds.hpp"
#include "mcdcert/domain.hpp"
#include "mcdcert/error.hpp"
#include "mcdcert/response.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mcdcert {

/// Problem file could not be read or does not describe a valid problem.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct FunctionSpec {
    enum class Type { Expression, Command, Builtin };

    Type type = Type::Expression;
    std::string text;               // expression
    std::vector<std::string> argv;  // command
    std::string builtin;            // linear | product | interaction
    std::vector<double> weights;
    double offset = 0.0;
    double coupling = 0.0;
};

struct ProblemDefaults {
    std::optional<double> epsilon;
    std::optional<double> margin;
    std::optional<Direction> direction;
    std::optional<std::string> method;
    std::optional<std::uint64_t> seed;
    std::optional<double> mean;
    std::optional<std::size_t> samples;
};

struct ProblemConfig {
    std::string name;
    BoxDomain domain;
    FunctionSpec function;
    bool monotone = false;
    /// True when any input declares a sampling distribution explicitly.
    bool distributions_given = false;
    ProblemDefaults defaults;
};

/// Throws ConfigError.
ProblemConfig parse_config(std::string_view text);
ProblemConfig load_config(const std::filesystem::path& path);

ResponseFunction make_function(const ProblemConfig& config, std::size_t workers = 0);

}  // namespace mcdcert
