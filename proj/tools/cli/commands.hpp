#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gptcloak/design.hpp>

namespace gptcloak::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,        // computation error or nonconvergence
    kExitConfig = 2,         // bad flags or values
    kExitFile = 3,           // unreadable / malformed input, unwritable output
    kExitDegenerateFit = 4,
};

/// Rejected configuration; the message names the offending flag.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& field, const std::string& message);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct DesignConfig {
    int order = 0;
    std::string core = "free";
    std::optional<std::vector<double>> radii;
    std::filesystem::path out;
    SolverOptions solver;
};

struct GptConfig {
    std::filesystem::path structure;
    int k_max = 50;
    std::filesystem::path out;
};

struct DtnConfig {
    std::filesystem::path structure;
    double rho = 0.0;
    double s = 2.0;
    int k_max = 50;
    std::filesystem::path out;
};

struct DecayConfig {
    std::filesystem::path structure;
    std::vector<double> rho_list{0.1, 0.05, 0.025};
    double s = 2.0;
    int k_max = 50;
    std::filesystem::path out;
};

struct FieldConfig {
    std::filesystem::path structure;
    int mode = 1;
    double rho = 1.0;
    int grid = 201;
    std::filesystem::path out;
};

struct PushforwardConfig {
    std::filesystem::path structure;
    double rho = 0.0;
    int grid = 201;
    std::filesystem::path out;
};

CoreConstraint parse_core(const std::string& text);
std::vector<double> parse_list(const std::string& field, const std::string& text);

/// Path of the run report written next to a designed structure.
std::filesystem::path report_path(const std::filesystem::path& out);

int cmd_design(const DesignConfig& config, std::ostream& out, std::ostream& err);
int cmd_gpt(const GptConfig& config, std::ostream& out, std::ostream& err);
int cmd_dtn(const DtnConfig& config, std::ostream& out, std::ostream& err);
int cmd_decay(const DecayConfig& config, std::ostream& out, std::ostream& err);
int cmd_field(const FieldConfig& config, std::ostream& out, std::ostream& err);
int cmd_pushforward(const PushforwardConfig& config, std::ostream& out, std::ostream& err);

/// Full command line without the program name, e.g. {"gpt", "--structure", "a.json", ...}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gptcloak::cli
