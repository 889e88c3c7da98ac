#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbm2/app/config.hpp"

namespace qbm2::app {

enum class OutputFormat { Csv, Json };

struct CommandOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::size_t> stride;
    std::optional<double> threshold;
    OutputFormat format = OutputFormat::Csv;
    // oracle: fail with exit code 3 when the error exceeds the threshold.
    bool compare = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

// Raised by `oracle --compare` when the master equation misses the threshold.
class ThresholdExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Each command writes its data file(s) and `summary.json` into out_dir and
// returns the summary.
nlohmann::json cmd_coeffs(const RunConfig& cfg, const CommandOptions& opt);
nlohmann::json cmd_evolve(const RunConfig& cfg, const CommandOptions& opt);
nlohmann::json cmd_entangle(const RunConfig& cfg, const CommandOptions& opt);
nlohmann::json cmd_uncertainty(const RunConfig& cfg, const CommandOptions& opt);
nlohmann::json cmd_decohere(const RunConfig& cfg, const CommandOptions& opt);
nlohmann::json cmd_oracle(const RunConfig& cfg, const CommandOptions& opt);

const std::vector<std::string>& command_names();

// Dispatch with the exit-code contract: 0 success, 2 configuration error,
// 3 numerical or runtime failure. Failures write `error.json` into out_dir
// (when possible) and a one-line diagnostic to `err`.
int run_command(const std::string& name, const std::filesystem::path& config,
                const CommandOptions& opt, std::ostream& err);

}  // namespace qbm2::app
