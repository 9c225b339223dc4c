#pragma once

#include <json.hpp>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hadamard::cli {

inline constexpr const char* kVersion = "0.1.0";

// Anything wrong with the configuration itself (exit 2) rather than with the check.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kConfigError = 2 };

// args excludes the program name. Reports go to `out` unless --out names a directory.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// The dispatch behind run(): config is the merged file + flag settings for one subcommand.
struct Report {
  nlohmann::json json;
  bool pass = false;
  std::string failure;  // failing slack or reason when !pass
};
Report execute(const std::string& command, const nlohmann::json& config, const std::string& csv_path);

const std::vector<std::string>& commands();

}  // namespace hadamard::cli
