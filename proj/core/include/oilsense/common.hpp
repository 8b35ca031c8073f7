#pragma once

#include <stdexcept>
#include <string>

namespace oilsense {

// Error taxonomy shared by the library and the CLI.  Each class maps to one
// process exit code so callers can tell configuration mistakes from data
// problems from numerical failures without parsing messages.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_config = 2,
  exit_schema = 3,
  exit_numeric = 4,
  exit_io = 5,
};

}  // namespace oilsense
