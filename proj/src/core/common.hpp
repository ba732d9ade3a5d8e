#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mldfm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/* Error taxonomy mirrors the CLI exit-code contract: input/config problems
   map to exit 2, numerical/estimation failures to exit 3. */
class Error : public std::runtime_error {
 public:
  enum class Kind { argument, config, io, numeric, internal };

  Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

  static Error argument(const std::string& msg) { return Error(Kind::argument, msg); }
  static Error config(const std::string& msg) { return Error(Kind::config, msg); }
  static Error io(const std::string& msg) { return Error(Kind::io, msg); }
  static Error numeric(const std::string& msg) { return Error(Kind::numeric, msg); }
  static Error internal(const std::string& msg) { return Error(Kind::internal, msg); }

 private:
  Kind kind_;
};

/* Minimal stderr logger controlled by the MLDFM_LOG environment variable
   (error|warn|info|debug, default warn). */
enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level();
void log_message(LogLevel level, const std::string& msg);

inline void log_error(const std::string& msg) { log_message(LogLevel::error, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::warn, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) { log_message(LogLevel::debug, msg); }

}  // namespace mldfm
