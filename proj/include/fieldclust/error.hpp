#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fieldclust {

enum class ErrorKind {
  format,
  unsupported,
  empty_trace,
  parse,
  inconsistent_ground_truth,
  missing_message,
  empty_analysis,
  no_knee,
  evaluation_unavailable,
  io,
};

std::string_view to_string(ErrorKind kind);

// Recoverable failures raised by the pipeline stages. Contract violations
// (wrong lengths, out-of-range ranks) throw std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fieldclust
