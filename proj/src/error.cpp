#include "fieldclust/error.hpp"

namespace fieldclust {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::format: return "format";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::empty_trace: return "empty-trace";
    case ErrorKind::parse: return "parse";
    case ErrorKind::inconsistent_ground_truth: return "inconsistent-ground-truth";
    case ErrorKind::missing_message: return "missing-message";
    case ErrorKind::empty_analysis: return "empty-analysis";
    case ErrorKind::no_knee: return "no-knee";
    case ErrorKind::evaluation_unavailable: return "evaluation-unavailable";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace fieldclust
