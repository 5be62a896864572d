#pragma once

#include <stdexcept>
#include <string>

namespace mbt {

enum class ErrorKind {
  kParameter,        // invalid group parameters or out-of-group element
  kInvalidSource,    // collision source digest does not verify
  kBranch,           // unknown branch id
  kReturningPatient, // new-patient block requested for a patient already on the tree
  kNoOrigin,         // collision requested for a patient with no block
  kCrypto,           // a freshly produced digest failed verification
  kConflict,         // duplicate store index
  kRejected,         // collision block failed validation
  kConfig,           // simulation or experiment configuration rejected
  kFormat,           // malformed encoding or file
  kIo,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kInvalidSource: return "invalid-source";
    case ErrorKind::kBranch: return "branch";
    case ErrorKind::kReturningPatient: return "returning-patient";
    case ErrorKind::kNoOrigin: return "no-origin";
    case ErrorKind::kCrypto: return "crypto";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kRejected: return "rejected";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mbt
