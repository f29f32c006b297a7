#pragma once

#include <stdexcept>
#include <string>

namespace qfam {

enum class ErrorKind {
  invalid_argument,
  undefined_valuation,
  cannot_certify,        // factorization incomplete where a certified result is required
  not_a_unit,
  no_embedding,          // p inert, ramified, or divides the radicand
  precision_exhausted,
  precondition_violated,
  too_large,             // configured ceiling exceeded
  defect,                // a theorem-guaranteed check computed false
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::undefined_valuation: return "undefined-valuation";
    case ErrorKind::cannot_certify: return "cannot-certify";
    case ErrorKind::not_a_unit: return "not-a-unit";
    case ErrorKind::no_embedding: return "no-embedding";
    case ErrorKind::precision_exhausted: return "precision-exhausted";
    case ErrorKind::precondition_violated: return "precondition-violated";
    case ErrorKind::too_large: return "too-large";
    case ErrorKind::defect: return "defect";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace qfam
