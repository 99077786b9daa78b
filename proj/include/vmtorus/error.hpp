#pragma once

#include <stdexcept>
#include <string>

namespace vmtorus {

enum class ErrorKind {
  kInvalidArgument,
  kDegenerateDirection,
  kDegenerateCorrelation,
  kDegenerateSubsample,
  kStrategyInvalid,
  kStepFailure,
  kEstimationFailure,
  kParse,
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, const std::string& what,
                    ErrorKind kind = ErrorKind::kInvalidArgument) {
  if (!condition) throw Error(kind, what);
}

}  // namespace vmtorus
