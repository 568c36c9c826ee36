#pragma once

#include <stdexcept>
#include <string>

namespace covfam {

enum class ErrorCode {
  kShapeMismatch,
  kNonFinite,
  kInvalidArgument,
  kSingularInput,    // polar factor not unique
  kRankDeficient,    // factor would lose full column rank
  kDegenerateCubic,  // constant polynomial, no root
  kIllConditioned,   // Sylvester operator (nearly) singular
  kCutLocus,         // a log map is not well defined
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace covfam
