#pragma once

#include <stdexcept>
#include <string>

namespace taskred {

// Numeric values are part of the C API (see taskred.h) and must stay stable.
enum class ErrorCode : int {
  kConfiguration = 1,
  kUnsupported = 2,
  kPrecondition = 3,
  kTraining = 4,
  kUsage = 5,
  kValidation = 6,
  kIo = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define TASKRED_DEFINE_ERROR(Name, Code)                                  \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
  }

TASKRED_DEFINE_ERROR(ConfigurationError, kConfiguration);
TASKRED_DEFINE_ERROR(UnsupportedOperation, kUnsupported);
TASKRED_DEFINE_ERROR(PreconditionViolation, kPrecondition);
TASKRED_DEFINE_ERROR(TrainingError, kTraining);
TASKRED_DEFINE_ERROR(UsageError, kUsage);
TASKRED_DEFINE_ERROR(ValidationError, kValidation);
TASKRED_DEFINE_ERROR(IoError, kIo);

#undef TASKRED_DEFINE_ERROR

}  // namespace taskred
