#pragma once

#include <stdexcept>
#include <string>

namespace qst {

// Single exception type for the whole library. The code survives the
// extern-C boundary as the numeric status of the shared-library API.
class Error : public std::runtime_error {
 public:
  enum class Code {
    invalid_argument,
    dimension_mismatch,
    numeric,
    io,
    format,
    optimization,
  };

  Error(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Code code() const { return code_; }

 private:
  Code code_;
};

[[noreturn]] inline void fail(Error::Code code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace qst
