#pragma once

#include <stdexcept>
#include <string>

namespace stochspin {

enum class ErrorCategory {
  invalid_input,  // rejected argument or state
  numeric,        // overflow / non-finite values during integration
  config,         // bad configuration (including stability bounds)
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& what) : Error(ErrorCategory::invalid_input, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

}  // namespace stochspin
