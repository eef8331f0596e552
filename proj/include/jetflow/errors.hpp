#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace jetflow {

// Typed failures carry a stable machine-readable code; the CLI maps code()
// straight into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define JETFLOW_DEFINE_ERROR(NAME, CODE)                          \
  class NAME : public Error {                                     \
   public:                                                        \
    explicit NAME(const std::string& what) : Error(CODE, what) {} \
  }

JETFLOW_DEFINE_ERROR(IdenticallyZeroError, "identically_zero_polynomial");
JETFLOW_DEFINE_ERROR(TooFewSamplesError, "too_few_samples");
JETFLOW_DEFINE_ERROR(BadEnergyLevelError, "bad_energy_level");
JETFLOW_DEFINE_ERROR(MaxStepsExceededError, "max_steps_exceeded");
JETFLOW_DEFINE_ERROR(NoHillIntervalError, "no_hill_interval");
JETFLOW_DEFINE_ERROR(ConstantAboveOneError, "constant_above_one");
JETFLOW_DEFINE_ERROR(CriticalEndpointError, "infinite_period_critical_pair");
JETFLOW_DEFINE_ERROR(UnboundedIntervalError, "unbounded_interval");
JETFLOW_DEFINE_ERROR(InvalidHillIntervalError, "invalid_hill_interval");
JETFLOW_DEFINE_ERROR(NotPositiveDefiniteError, "not_positive_definite");
JETFLOW_DEFINE_ERROR(SpanTooShortError, "span_too_short");

#undef JETFLOW_DEFINE_ERROR

}  // namespace jetflow
