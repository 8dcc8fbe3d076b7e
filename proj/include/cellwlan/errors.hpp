#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cellwlan {

// Bad user input: configuration fields, parameter ranges, malformed sets.
// `field` names the offending entry (e.g. "deployment.cells[2].channel").
class ValidationError : public std::invalid_argument
{
public:
  ValidationError(std::string field, const std::string& what)
    : std::invalid_argument(field.empty() ? what : field + ": " + what), field_(std::move(field)), message_(what)
  {
  }

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

private:
  std::string field_;
  std::string message_;
};

// Independent-set enumeration exceeded its configured state cap.
class StateSpaceTooLarge : public std::runtime_error
{
public:
  StateSpaceTooLarge(std::size_t cap, const std::string& what)
    : std::runtime_error(what), cap_(cap)
  {
  }

  std::size_t cap() const noexcept { return cap_; }

private:
  std::size_t cap_;
};

// An iterative solver ran out of iterations. Carries the last residual.
class ConvergenceError : public std::runtime_error
{
public:
  ConvergenceError(const std::string& what, double residual, int iterations)
    : std::runtime_error(what + " (residual " + std::to_string(residual) + " after "
                         + std::to_string(iterations) + " iterations)"),
      residual_(residual), iterations_(iterations)
  {
  }

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

private:
  double residual_;
  int iterations_;
};

// The model is undefined for the given inputs (e.g. a cell that is never in backoff).
class AnalysisError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace cellwlan
