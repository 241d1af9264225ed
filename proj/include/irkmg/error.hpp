#pragma once

#include <stdexcept>
#include <string>

namespace irkmg
{

/// Raised for out-of-range or inconsistent user-facing parameters.
class InvalidParameter : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a linear or nonlinear solve cannot meet its contract.
class SolverFailure : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a dense patch or coarse matrix is numerically singular.
class SingularMatrix : public SolverFailure
{
public:
  using SolverFailure::SolverFailure;
};

inline void require(bool cond, const std::string &msg)
{
  if (!cond)
  {
    throw InvalidParameter(msg);
  }
}

}  // namespace irkmg
