#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lagspace {

// Malformed expression text; position is a 0-based byte offset into the input.
struct ParseError : std::runtime_error {
  ParseError(const std::string& message, std::size_t position_)
      : std::runtime_error(message), position(position_) {}
  std::size_t position;
};

// Evaluation left the domain of a partial function (log, sqrt, division,
// fractional powers of negatives), or a finite-difference stencil left the
// chart. The message names the offending subexpression.
struct EvalDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The fiber Hessian g_ij failed the regularity test |det g| > 1e-10 (max|g|)^n.
struct DegenerateLagrangian : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lagspace
