#pragma once

#include <stdexcept>
#include <string>

namespace fault_iso {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The ODE cannot be rewritten as a DAE (no K_X / K_Y within tolerance).
class InfeasibleConversion : public Error {
 public:
  using Error::Error;
};

/// Left null space of the lifted H matrix is empty at the requested degree.
class NoNullSpace : public Error {
 public:
  using Error::Error;
};

/// No null-space combination reaches the unit steady-state gain.
class GainUnreachable : public Error {
 public:
  using Error::Error;
};

/// Numerator degree exceeds the denominator degree, or a(q) is unusable.
class ImproperFilter : public Error {
 public:
  using Error::Error;
};

/// Regression window without excitation (V_n[e] <= epsilon).
class DegenerateWindow : public Error {
 public:
  using Error::Error;
};

}  // namespace fault_iso
