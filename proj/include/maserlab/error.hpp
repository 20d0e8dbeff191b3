#pragma once

#include <stdexcept>
#include <string>

namespace maserlab {

/// Base of every exception thrown by the library.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A SystemParams / DerivedRates / DriveSpec field violates its invariant.
class invalid_parameter : public error {
public:
  using error::error;
};

/// Operation needs a masing steady state but the rates are not masing.
class not_masing : public error {
public:
  using error::error;
};

/// Operation is only defined in some operating regime (e.g. amplifying).
class regime_error : public error {
public:
  using error::error;
};

/// Spectrum requested at Omega = 0.
class zero_frequency_pole : public error {
public:
  using error::error;
};

/// Root finding / iteration / integration failed.
class numerical_failure : public error {
public:
  numerical_failure(const std::string& what, double residual = 0.0)
      : error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Jacobian requested at a point that is not a steady state.
class not_a_fixed_point : public error {
public:
  using error::error;
};

/// Bad or unknown configuration key/value.
class config_error : public error {
public:
  using error::error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw invalid_parameter(what);
}

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw invalid_parameter(std::string(name) + " must be strictly positive");
}

} // namespace detail
} // namespace maserlab
