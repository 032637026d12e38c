#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qoc {

using Complex = std::complex<double>;

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

// Raised when an input violates a documented invariant. The message names the
// violated invariant so the CLI can surface it verbatim.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

// Conversions from linear frequency to the internal rad/ns units.
inline constexpr double ghz_to_rad_per_ns(double ghz) { return kTwoPi * ghz; }
inline constexpr double mhz_to_rad_per_ns(double mhz) { return kTwoPi * mhz * 1e-3; }

}  // namespace qoc
