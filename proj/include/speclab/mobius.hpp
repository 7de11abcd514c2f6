#pragma once

// SL2 linear algebra over an exact (GMP rational) or binary-float scalar,
// isometry classification and the boundary action on the circle.

#include <cmath>
#include <complex>
#include <iosfwd>
#include <numbers>
#include <utility>

#include <gmpxx.h>

#include "speclab/error.hpp"

namespace speclab {

using Rational = mpq_class;

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double to_double(double x) { return x; }
  static double abs(double x) { return std::fabs(x); }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static double to_double(const Rational& x) { return x.get_d(); }
  static Rational abs(const Rational& x) { return ::abs(x); }
};

template <class T>
concept Scalar = requires { ScalarTraits<T>::exact; };

/// Module-wide float tolerance.
inline constexpr double kEps = 1e-9;

template <Scalar T>
struct Mat2 {
  T a{1}, b{0}, c{0}, d{1};

  static Mat2 identity() { return {T(1), T(0), T(0), T(1)}; }
  static Mat2 diagonal(const T& lambda) { return {lambda, T(0), T(0), T(1) / lambda}; }

  T det() const { return a * d - b * c; }
  T trace() const { return a + d; }

  /// Inverse of a unimodular matrix (adjugate).
  Mat2 inverse() const { return {d, -b, -c, a}; }

  Mat2 operator-() const { return {-a, -b, -c, -d}; }

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }

  friend bool operator==(const Mat2& x, const Mat2& y) {
    return x.a == y.a && x.b == y.b && x.c == y.c && x.d == y.d;
  }
};

using Mat2d = Mat2<double>;
using Mat2q = Mat2<Rational>;

inline Mat2d to_double(const Mat2q& m) {
  return {m.a.get_d(), m.b.get_d(), m.c.get_d(), m.d.get_d()};
}

std::ostream& operator<<(std::ostream& os, const Mat2d& m);
std::ostream& operator<<(std::ostream& os, const Mat2q& m);

/// Sup norm of the entrywise difference.
double max_entry_diff(const Mat2d& x, const Mat2d& y);

/// Entrywise distance to the nearer of y and -y (PSL2 comparison).
double psl_distance(const Mat2d& x, const Mat2d& y);

/// PSL2 representative with tr >= 0 (leading nonzero entry positive when tr = 0).
template <Scalar T>
Mat2<T> psl_normalized(const Mat2<T>& m) {
  T tr = m.trace();
  bool flip = false;
  if (tr < 0) {
    flip = true;
  } else if (tr == 0) {
    const T& lead = m.a != 0 ? m.a : (m.b != 0 ? m.b : m.c);
    flip = lead < 0;
  }
  return flip ? -m : m;
}

/// Rescale a float matrix to unit determinant (det must be positive).
Mat2d unimodular(const Mat2d& m);

enum class IsometryClass { Identity, Hyperbolic, Parabolic, Elliptic };

const char* to_string(IsometryClass k);

template <Scalar T>
IsometryClass classify(const Mat2<T>& m) {
  if constexpr (ScalarTraits<T>::exact) {
    if (m.b == 0 && m.c == 0 && m.a == m.d) return IsometryClass::Identity;
    T tr2 = m.trace() * m.trace();
    if (tr2 > 4) return IsometryClass::Hyperbolic;
    if (tr2 < 4) return IsometryClass::Elliptic;
    return IsometryClass::Parabolic;
  } else {
    double excess = std::fabs(m.trace()) - 2.0;
    if (excess > kEps) return IsometryClass::Hyperbolic;
    if (excess < -kEps) return IsometryClass::Elliptic;
    double off = std::fmax(std::fabs(m.b), std::fmax(std::fabs(m.c), std::fabs(m.a - m.d)));
    return off <= kEps ? IsometryClass::Identity : IsometryClass::Parabolic;
  }
}

/// ℓ = 2 arccosh(|tr|/2); zero for parabolic and identity elements.
template <Scalar T>
double translation_length(const Mat2<T>& m) {
  switch (classify(m)) {
    case IsometryClass::Hyperbolic:
      return 2.0 * std::acosh(std::fabs(ScalarTraits<T>::to_double(m.trace())) / 2.0);
    case IsometryClass::Parabolic:
    case IsometryClass::Identity:
      return 0.0;
    case IsometryClass::Elliptic:
      break;
  }
  throw Error(Errc::EllipticElement, "no closed geodesic for an elliptic element");
}

/// Point of the circle at infinity, either on the extended real line of the
/// upper half-plane or as an angle on the unit circle.  The Cayley map
/// z -> (z - i)/(z + i) identifies the two; ∞ corresponds to angle 0.
class BoundaryPoint {
 public:
  enum class Model { HalfPlane, Disk };

  static BoundaryPoint real(double x) { return BoundaryPoint(Model::HalfPlane, x, false); }
  static BoundaryPoint infinity() { return BoundaryPoint(Model::HalfPlane, 0.0, true); }
  static BoundaryPoint angle(double theta);

  Model model() const { return model_; }
  bool is_infinity() const { return model_ == Model::HalfPlane && inf_; }
  /// Half-plane coordinate (model must be HalfPlane and finite).
  double value() const { return value_; }
  /// Angle in [0, 2π) (model must be Disk).
  double theta() const { return value_; }

  BoundaryPoint to_disk() const;
  BoundaryPoint to_half_plane() const;

  /// Unit complex number of the disk-model representative.
  std::complex<double> unit() const;

 private:
  BoundaryPoint(Model m, double v, bool inf) : model_(m), value_(v), inf_(inf) {}

  Model model_;
  double value_;
  bool inf_;
};

/// Angular distance on the circle, in [0, π].
double angular_distance(const BoundaryPoint& x, const BoundaryPoint& y);

/// (attracting, repelling) fixed points, in the half-plane model.
std::pair<BoundaryPoint, BoundaryPoint> fixed_points(const Mat2d& m);

/// Fractional-linear action.  The result uses the model of the argument.
BoundaryPoint act(const Mat2d& m, const BoundaryPoint& xi);

/// Coefficients (A, B) of the disk-model map w -> (A w + B)/(conj(B) w + conj(A)).
std::pair<std::complex<double>, std::complex<double>> disk_coefficients(const Mat2d& m);

/// Conformal derivative |m'(ξ)| on the unit circle.
double boundary_derivative(const Mat2d& m, const BoundaryPoint& xi);

/// Möbius map sending three distinct boundary points to (0, ∞, 1).  The
/// result may have negative determinant; it is scaled to |det| = 1.
Mat2d three_point_normalizer(const BoundaryPoint& to_zero, const BoundaryPoint& to_infinity,
                             const BoundaryPoint& to_one);

/// Conjugate h m h^{-1} for h with det ±1.
Mat2d conjugate(const Mat2d& h, const Mat2d& m);

}  // namespace speclab
