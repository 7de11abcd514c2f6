#include "speclab/mobius.hpp"

#include <algorithm>
#include <ostream>

namespace speclab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

// Projective coordinates (x : y) of a half-plane boundary point.
std::pair<double, double> projective(const BoundaryPoint& p) {
  BoundaryPoint h = p.to_half_plane();
  if (h.is_infinity()) return {1.0, 0.0};
  return {h.value(), 1.0};
}

}  // namespace

std::ostream& operator<<(std::ostream& os, const Mat2d& m) {
  return os << "[[" << m.a << ", " << m.b << "], [" << m.c << ", " << m.d << "]]";
}

std::ostream& operator<<(std::ostream& os, const Mat2q& m) {
  return os << "[[" << m.a << ", " << m.b << "], [" << m.c << ", " << m.d << "]]";
}

double max_entry_diff(const Mat2d& x, const Mat2d& y) {
  return std::max({std::fabs(x.a - y.a), std::fabs(x.b - y.b), std::fabs(x.c - y.c),
                   std::fabs(x.d - y.d)});
}

double psl_distance(const Mat2d& x, const Mat2d& y) {
  return std::min(max_entry_diff(x, y), max_entry_diff(x, -y));
}

Mat2d unimodular(const Mat2d& m) {
  double det = m.det();
  if (!(det > 0)) throw Error(Errc::InvalidRepresentation, "matrix with non-positive determinant");
  double s = 1.0 / std::sqrt(det);
  return {m.a * s, m.b * s, m.c * s, m.d * s};
}

const char* to_string(IsometryClass k) {
  switch (k) {
    case IsometryClass::Identity: return "Identity";
    case IsometryClass::Hyperbolic: return "Hyperbolic";
    case IsometryClass::Parabolic: return "Parabolic";
    case IsometryClass::Elliptic: return "Elliptic";
  }
  return "?";
}

BoundaryPoint BoundaryPoint::angle(double theta) {
  return BoundaryPoint(Model::Disk, wrap_angle(theta), false);
}

BoundaryPoint BoundaryPoint::to_disk() const {
  if (model_ == Model::Disk) return *this;
  if (inf_) return angle(0.0);
  // (x - i)/(x + i) = ((x^2 - 1) - 2ix)/(x^2 + 1)
  double x = value_;
  return angle(std::atan2(-2.0 * x, x * x - 1.0));
}

BoundaryPoint BoundaryPoint::to_half_plane() const {
  if (model_ == Model::HalfPlane) return *this;
  if (value_ == 0.0) return infinity();
  // x = i(1 + w)/(1 - w) = -cot(θ/2)
  double half = value_ / 2.0;
  return real(-std::cos(half) / std::sin(half));
}

std::complex<double> BoundaryPoint::unit() const {
  BoundaryPoint p = to_disk();
  return std::polar(1.0, p.value_);
}

double angular_distance(const BoundaryPoint& x, const BoundaryPoint& y) {
  double d = std::fabs(x.to_disk().theta() - y.to_disk().theta());
  return std::min(d, kTwoPi - d);
}

std::pair<BoundaryPoint, BoundaryPoint> fixed_points(const Mat2d& m) {
  if (classify(unimodular(m)) != IsometryClass::Hyperbolic)
    throw Error(Errc::NotHyperbolic, "fixed_points needs a hyperbolic element");
  if (m.c == 0.0) {
    // z -> (a/d) z + b/d: one fixed point at ∞, the other at b/(d - a).
    BoundaryPoint finite = BoundaryPoint::real(m.b / (m.d - m.a));
    if (std::fabs(m.a) > std::fabs(m.d)) return {BoundaryPoint::infinity(), finite};
    return {finite, BoundaryPoint::infinity()};
  }
  // c ξ^2 + (d - a) ξ - b = 0, solved without cancellation.
  double qa = m.c, qb = m.d - m.a, qc = -m.b;
  double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
  double q = -0.5 * (qb + std::copysign(disc, qb));
  double r1 = q / qa;
  double r2 = q != 0.0 ? qc / q : -qb / qa - r1;
  // The attracting point has the larger |c ξ + d| (derivative 1/(cξ+d)^2).
  if (std::fabs(m.c * r1 + m.d) >= std::fabs(m.c * r2 + m.d))
    return {BoundaryPoint::real(r1), BoundaryPoint::real(r2)};
  return {BoundaryPoint::real(r2), BoundaryPoint::real(r1)};
}

std::pair<std::complex<double>, std::complex<double>> disk_coefficients(const Mat2d& m) {
  std::complex<double> big(0.5 * (m.a + m.d), 0.5 * (m.b - m.c));
  std::complex<double> small(0.5 * (m.a - m.d), -0.5 * (m.b + m.c));
  return {big, small};
}

BoundaryPoint act(const Mat2d& m, const BoundaryPoint& xi) {
  if (xi.model() == BoundaryPoint::Model::HalfPlane) {
    if (xi.is_infinity()) {
      if (m.c == 0.0) return BoundaryPoint::infinity();
      return BoundaryPoint::real(m.a / m.c);
    }
    double x = xi.value();
    double den = m.c * x + m.d;
    if (den == 0.0) return BoundaryPoint::infinity();
    return BoundaryPoint::real((m.a * x + m.b) / den);
  }
  auto [big, small] = disk_coefficients(m);
  std::complex<double> w = xi.unit();
  std::complex<double> image = (big * w + small) / (std::conj(small) * w + std::conj(big));
  return BoundaryPoint::angle(std::arg(image));
}

double boundary_derivative(const Mat2d& m, const BoundaryPoint& xi) {
  auto [big, small] = disk_coefficients(m);
  double den = std::abs(std::conj(small) * xi.unit() + std::conj(big));
  return 1.0 / (den * den);
}

Mat2d three_point_normalizer(const BoundaryPoint& to_zero, const BoundaryPoint& to_infinity,
                             const BoundaryPoint& to_one) {
  auto [x1, y1] = projective(to_zero);
  auto [x2, y2] = projective(to_infinity);
  auto [x3, y3] = projective(to_one);
  double l1 = x3 * y1 - y3 * x1;
  double l2 = x3 * y2 - y3 * x2;
  Mat2d h{y1 * l2, -x1 * l2, y2 * l1, -x2 * l1};
  double det = h.det();
  if (det == 0.0) throw Error(Errc::DegenerateConfiguration, "three_point_normalizer: points not distinct");
  double s = 1.0 / std::sqrt(std::fabs(det));
  return {h.a * s, h.b * s, h.c * s, h.d * s};
}

Mat2d conjugate(const Mat2d& h, const Mat2d& m) {
  double det = h.det();
  Mat2d inv{h.d / det, -h.b / det, -h.c / det, h.a / det};
  return h * m * inv;
}

}  // namespace speclab
