#pragma once

// Busemann cocycle, the cross term C(ξ, η) = -log(|ξ - η|^2 / 4) on the
// circle, and numerical checks of the identities relating them.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "speclab/fricke.hpp"
#include "speclab/mobius.hpp"
#include "speclab/surface_group.hpp"

namespace speclab {

/// Angular separation below which off-diagonal evaluations refuse to run.
constexpr double kSeparationFloor = 1e-6;

/// B(γ, ξ) = -log|γ'(ξ)| in the disk model; B(γ, γ+) = ℓ(γ).
double busemann(const Mat2d& g, const BoundaryPoint& xi);

/// C(ξ, η) = -log(|ξ - η|^2 / 4).  Throws CoincidentPoints below the floor.
double cross_term(const BoundaryPoint& xi, const BoundaryPoint& eta);

/// |C(γξ, γη) - C(ξ, η) - B(γ, ξ) - B(γ, η)|.
double pairing_check(const Mat2d& g, const BoundaryPoint& xi, const BoundaryPoint& eta);

/// ½[h(γx, γy, γz) - h(x, y, z)] with h(x, y, z) = C(x, y) + C(x, z) - C(y, z).
double recover_cocycle_from_C(const Mat2d& g, const BoundaryPoint& x, const BoundaryPoint& y,
                              const BoundaryPoint& z);

/// Angle -> value test function on the circle.
using CircleFunction = std::function<double(double)>;

/// |δ(η, γ+) - f(ηγ+, γ-) + f(γ+, γ-)| for δ = dφ and f(ξ, ζ) = φ(ξ) + φ(ζ).
double step1_identity_check(const CircleFunction& phi, const Mat2d& eta, const Mat2d& gamma);

/// max over n of |δ(ηγ^n, γ+) - δ(η, γ+)|.
double step1_paired_limit_check(const CircleFunction& phi, const Mat2d& eta, const Mat2d& gamma, int n_max);

struct NorthSouthRow {
  int n = 0;
  bool hyperbolic = false;
  /// Angular distances d((ηγ^n)+, ηγ+) and d((ηγ^n)-, γ-).
  double plus_distance = 0;
  double minus_distance = 0;
};

struct NorthSouthTable {
  std::vector<NorthSouthRow> rows;
  std::vector<int> skipped;
  /// e^{-ℓ(γ)}.
  double expected_ratio = 0;
  /// Geometric decay per step fitted on the clean part of each column
  /// (NaN if fewer than two usable rows).
  double plus_ratio = 0;
  double minus_ratio = 0;
  /// First n from which both distances stay below 1e-6 (0 if never).
  int converged_from = 0;
  double final_distance = 0;
  /// Non-increasing up to roundoff from n = 5 on.
  bool monotone = true;
};

NorthSouthTable northsouth_limits(const Mat2d& eta, const Mat2d& gamma, int n_max);

struct PullbackReport {
  std::size_t words = 0;
  std::size_t points = 0;
  double length_defect = 0;
  double coboundary_defect = 0;
};

/// β(γ, ξ) := B(hγh^{-1}, hξ).  Compares ℓ_β and ℓ_B on the words, and checks
/// β - B = dφ̂ at random points for φ̂ built from the triple differences.
PullbackReport pullback_cocycle_test(const SurfaceRep& rep, const Mat2d& h, std::span<const Word> words,
                                     std::uint64_t seed, int points);

struct CheckReport {
  std::string check;
  std::size_t samples = 0;
  double max_defect = 0;
  double tolerance = 0;
  bool pass = false;
};

std::string to_json(const CheckReport& r);

/// Random SL2 element with |tr| > 2.2.
Mat2d random_hyperbolic(CounterRng& rng);

/// Every boundary check over `samples` random configurations of the rep.
std::vector<CheckReport> cocycle_verify(const SurfaceRep& rep, std::uint64_t seed, int samples);

}  // namespace speclab
