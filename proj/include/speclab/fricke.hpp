#pragma once

// Fricke coordinates of punctured/closed surface representations, certified
// Schottky samples and rep serialization.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "speclab/mobius.hpp"
#include "speclab/surface_group.hpp"

namespace speclab {

/// (a_i, c_i, d_i, a'_i, c'_i, d'_i) for 2 <= i <= g, then (e_j, g_j) for 1 <= j <= n.
struct FrickeVector {
  int genus = 1;
  int punctures = 1;
  std::vector<double> values;

  static std::size_t dimension(int genus, int punctures) {
    return static_cast<std::size_t>(6 * genus - 6 + 2 * punctures);
  }
  /// Throws DegenerateCoordinates on dimension or sign violations.
  void validate() const;
};

/// Disjoint boundary arcs (angles, counterclockwise from lo to hi) for one
/// generator X: X maps the complement of `minus` onto `plus`.
struct PingPongArcs {
  int generator = 0;
  double minus_lo = 0, minus_hi = 0;
  double plus_lo = 0, plus_hi = 0;
};

struct PingPongCertificate {
  std::vector<PingPongArcs> arcs;
  /// Arcs meet at endpoints (cusped samples) instead of being strictly disjoint.
  bool tangent = false;
  /// Smallest angular gap between distinct arcs (0 when tangent).
  double min_gap = 0;
};

struct Validity {
  double relator_defect = 0;
  bool all_hyperbolic_or_parabolic = false;
  bool punctures_parabolic = false;
  std::optional<PingPongCertificate> certificate;
};

struct SurfaceRep {
  Presentation presentation{1, 1};
  /// One matrix per generator of the presentation, in generator order.
  std::vector<Mat2d> generators;
  /// Exact entries when the rep is rational.
  std::optional<std::vector<Mat2q>> exact;
  Validity validity;

  /// The generators a word in the free basis may use.
  std::span<const Mat2d> basis() const {
    return std::span<const Mat2d>(generators).first(static_cast<std::size_t>(presentation.rank()));
  }
  bool is_exact() const { return exact.has_value(); }
};

/// Assembles a rep and fills its validity report.
SurfaceRep make_rep(const Presentation& p, std::vector<Mat2d> generators,
                    std::optional<PingPongCertificate> certificate = std::nullopt);
SurfaceRep make_exact_rep(const Presentation& p, std::vector<Mat2q> generators);

/// min(|R - I|, |R + I|) over entries, R the evaluated relator.
double relator_defect(const Presentation& p, std::span<const Mat2d> generators);

constexpr double kRelatorTolerance = 1e-8;

SurfaceRep rep_from_fricke(const FrickeVector& v);

/// Conjugates α1's repelling/attracting points and a fixed point of β1 to
/// 0, ∞, 1 and reads the coordinates off.
FrickeVector fricke_from_rep(const SurfaceRep& rep);

/// The normalizing conjugator used by fricke_from_rep.
Mat2d fricke_normalizer(const SurfaceRep& rep);

/// Conjugates every generator by h.
SurfaceRep conjugate_rep(const Mat2d& h, const SurfaceRep& rep);

struct SchottkyParams {
  enum class Mode { Funnel, Cusped };
  Mode mode = Mode::Funnel;
  /// Arc width as a fraction of its sector, drawn uniformly in this range.
  double min_width = 0.35;
  double max_width = 0.8;
  /// |log k| bound for the dilation of each side pairing.
  double max_log_dilation = 1.0;
  int max_retries = 100;
};

/// Presentation whose free basis has rank m: g = m / 2, n = m - 2g + 1.
Presentation schottky_presentation(int m);

/// Certified discrete free rep of rank m; deterministic in the seed.
/// Cusped mode needs m = 2 or 4 and yields a finite-area surface of genus m/2 with one cusp.
SurfaceRep schottky_sample(std::uint64_t seed, int m, const SchottkyParams& params = {});

/// Checks the arc certificate against the matrices; returns the largest
/// endpoint mismatch (angles), or +inf if an arc is mapped the wrong way.
double certificate_defect(const SurfaceRep& rep);

/// [[1,1],[1,2]], [[1,-1],[-1,2]] and the parabolic completing the relator.
SurfaceRep modular_torus();

/// Serialized document: {genus, punctures, vector, matrices, validity}.
std::string to_json(const SurfaceRep& rep);
std::string to_json(const FrickeVector& v);
/// Accepts either matrices (a rep) or only a vector (rebuilt via Fricke).
SurfaceRep rep_from_json(std::string_view text);

/// Stable 64-bit hex digest of the generator entries.
std::string rep_digest(const SurfaceRep& rep);

}  // namespace speclab
