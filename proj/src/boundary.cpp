#include "speclab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "speclab/characters.hpp"
#include "speclab/json_writer.hpp"
#include "speclab/rng.hpp"

namespace speclab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPoleLengthCap = 12.0;

double angle_of(const BoundaryPoint& p) { return p.to_disk().theta(); }

BoundaryPoint random_point(CounterRng& rng) { return BoundaryPoint::angle(rng.uniform(0.0, kTwoPi)); }

bool separated(const BoundaryPoint& x, const BoundaryPoint& y) {
  return angular_distance(x, y) >= kSeparationFloor;
}

// Fixed points of a projectively scaled matrix with known determinant
// (attracting, repelling), or nothing if it is not hyperbolic.
std::optional<std::pair<BoundaryPoint, BoundaryPoint>> scaled_fixed_points(const Mat2d& m, double det) {
  double tr = m.trace();
  double disc2 = tr * tr - 4.0 * det;
  if (!(disc2 > 4.0 * det * 1e-9)) return std::nullopt;
  if (m.c == 0.0) {
    BoundaryPoint finite = BoundaryPoint::real(m.b / (m.d - m.a));
    if (std::fabs(m.a) > std::fabs(m.d)) return std::pair{BoundaryPoint::infinity(), finite};
    return std::pair{finite, BoundaryPoint::infinity()};
  }
  double qa = m.c, qb = m.d - m.a, qc = -m.b;
  double q = -0.5 * (qb + std::copysign(std::sqrt(disc2), qb));
  double r1 = q / qa;
  double r2 = q != 0.0 ? qc / q : -qb / qa - r1;
  if (std::fabs(m.c * r1 + m.d) >= std::fabs(m.c * r2 + m.d))
    return std::pair{BoundaryPoint::real(r1), BoundaryPoint::real(r2)};
  return std::pair{BoundaryPoint::real(r2), BoundaryPoint::real(r1)};
}

Word sample_word(CounterRng& rng, const SurfaceRep& rep, int max_len) {
  return random_reduced_word(rng, rep.presentation.rank(), 1, max_len);
}

// Cyclically reduced, so traces carry no conjugation cancellation.
Word sample_cyclic_word(CounterRng& rng, const SurfaceRep& rep, int max_len) {
  for (;;) {
    Word w = least_rotation(sample_word(rng, rep, max_len));
    if (!w.empty()) return w;
  }
}

Mat2d eval(const SurfaceRep& rep, const Word& w) {
  return evaluate<double>(w, std::span<const Mat2d>(rep.generators));
}

}  // namespace

double busemann(const Mat2d& g, const BoundaryPoint& xi) {
  auto [big, small] = disk_coefficients(g);
  std::complex<double> w = xi.unit();
  std::complex<double> z = std::conj(small) * w + std::conj(big);
  return 2.0 * std::log(std::abs(z));
}

double cross_term(const BoundaryPoint& xi, const BoundaryPoint& eta) {
  double sep = angular_distance(xi, eta);
  if (sep < kSeparationFloor) throw Error(Errc::CoincidentPoints, "cross term at coincident points");
  // |ξ - η| = 2 sin(Δθ / 2).
  return -2.0 * std::log(std::sin(0.5 * sep));
}

double pairing_check(const Mat2d& g, const BoundaryPoint& xi, const BoundaryPoint& eta) {
  double lhs = cross_term(act(g, xi.to_disk()), act(g, eta.to_disk())) - cross_term(xi, eta);
  return std::fabs(lhs - busemann(g, xi) - busemann(g, eta));
}

double recover_cocycle_from_C(const Mat2d& g, const BoundaryPoint& x, const BoundaryPoint& y,
                              const BoundaryPoint& z) {
  auto h = [](const BoundaryPoint& p, const BoundaryPoint& q, const BoundaryPoint& r) {
    return cross_term(p, q) + cross_term(p, r) - cross_term(q, r);
  };
  auto gx = act(g, x.to_disk()), gy = act(g, y.to_disk()), gz = act(g, z.to_disk());
  return 0.5 * (h(gx, gy, gz) - h(x, y, z));
}

double step1_identity_check(const CircleFunction& phi, const Mat2d& eta, const Mat2d& gamma) {
  auto [plus, minus] = fixed_points(gamma);
  BoundaryPoint eta_plus = act(eta, plus.to_disk());
  if (!separated(eta_plus, minus))
    throw Error(Errc::DegenerateConfiguration, "eta maps gamma+ onto gamma-");
  double p = angle_of(plus), m = angle_of(minus), ep = angle_of(eta_plus);
  double delta = phi(ep) - phi(p);
  double f_moved = phi(ep) + phi(m);
  double f_base = phi(p) + phi(m);
  return std::fabs(delta - f_moved + f_base);
}

double step1_paired_limit_check(const CircleFunction& phi, const Mat2d& eta, const Mat2d& gamma, int n_max) {
  auto [plus, minus] = fixed_points(gamma);
  BoundaryPoint p = plus.to_disk();
  double base = phi(angle_of(act(eta, p))) - phi(angle_of(p));
  double worst = 0;
  Mat2d power = Mat2d::identity();
  for (int n = 1; n <= n_max; ++n) {
    power = power * gamma;
    double s = std::max({std::fabs(power.a), std::fabs(power.b), std::fabs(power.c), std::fabs(power.d)});
    power = {power.a / s, power.b / s, power.c / s, power.d / s};
    Mat2d moved = eta * power;
    double delta = phi(angle_of(act(moved, p))) - phi(angle_of(p));
    worst = std::max(worst, std::fabs(delta - base));
  }
  return worst;
}

NorthSouthTable northsouth_limits(const Mat2d& eta, const Mat2d& gamma, int n_max) {
  NorthSouthTable t;
  auto [plus, minus] = fixed_points(gamma);
  BoundaryPoint target_plus = act(eta, plus.to_disk());
  BoundaryPoint target_minus = minus.to_disk();
  t.expected_ratio = std::exp(-translation_length(gamma));
  Mat2d power = Mat2d::identity();
  double log_det_power = 0;  // log det of the scaled power
  double det_eta = eta.det(), det_gamma = gamma.det();
  for (int n = 1; n <= n_max; ++n) {
    power = power * gamma;
    log_det_power += std::log(det_gamma);
    double s = std::max({std::fabs(power.a), std::fabs(power.b), std::fabs(power.c), std::fabs(power.d)});
    power = {power.a / s, power.b / s, power.c / s, power.d / s};
    log_det_power -= 2.0 * std::log(s);
    Mat2d m = eta * power;
    double det = det_eta * std::exp(log_det_power);
    auto fp = scaled_fixed_points(m, det);
    if (!fp) {
      t.skipped.push_back(n);
      continue;
    }
    NorthSouthRow row;
    row.n = n;
    row.hyperbolic = true;
    row.plus_distance = angular_distance(fp->first, target_plus);
    row.minus_distance = angular_distance(fp->second, target_minus);
    t.rows.push_back(row);
  }
  // Below this the distances are roundoff in the targets themselves.
  const double noise = 1e-10;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    bool below = r.plus_distance < 1e-6 && r.minus_distance < 1e-6;
    if (below && t.converged_from == 0) t.converged_from = r.n;
    if (!below) t.converged_from = 0;
    if (i > 0 && r.n > 5) {
      const auto& prev = t.rows[i - 1];
      if ((prev.plus_distance > noise && r.plus_distance > prev.plus_distance) ||
          (prev.minus_distance > noise && r.minus_distance > prev.minus_distance))
        t.monotone = false;
    }
  }
  if (!t.rows.empty()) t.final_distance = std::max(t.rows.back().plus_distance, t.rows.back().minus_distance);
  auto fit = [&](auto member) {
    std::vector<double> logs;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      const auto &a = t.rows[i - 1], &b = t.rows[i];
      double x = a.*member, y = b.*member;
      if (a.n < 2 || b.n != a.n + 1 || x > 1e-2 || y < noise) continue;
      logs.push_back(std::log(y / x));
    }
    if (logs.empty()) return kNaN;
    std::sort(logs.begin(), logs.end());
    std::size_t k = logs.size() / 2;
    double median = logs.size() % 2 ? logs[k] : 0.5 * (logs[k - 1] + logs[k]);
    return std::exp(median);
  };
  t.plus_ratio = fit(&NorthSouthRow::plus_distance);
  t.minus_ratio = fit(&NorthSouthRow::minus_distance);
  return t;
}

PullbackReport pullback_cocycle_test(const SurfaceRep& rep, const Mat2d& h, std::span<const Word> words,
                                     std::uint64_t seed, int points) {
  if (!(std::fabs(h.det()) > 0)) throw Error(Errc::InvalidRepresentation, "conjugator must be invertible");
  Mat2d hu = h.det() > 0 ? unimodular(h) : h;
  Mat2d h_inv = hu.inverse();
  if (hu.det() < 0) h_inv = {-h_inv.a, -h_inv.b, -h_inv.c, -h_inv.d};
  auto beta = [&](const Mat2d& g, const BoundaryPoint& xi) {
    return busemann(hu * g * h_inv, act(hu, xi.to_disk()));
  };
  auto moved = [&](const BoundaryPoint& x) { return act(hu, x.to_disk()); };
  PullbackReport r;
  for (const Word& w : words) {
    Mat2d g = eval(rep, w);
    if (classify(g) != IsometryClass::Hyperbolic) continue;
    BoundaryPoint plus = fixed_points(g).first.to_disk();
    r.length_defect = std::max(r.length_defect, std::fabs(beta(g, plus) - busemann(g, plus)));
    ++r.words;
  }
  CounterRng rng = CounterRng(seed).split(0x9b);
  BoundaryPoint y = random_point(rng), z = random_point(rng);
  while (!separated(y, z) || !separated(moved(y), moved(z))) z = random_point(rng);
  auto triple = [&](const BoundaryPoint& x, bool pulled) {
    if (pulled) {
      auto mx = moved(x), my = moved(y), mz = moved(z);
      return cross_term(mx, my) + cross_term(mx, mz) - cross_term(my, mz);
    }
    return cross_term(x, y) + cross_term(x, z) - cross_term(y, z);
  };
  auto phi_hat = [&](const BoundaryPoint& x) { return 0.5 * (triple(x, true) - triple(x, false)); };
  auto usable = [&](const BoundaryPoint& x) {
    for (const auto& p : {x, moved(x)})
      for (const auto& q : {y, z, moved(y), moved(z)})
        if (angular_distance(p, q) < 1e-3) return false;
    return true;
  };
  int attempts = 0;
  while (static_cast<int>(r.points) < points && attempts < 100 * points) {
    ++attempts;
    Mat2d g = eval(rep, sample_word(rng, rep, 4));
    BoundaryPoint xi = random_point(rng);
    BoundaryPoint gxi = act(g, xi);
    if (!usable(xi) || !usable(gxi)) continue;
    double delta = beta(g, xi) - busemann(g, xi);
    r.coboundary_defect = std::max(r.coboundary_defect, std::fabs(delta - (phi_hat(gxi) - phi_hat(xi))));
    ++r.points;
  }
  return r;
}

std::string to_json(const CheckReport& r) {
  JsonWriter w;
  w.begin_object()
      .field("check", r.check)
      .field("samples", r.samples)
      .field("max_defect", r.max_defect)
      .field("tolerance", r.tolerance)
      .field("pass", r.pass)
      .end_object();
  return w.str();
}

Mat2d random_hyperbolic(CounterRng& rng) {
  for (;;) {
    Mat2d m = random_real_sl2(rng);
    if (std::fabs(m.trace()) > 2.2) return m;
  }
}

std::vector<CheckReport> cocycle_verify(const SurfaceRep& rep, std::uint64_t seed, int samples) {
  std::vector<CheckReport> out;
  auto finish = [&](std::string name, std::size_t n, double defect, double tol) {
    out.push_back({std::move(name), n, defect, tol, n > 0 && defect < tol});
  };
  CounterRng root(seed);
  const std::size_t want = static_cast<std::size_t>(std::max(1, samples));

  {
    CounterRng rng = root.split(1);
    double worst = 0;
    for (std::size_t i = 0; i < want; ++i) {
      Mat2d g = eval(rep, sample_word(rng, rep, 4)), e = eval(rep, sample_word(rng, rep, 4));
      BoundaryPoint xi = random_point(rng);
      worst = std::max(worst, std::fabs(busemann(g * e, xi) - busemann(g, act(e, xi)) - busemann(e, xi)));
    }
    finish("cocycle_identity", want, worst, 1e-9);
  }
  {
    CounterRng rng = root.split(2);
    double worst = 0;
    std::size_t n = 0;
    while (n < want) {
      Mat2d g = eval(rep, sample_word(rng, rep, 4));
      BoundaryPoint xi = random_point(rng), eta = random_point(rng);
      if (!separated(xi, eta) || !separated(act(g, xi), act(g, eta))) continue;
      worst = std::max(worst, pairing_check(g, xi, eta));
      ++n;
    }
    finish("pairing_identity", n, worst, 1e-8);
  }
  {
    CounterRng rng = root.split(3);
    double anti = 0, bridge = 0, inverse = 0;
    std::size_t n = 0;
    while (n < want) {
      // B(γ, .) has slope ~e^ℓ at γ-: one ulp in γ- costs e^ℓ ulps.
      Mat2d g = eval(rep, sample_cyclic_word(rng, rep, 4));
      if (classify(g) != IsometryClass::Hyperbolic || translation_length(g) > kPoleLengthCap) continue;
      auto [plus, minus] = fixed_points(g);
      anti = std::max(anti, std::fabs(busemann(g, plus) + busemann(g, minus)));
      Mat2d h = eval(rep, sample_cyclic_word(rng, rep, 8));
      if (classify(h) != IsometryClass::Hyperbolic) continue;
      double b_plus = busemann(h, fixed_points(h).first);
      Mat2d hi = h.inverse();
      double b_inv = busemann(hi, fixed_points(hi).first);
      bridge = std::max(bridge, std::fabs(b_plus - 2.0 * std::acosh(std::fabs(h.trace()) / 2.0)));
      inverse = std::max(inverse, std::fabs(b_inv - b_plus));
      ++n;
    }
    finish("antisymmetry_at_poles", n, anti, 1e-9);
    finish("length_bridge", n, bridge, 1e-8);
    finish("inverse_class", n, inverse, 1e-9);
  }
  {
    CounterRng rng = root.split(4);
    double worst = 0, spread = 0;
    std::size_t n = 0;
    while (n < want) {
      Mat2d g = eval(rep, sample_word(rng, rep, 3));
      std::vector<BoundaryPoint> pts;
      for (int i = 0; i < 5; ++i) pts.push_back(random_point(rng));
      bool ok = true;
      for (int i = 0; i < 5 && ok; ++i)
        for (int j = i + 1; j < 5 && ok; ++j)
          ok = angular_distance(pts[i], pts[j]) > 1e-3 && angular_distance(act(g, pts[i]), act(g, pts[j])) > 1e-3;
      if (!ok) continue;
      double r1 = recover_cocycle_from_C(g, pts[0], pts[1], pts[2]);
      double r2 = recover_cocycle_from_C(g, pts[0], pts[3], pts[4]);
      worst = std::max(worst, std::fabs(r1 - busemann(g, pts[0])));
      spread = std::max(spread, std::fabs(r1 - r2));
      ++n;
    }
    finish("recover_cocycle", n, worst, 1e-7);
    finish("recover_cocycle_aux_independence", n, spread, 1e-7);
  }
  {
    CounterRng rng = root.split(5);
    double worst = 0, paired = 0;
    std::size_t n = 0;
    auto phi = [](double theta) { return std::cos(theta); };
    while (n < want) {
      Mat2d e = eval(rep, sample_word(rng, rep, 4)), g = eval(rep, sample_word(rng, rep, 3));
      if (classify(g) != IsometryClass::Hyperbolic) continue;
      try {
        worst = std::max(worst, step1_identity_check(phi, e, g));
      } catch (const Error& err) {
        if (err.code() == Errc::DegenerateConfiguration) continue;
        throw;
      }
      paired = std::max(paired, step1_paired_limit_check(phi, e, g, 4));
      ++n;
    }
    finish("step1_identity", n, worst, 1e-12);
    finish("step1_paired_limit", n, paired, 1e-9);
  }
  {
    CounterRng rng = root.split(6);
    double worst = 0, rate = 0;
    std::size_t n = 0, monotone_failures = 0, rated = 0;
    while (n < want) {
      Mat2d e = eval(rep, sample_word(rng, rep, 3)), g = eval(rep, sample_word(rng, rep, 2));
      if (classify(g) != IsometryClass::Hyperbolic) continue;
      auto [plus, minus] = fixed_points(g);
      if (angular_distance(act(e, plus), minus) < 1e-3) continue;
      NorthSouthTable t = northsouth_limits(e, g, 30);
      worst = std::max(worst, t.final_distance);
      if (!t.monotone || t.converged_from == 0) ++monotone_failures;
      for (double ratio : {t.plus_ratio, t.minus_ratio})
        if (std::isfinite(ratio)) {
          rate = std::max(rate, std::fabs(ratio / t.expected_ratio - 1.0));
          ++rated;
        }
      ++n;
    }
    finish("northsouth_limits", n, monotone_failures > 0 ? std::numeric_limits<double>::infinity() : worst, 1e-8);
    finish("northsouth_decay_rate", rated, rate, 0.2);
  }
  {
    CounterRng rng = root.split(7);
    std::vector<Word> words;
    for (int i = 0; i < 50; ++i) words.push_back(sample_word(rng, rep, 6));
    double lengths = 0, cob = 0;
    std::size_t nw = 0, np = 0;
    int conjugators = std::max(1, samples / 50);
    for (int k = 0; k < conjugators; ++k) {
      Mat2d h = random_hyperbolic(rng);
      PullbackReport r = pullback_cocycle_test(rep, h, words, rng.next_u64(), 200);
      lengths = std::max(lengths, r.length_defect);
      cob = std::max(cob, r.coboundary_defect);
      nw += r.words;
      np += r.points;
    }
    finish("pullback_lengths", nw, lengths, 1e-8);
    finish("pullback_coboundary", np, cob, 1e-7);
  }
  return out;
}

}  // namespace speclab
