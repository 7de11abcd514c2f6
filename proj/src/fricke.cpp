#include "speclab/fricke.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>

#include <json.hpp>

#include "speclab/json_writer.hpp"
#include "speclab/rng.hpp"

namespace speclab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  return t >= kTwoPi ? 0.0 : t;
}

// Counterclockwise angular offset from `from` to `to`, in [0, 2π).
double ccw(double from, double to) { return wrap(to - from); }

// Projective coordinates (x : y) of the half-plane image of the disk point e^{iθ}.
struct Proj {
  double x, y;
};

Proj proj_at(double theta) { return {-std::cos(theta / 2), std::sin(theta / 2)}; }

// z -> (y_p z - x_p) / (y_q z - x_q): p to 0, q to ∞.
Mat2d zero_infinity_map(Proj p, Proj q) { return {p.y, -p.x, q.y, -q.x}; }

// Side pairing sending u1 -> v2, u2 -> v1 (and the complement of [u1, u2]
// onto [v1, v2]) with dilation |k| between the two charts.
Mat2d side_pairing(double u1, double u2, double v1, double v2, double k) {
  Mat2d tu = zero_infinity_map(proj_at(u2), proj_at(u1));
  Mat2d tv = zero_infinity_map(proj_at(v1), proj_at(v2));
  double sign = (tu.det() * tv.det() > 0) ? 1.0 : -1.0;
  Mat2d dil{sign * k, 0.0, 0.0, 1.0};
  return unimodular(tv.inverse() * dil * tu);
}

Mat2d partial_relator_product(const Presentation& p, std::span<const Mat2d> gens, int skip_last) {
  Word rel = relator(p);
  std::vector<Letter> head(rel.letters().begin(), rel.letters().end() - skip_last);
  return evaluate<double>(Word::reduce(head), gens);
}

bool is_pole(double x, double scale) { return std::fabs(x) <= 1e-12 * std::max(1.0, scale); }

std::optional<BoundaryPoint> parabolic_fixed_point(const Mat2d& m) {
  if (m.c == 0.0) return BoundaryPoint::infinity();
  return BoundaryPoint::real((m.a - m.d) / (2.0 * m.c));
}

std::vector<BoundaryPoint> fixed_point_candidates(const Mat2d& m) {
  Mat2d u = unimodular(m);
  switch (classify(u)) {
    case IsometryClass::Hyperbolic: {
      auto [att, rep] = fixed_points(u);
      return {att, rep};
    }
    case IsometryClass::Parabolic:
      return {*parabolic_fixed_point(u)};
    default:
      return {};
  }
}

Mat2d sign_with_positive(const Mat2d& m, double key) { return key < 0 ? -m : m; }

// True when 1 is the fixed point of beta the normalizer would pick, given alpha fixes 0 and infinity.
bool normal_beta_point(const Mat2d& beta) {
  for (const BoundaryPoint& fix : fixed_point_candidates(beta)) {
    if (angular_distance(fix, BoundaryPoint::real(0.0)) < 1e-9 ||
        angular_distance(fix, BoundaryPoint::infinity()) < 1e-9)
      continue;
    return angular_distance(fix, BoundaryPoint::real(1.0)) < 1e-9;
  }
  return false;
}

}  // namespace

void FrickeVector::validate() const {
  if (genus < 1 || punctures < 0)
    throw Error(Errc::DegenerateCoordinates, "Fricke coordinates need genus >= 1");
  if (values.size() != dimension(genus, punctures))
    throw Error(Errc::DegenerateCoordinates,
                "Fricke vector has " + std::to_string(values.size()) + " entries, expected " +
                    std::to_string(dimension(genus, punctures)));
  for (int i = 0; i + 1 < genus; ++i) {
    if (!(values[6 * i + 1] > 0) || !(values[6 * i + 4] > 0))
      throw Error(Errc::DegenerateCoordinates, "c_i and c'_i must be positive");
  }
  std::size_t base = 6 * static_cast<std::size_t>(genus - 1);
  for (int j = 0; j < punctures; ++j)
    if (values[base + 2 * j + 1] == 0.0) throw Error(Errc::DegenerateCoordinates, "g_j must be nonzero");
  for (double x : values)
    if (!std::isfinite(x)) throw Error(Errc::DegenerateCoordinates, "non-finite Fricke coordinate");
}

double relator_defect(const Presentation& p, std::span<const Mat2d> generators) {
  Mat2d r = evaluate<double>(relator(p), generators);
  Mat2d id = Mat2d::identity();
  return std::min(max_entry_diff(r, id), max_entry_diff(r, -id));
}

SurfaceRep make_rep(const Presentation& p, std::vector<Mat2d> generators,
                    std::optional<PingPongCertificate> certificate) {
  if (static_cast<int>(generators.size()) != p.num_generators())
    throw Error(Errc::InvalidRepresentation, "expected " + std::to_string(p.num_generators()) +
                                                 " generator matrices, got " +
                                                 std::to_string(generators.size()));
  for (const Mat2d& g : generators)
    if (!std::isfinite(g.a) || !std::isfinite(g.b) || !std::isfinite(g.c) || !std::isfinite(g.d) ||
        std::fabs(g.det() - 1.0) > 1e-8)
      throw Error(Errc::InvalidRepresentation, "generator matrices must have determinant 1");
  SurfaceRep rep;
  rep.presentation = p;
  rep.generators = std::move(generators);
  rep.validity.relator_defect = relator_defect(p, rep.generators);
  rep.validity.all_hyperbolic_or_parabolic = std::all_of(
      rep.generators.begin(), rep.generators.end(), [](const Mat2d& g) {
        auto k = classify(g);
        return k == IsometryClass::Hyperbolic || k == IsometryClass::Parabolic;
      });
  rep.validity.punctures_parabolic = true;
  for (int j = 0; j < p.punctures(); ++j)
    if (classify(rep.generators[2 * p.genus() + j]) != IsometryClass::Parabolic)
      rep.validity.punctures_parabolic = false;
  rep.validity.certificate = std::move(certificate);
  return rep;
}

SurfaceRep make_exact_rep(const Presentation& p, std::vector<Mat2q> generators) {
  for (const Mat2q& g : generators)
    if (g.det() != 1) throw Error(Errc::InvalidRepresentation, "exact generators must have determinant 1");
  std::vector<Mat2d> approx;
  for (const Mat2q& g : generators) approx.push_back(to_double(g));
  SurfaceRep rep = make_rep(p, std::move(approx));
  rep.exact = std::move(generators);
  return rep;
}

SurfaceRep conjugate_rep(const Mat2d& h, const SurfaceRep& rep) {
  std::vector<Mat2d> gens;
  for (const Mat2d& g : rep.generators) gens.push_back(conjugate(h, g));
  return make_rep(rep.presentation, std::move(gens));
}

SurfaceRep rep_from_fricke(const FrickeVector& v) {
  v.validate();
  Presentation p(v.genus, v.punctures);
  std::vector<Mat2d> gens(static_cast<std::size_t>(p.num_generators()));
  std::size_t k = 0;
  for (int i = 1; i < v.genus; ++i) {
    for (int side = 0; side < 2; ++side) {
      double a = v.values[k], c = v.values[k + 1], d = v.values[k + 2];
      k += 3;
      gens[2 * i + side] = {a, (a * d - 1.0) / c, c, d};
    }
  }
  for (int j = 0; j < v.punctures; ++j) {
    double e = v.values[k], g = v.values[k + 1];
    k += 2;
    gens[2 * v.genus + j] = {e, -(e - 1.0) * (e - 1.0) / g, g, 2.0 - e};
  }

  // Target commutator [α1, β1] = ±(∏_{i>=2}[αi, βi] ∏ γj)^{-1}.
  Mat2d partial = Mat2d::identity();
  for (int i = 1; i < v.genus; ++i) {
    const Mat2d &x = gens[2 * i], &y = gens[2 * i + 1];
    partial = partial * x * y * x.inverse() * y.inverse();
  }
  for (int j = 0; j < v.punctures; ++j) partial = partial * gens[2 * v.genus + j];
  Mat2d base = partial.inverse();

  double preferred = (v.punctures % 2 == 1) ? -1.0 : 1.0;
  bool saw_pole = false;
  std::optional<SurfaceRep> fallback;
  for (double sign : {preferred, -preferred}) {
    Mat2d m{sign * base.a, sign * base.b, sign * base.c, sign * base.d};
    double a = m.a, b = m.b, c = m.c, d = m.d;
    double scale = std::max({std::fabs(a), std::fabs(b), std::fabs(c), std::fabs(d)});
    if (is_pole(1.0 - a, scale) || is_pole(1.0 - d, scale) || is_pole(c + d - 1.0, scale) ||
        is_pole(a + b - 1.0, scale)) {
      saw_pole = true;
      continue;
    }
    double lambda2 = (a - 1.0) / (1.0 - d);
    double bracket = b * c * (a + b - 1.0) / ((1.0 - a) * (1.0 - a) * (c + d - 1.0)) -
                     (a + b - 1.0) * (1.0 - d) / ((1.0 - a) * (c + d - 1.0));
    if (!(lambda2 > 0) || std::fabs(lambda2 - 1.0) <= 1e-12 || !(bracket > 0)) continue;
    double lambda = std::sqrt(lambda2);
    double c1 = 1.0 / std::sqrt(bracket);
    double a1 = b * c1 / (1.0 - a);
    double b1 = c1 * (1.0 - d) * (a + b - 1.0) / ((1.0 - a) * (c + d - 1.0));
    double d1 = c * b1 / (1.0 - d);
    Mat2d beta1{a1, b1, c1, d1};
    gens[0] = Mat2d::diagonal(lambda);
    gens[1] = sign_with_positive(beta1, a1 + b1);
    SurfaceRep rep = make_rep(p, gens);
    // Both signs can be admissible; keep the one that is already in normal position.
    if (lambda2 > 1.0 && normal_beta_point(gens[1])) return rep;
    if (!fallback) fallback = std::move(rep);
  }
  if (fallback) return *std::move(fallback);
  if (saw_pole) throw Error(Errc::DegenerateCoordinates, "Fricke vector hits a coordinate pole");
  throw Error(Errc::NotInFrickeImage, "no sign gives lambda^2 > 0 and a positive c1^2");
}

Mat2d fricke_normalizer(const SurfaceRep& rep) {
  const Presentation& p = rep.presentation;
  if (p.genus() < 1) throw Error(Errc::NotNormalizable, "Fricke normalization needs genus >= 1");
  Mat2d alpha = unimodular(rep.generators[0]);
  if (classify(alpha) != IsometryClass::Hyperbolic)
    throw Error(Errc::NotHyperbolic, "alpha_1 must be hyperbolic");
  auto [plus, minus] = fixed_points(alpha);
  for (const BoundaryPoint& fix : fixed_point_candidates(rep.generators[1])) {
    if (angular_distance(fix, plus) < 1e-9 || angular_distance(fix, minus) < 1e-9) continue;
    return three_point_normalizer(minus, plus, fix);
  }
  throw Error(Errc::NotNormalizable, "beta_1 has no fixed point off the axis of alpha_1");
}

FrickeVector fricke_from_rep(const SurfaceRep& rep) {
  const Presentation& p = rep.presentation;
  Mat2d h = fricke_normalizer(rep);
  FrickeVector v;
  v.genus = p.genus();
  v.punctures = p.punctures();
  for (int i = 1; i < p.genus(); ++i) {
    for (int side = 0; side < 2; ++side) {
      Mat2d m = conjugate(h, rep.generators[2 * i + side]);
      if (m.c == 0.0) throw Error(Errc::NotInFrickeImage, "normalized generator has c = 0");
      m = sign_with_positive(m, m.c);
      v.values.insert(v.values.end(), {m.a, m.c, m.d});
    }
  }
  for (int j = 0; j < p.punctures(); ++j) {
    Mat2d m = conjugate(h, rep.generators[2 * p.genus() + j]);
    m = sign_with_positive(m, m.trace());
    if (std::fabs(m.trace() - 2.0) > 1e-6)
      throw Error(Errc::InvalidRepresentation, "puncture generators must be parabolic");
    if (m.c == 0.0) throw Error(Errc::NotInFrickeImage, "normalized puncture generator has g = 0");
    v.values.insert(v.values.end(), {m.a, m.c});
  }
  return v;
}

Presentation schottky_presentation(int m) {
  if (m < 2) throw Error(Errc::InvalidRepresentation, "Schottky samples need m >= 2");
  int g = m / 2;
  return Presentation(g, m - 2 * g + 1);
}

namespace {

std::optional<SurfaceRep> funnel_attempt(CounterRng& rng, int m, const SchottkyParams& params) {
  Presentation p = schottky_presentation(m);
  int arcs = 2 * m;
  double sector = kTwoPi / arcs;
  double offset = rng.uniform(0.0, kTwoPi);
  std::vector<std::pair<double, double>> arc(arcs);
  for (int s = 0; s < arcs; ++s) {
    double f = rng.uniform(params.min_width, params.max_width);
    double start = offset + s * sector + (1.0 - f) * sector * rng.uniform(0.2, 0.8);
    arc[s] = {wrap(start), wrap(start + f * sector)};
  }
  std::vector<int> perm(arcs);
  for (int s = 0; s < arcs; ++s) perm[s] = s;
  for (int s = arcs - 1; s > 0; --s) std::swap(perm[s], perm[rng.below(static_cast<std::uint64_t>(s) + 1)]);

  PingPongCertificate cert;
  std::vector<Mat2d> gens;
  for (int i = 0; i < m; ++i) {
    auto [u1, u2] = arc[perm[2 * i]];
    auto [v1, v2] = arc[perm[2 * i + 1]];
    double k = std::exp(rng.uniform(-params.max_log_dilation, params.max_log_dilation));
    gens.push_back(side_pairing(u1, u2, v1, v2, k));
    cert.arcs.push_back({i, u1, u2, v1, v2});
  }
  // The last puncture generator closes the relator.
  gens.push_back(partial_relator_product(p, gens, 1).inverse());
  cert.min_gap = std::numeric_limits<double>::infinity();
  for (int s = 0; s < arcs; ++s) {
    auto [lo, hi] = arc[s];
    auto [next_lo, next_hi] = arc[(s + 1) % arcs];
    cert.min_gap = std::min(cert.min_gap, ccw(hi, next_lo));
  }
  SurfaceRep rep = make_rep(p, std::move(gens), std::move(cert));
  if (certificate_defect(rep) > 1e-9) return std::nullopt;
  for (const Mat2d& g : rep.basis())
    if (classify(g) != IsometryClass::Hyperbolic) return std::nullopt;
  return rep;
}

// Ideal 4g-gon; a_i pairs side 4i with 4i+2, b_i pairs side 4i+1 with 4i-1.
// The last dilation is solved so the vertex cycle is parabolic.
std::optional<SurfaceRep> cusped_attempt(CounterRng& rng, int m, const SchottkyParams& params) {
  const int g = m / 2, n = 4 * g;
  std::vector<double> w(static_cast<std::size_t>(n)), pts(static_cast<std::size_t>(n));
  double total = 0;
  for (double& x : w) total += (x = rng.uniform(0.6, 1.4));
  pts[0] = rng.uniform(0.0, kTwoPi);
  for (int i = 1; i < n; ++i) pts[i] = pts[i - 1] + kTwoPi * w[i - 1] / total;
  for (double& x : pts) x = wrap(x);
  auto lo = [&](int side) { return pts[((side % n) + n) % n]; };
  auto hi = [&](int side) { return pts[((side + 1) % n + n) % n]; };

  std::vector<double> k(static_cast<std::size_t>(m), 1.0);
  for (int i = 0; i + 1 < m; ++i) k[i] = std::exp(rng.uniform(-params.max_log_dilation, params.max_log_dilation));
  auto build = [&] {
    std::vector<Mat2d> gens;
    for (int i = 0; i < g; ++i) {
      gens.push_back(side_pairing(lo(4 * i), hi(4 * i), lo(4 * i + 2), hi(4 * i + 2), k[2 * i]));
      gens.push_back(side_pairing(lo(4 * i + 1), hi(4 * i + 1), lo(4 * i - 1), hi(4 * i - 1), k[2 * i + 1]));
    }
    return gens;
  };
  auto commutators = [&](const std::vector<Mat2d>& gens) {
    Mat2d prod = Mat2d::identity();
    for (int i = 0; i < g; ++i) {
      const Mat2d &x = gens[2 * i], &y = gens[2 * i + 1];
      prod = prod * x * y * x.inverse() * y.inverse();
    }
    return prod;
  };
  // The product of commutators fixes a vertex; log of its derivative there is -2 log k_last + const.
  auto log_derivative = [&]() -> std::optional<double> {
    Mat2d prod = commutators(build());
    for (int j = 0; j < n; ++j) {
      BoundaryPoint v = BoundaryPoint::angle(pts[j]);
      if (angular_distance(act(prod, v), v) < 1e-8) return std::log(boundary_derivative(prod, v));
    }
    return std::nullopt;
  };
  auto base = log_derivative();
  if (!base) return std::nullopt;
  k[m - 1] = std::exp(*base / 2.0);

  std::vector<Mat2d> gens = build();
  Mat2d comm = commutators(gens);
  if (std::fabs(comm.trace() + 2.0) > 1e-8) return std::nullopt;
  gens.push_back(-comm.inverse());

  PingPongCertificate cert;
  cert.tangent = true;
  cert.min_gap = 0.0;
  for (int i = 0; i < g; ++i) {
    cert.arcs.push_back({2 * i, lo(4 * i), hi(4 * i), lo(4 * i + 2), hi(4 * i + 2)});
    cert.arcs.push_back({2 * i + 1, lo(4 * i + 1), hi(4 * i + 1), lo(4 * i - 1), hi(4 * i - 1)});
  }
  SurfaceRep rep = make_rep(Presentation(g, 1), std::move(gens), std::move(cert));
  if (certificate_defect(rep) > 1e-9) return std::nullopt;
  for (const Mat2d& x : rep.basis())
    if (classify(x) != IsometryClass::Hyperbolic) return std::nullopt;
  return rep;
}

}  // namespace

SurfaceRep schottky_sample(std::uint64_t seed, int m, const SchottkyParams& params) {
  if (m < 2) throw Error(Errc::InvalidRepresentation, "Schottky samples need m >= 2");
  bool cusped = params.mode == SchottkyParams::Mode::Cusped;
  if (cusped && m != 2 && m != 4) throw Error(Errc::InvalidRepresentation, "cusped samples need m = 2 or 4");
  if (!(0 < params.min_width && params.min_width <= params.max_width && params.max_width < 1))
    throw Error(Errc::InvalidRepresentation, "arc widths must satisfy 0 < min <= max < 1");
  CounterRng root(seed);
  for (int attempt = 0; attempt < std::max(1, params.max_retries); ++attempt) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(attempt));
    auto rep = cusped ? cusped_attempt(rng, m, params) : funnel_attempt(rng, m, params);
    if (rep) return *rep;
  }
  throw Error(Errc::SamplingFailed, "no certified Schottky configuration within the retry budget");
}

double certificate_defect(const SurfaceRep& rep) {
  if (!rep.validity.certificate) return std::numeric_limits<double>::infinity();
  const auto& cert = *rep.validity.certificate;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Interiors of all arcs pairwise disjoint.
  std::vector<std::pair<double, double>> all;
  for (const auto& a : cert.arcs) {
    all.emplace_back(a.minus_lo, a.minus_hi);
    all.emplace_back(a.plus_lo, a.plus_hi);
  }
  const double slack = 1e-12;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      double len_i = ccw(all[i].first, all[i].second), len_j = ccw(all[j].first, all[j].second);
      if (ccw(all[i].first, all[j].first) < len_i - slack || ccw(all[j].first, all[i].first) < len_j - slack)
        return kInf;
    }
  double worst = 0;
  for (const auto& a : cert.arcs) {
    if (a.generator < 0 || a.generator >= static_cast<int>(rep.generators.size())) return kInf;
    const Mat2d& x = rep.generators[a.generator];
    auto image = [&](double t) { return act(x, BoundaryPoint::angle(t)).theta(); };
    auto dist = [](double s, double t) { return std::min(ccw(s, t), ccw(t, s)); };
    worst = std::max({worst, dist(image(a.minus_lo), a.plus_hi), dist(image(a.minus_hi), a.plus_lo)});
    double outside_mid = a.minus_hi + 0.5 * ccw(a.minus_hi, a.minus_lo);
    if (ccw(a.plus_lo, image(outside_mid)) > ccw(a.plus_lo, a.plus_hi)) return kInf;
  }
  return worst;
}

SurfaceRep modular_torus() {
  Mat2q a{1, 1, 1, 2};
  Mat2q b{1, -1, -1, 2};
  Mat2q comm = a * b * a.inverse() * b.inverse();
  return make_exact_rep(Presentation(1, 1), {a, b, -comm.inverse()});
}

namespace {

void write_matrix(JsonWriter& w, const Mat2d& m) {
  w.begin_array().value(m.a).value(m.b).value(m.c).value(m.d).end_array();
}

void write_rep_body(JsonWriter& w, const SurfaceRep& rep) {
  w.field("genus", rep.presentation.genus()).field("punctures", rep.presentation.punctures());
  w.key("vector").begin_array();
  try {
    for (double x : fricke_from_rep(rep).values) w.value(x);
  } catch (const Error&) {
  }
  w.end_array();
  w.key("matrices").begin_array();
  for (const Mat2d& m : rep.generators) write_matrix(w, m);
  w.end_array();
  if (rep.exact) {
    w.key("exact_matrices").begin_array();
    for (const Mat2q& m : *rep.exact) {
      w.begin_array();
      for (const Rational* x : {&m.a, &m.b, &m.c, &m.d}) w.value(x->get_str());
      w.end_array();
    }
    w.end_array();
  }
  const Validity& v = rep.validity;
  w.key("validity").begin_object();
  w.field("relator_defect", v.relator_defect)
      .field("all_hyperbolic_or_parabolic", v.all_hyperbolic_or_parabolic)
      .field("punctures_parabolic", v.punctures_parabolic);
  w.key("certificate");
  if (!v.certificate) {
    w.null();
  } else {
    w.begin_object().field("tangent", v.certificate->tangent).field("min_gap", v.certificate->min_gap);
    w.key("arcs").begin_array();
    for (const auto& a : v.certificate->arcs) {
      w.begin_object().field("generator", a.generator);
      w.key("minus").begin_array().value(a.minus_lo).value(a.minus_hi).end_array();
      w.key("plus").begin_array().value(a.plus_lo).value(a.plus_hi).end_array();
      w.end_object();
    }
    w.end_array().end_object();
  }
  w.end_object();
}

}  // namespace

std::string to_json(const SurfaceRep& rep) {
  JsonWriter w;
  w.begin_object();
  write_rep_body(w, rep);
  w.end_object();
  return w.str();
}

std::string to_json(const FrickeVector& v) {
  JsonWriter w;
  w.begin_object().field("genus", v.genus).field("punctures", v.punctures);
  w.key("vector").begin_array();
  for (double x : v.values) w.value(x);
  w.end_array().end_object();
  return w.str();
}

SurfaceRep rep_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("rep document: ") + e.what());
  }
  try {
    int g = doc.at("genus").get<int>();
    int n = doc.at("punctures").get<int>();
    Presentation p(g, n);
    if (doc.contains("exact_matrices")) {
      std::vector<Mat2q> gens;
      for (const auto& m : doc.at("exact_matrices")) {
        if (m.size() != 4) throw Error(Errc::Parse, "exact matrices need 4 entries");
        Rational e[4];
        for (int i = 0; i < 4; ++i) {
          e[i] = Rational(m.at(i).get<std::string>());
          e[i].canonicalize();
        }
        gens.push_back({e[0], e[1], e[2], e[3]});
      }
      return make_exact_rep(p, std::move(gens));
    }
    if (doc.contains("matrices")) {
      std::vector<Mat2d> gens;
      for (const auto& m : doc.at("matrices")) {
        if (m.size() != 4) throw Error(Errc::Parse, "matrices need 4 entries");
        gens.push_back({m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>(),
                        m.at(3).get<double>()});
      }
      std::optional<PingPongCertificate> cert;
      if (doc.contains("validity") && doc["validity"].contains("certificate") &&
          !doc["validity"]["certificate"].is_null()) {
        const auto& c = doc["validity"]["certificate"];
        PingPongCertificate pc;
        pc.tangent = c.value("tangent", false);
        pc.min_gap = c.value("min_gap", 0.0);
        for (const auto& a : c.at("arcs"))
          pc.arcs.push_back({a.at("generator").get<int>(), a.at("minus").at(0).get<double>(),
                             a.at("minus").at(1).get<double>(), a.at("plus").at(0).get<double>(),
                             a.at("plus").at(1).get<double>()});
        cert = std::move(pc);
      }
      return make_rep(p, std::move(gens), std::move(cert));
    }
    FrickeVector v;
    v.genus = g;
    v.punctures = n;
    v.values = doc.at("vector").get<std::vector<double>>();
    return rep_from_fricke(v);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("rep document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(Errc::Parse, std::string("rep document: bad rational entry"));
  }
}

std::string rep_digest(const SurfaceRep& rep) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  feed(std::to_string(rep.presentation.genus()));
  feed(std::to_string(rep.presentation.punctures()));
  for (const Mat2d& m : rep.generators)
    for (double x : {m.a, m.b, m.c, m.d}) feed(format_double(x));
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace speclab
