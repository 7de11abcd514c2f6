#include "speclab/characters.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace speclab {

// ---------------------------------------------------------------------------
// Polynomials

bool operator<(CharVar x, CharVar y) {
  int px = std::popcount(x.mask), py = std::popcount(y.mask);
  if (px != py) return px < py;
  std::uint32_t a = x.mask, b = y.mask;
  while (a != 0 && b != 0) {
    int ia = std::countr_zero(a), ib = std::countr_zero(b);
    if (ia != ib) return ia < ib;
    a &= a - 1;
    b &= b - 1;
  }
  return false;
}

std::string CharVar::name() const {
  std::string out = "t{";
  bool first = true;
  for (int i = 0; i < 32; ++i) {
    if (!(mask & (1u << i))) continue;
    if (!first) out += ',';
    out += std::to_string(i + 1);
    first = false;
  }
  return out + "}";
}

std::uint32_t degree(const Monomial& m) {
  std::uint32_t d = 0;
  for (const auto& [var, exp] : m) d += exp;
  return d;
}

namespace {

// Lexicographic comparison of dense exponent vectors.
int compare_exponents(const Monomial& x, const Monomial& y) {
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].first == y[j].first) {
      if (x[i].second != y[j].second) return x[i].second > y[j].second ? 1 : -1;
      ++i;
      ++j;
    } else {
      return x[i].first < y[j].first ? 1 : -1;
    }
  }
  if (i < x.size()) return 1;
  if (j < y.size()) return -1;
  return 0;
}

// Canonical term order: true when x is printed before y.
bool precedes(const Monomial& x, const Monomial& y) {
  auto dx = degree(x), dy = degree(y);
  if (dx != dy) return dx > dy;
  return compare_exponents(x, y) > 0;
}

Monomial multiply(const Monomial& x, const Monomial& y) {
  Monomial out;
  out.reserve(x.size() + y.size());
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
      out.push_back(x[i++]);
    } else if (i == x.size() || y[j].first < x[i].first) {
      out.push_back(y[j++]);
    } else {
      out.emplace_back(x[i].first, x[i].second + y[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

TracePoly TracePoly::constant(long c) {
  TracePoly p;
  if (c != 0) p.terms_.push_back({{}, mpz_class(c)});
  return p;
}

TracePoly TracePoly::variable(CharVar v) {
  TracePoly p;
  p.terms_.push_back({{{v, 1}}, mpz_class(1)});
  return p;
}

std::uint32_t TracePoly::total_degree() const {
  std::uint32_t d = 0;
  for (const auto& t : terms_) d = std::max(d, degree(t.mono));
  return d;
}

void TracePoly::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& x, const Term& y) { return precedes(x.mono, y.mono); });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (auto& t : terms_) {
    if (!merged.empty() && merged.back().mono == t.mono)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(std::move(t));
  }
  std::erase_if(merged, [](const Term& t) { return sgn(t.coeff) == 0; });
  terms_ = std::move(merged);
}

TracePoly TracePoly::merge(const TracePoly& rhs, bool subtract) const {
  TracePoly out;
  out.terms_.reserve(terms_.size() + rhs.terms_.size());
  std::size_t i = 0, j = 0;
  while (i < terms_.size() || j < rhs.terms_.size()) {
    if (j == rhs.terms_.size() ||
        (i < terms_.size() && precedes(terms_[i].mono, rhs.terms_[j].mono))) {
      out.terms_.push_back(terms_[i++]);
    } else if (i == terms_.size() || precedes(rhs.terms_[j].mono, terms_[i].mono)) {
      out.terms_.push_back(rhs.terms_[j]);
      if (subtract) mpz_neg(out.terms_.back().coeff.get_mpz_t(), out.terms_.back().coeff.get_mpz_t());
      ++j;
    } else {
      mpz_class c = subtract ? mpz_class(terms_[i].coeff - rhs.terms_[j].coeff)
                             : mpz_class(terms_[i].coeff + rhs.terms_[j].coeff);
      if (sgn(c) != 0) out.terms_.push_back({terms_[i].mono, std::move(c)});
      ++i;
      ++j;
    }
  }
  return out;
}

TracePoly TracePoly::operator+(const TracePoly& rhs) const { return merge(rhs, false); }

TracePoly TracePoly::operator-() const {
  TracePoly out = *this;
  for (auto& t : out.terms_) t.coeff = -t.coeff;
  return out;
}

TracePoly TracePoly::operator-(const TracePoly& rhs) const { return merge(rhs, true); }

TracePoly TracePoly::operator*(const TracePoly& rhs) const {
  TracePoly out;
  // A single monomial shifts every exponent vector alike, so order is kept.
  if (terms_.size() == 1 || rhs.terms_.size() == 1) {
    const Term& one = terms_.size() == 1 ? terms_[0] : rhs.terms_[0];
    const TracePoly& many = terms_.size() == 1 ? rhs : *this;
    out.terms_.reserve(many.terms_.size());
    for (const auto& t : many.terms_) out.terms_.push_back({multiply(t.mono, one.mono), t.coeff * one.coeff});
    return out;
  }
  out.terms_.reserve(terms_.size() * rhs.terms_.size());
  for (const auto& x : terms_)
    for (const auto& y : rhs.terms_) out.terms_.push_back({multiply(x.mono, y.mono), x.coeff * y.coeff});
  out.normalize();
  return out;
}

bool operator==(const TracePoly& x, const TracePoly& y) {
  if (x.terms_.size() != y.terms_.size()) return false;
  for (std::size_t i = 0; i < x.terms_.size(); ++i)
    if (x.terms_[i].mono != y.terms_[i].mono || x.terms_[i].coeff != y.terms_[i].coeff) return false;
  return true;
}

std::string TracePoly::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += ' ';
    out += sgn(t.coeff) < 0 ? '-' : '+';
    mpz_class mag = abs(t.coeff);
    out += mag.get_str();
    for (const auto& [var, exp] : t.mono) {
      out += '*';
      out += var.name();
      if (exp > 1) out += '^' + std::to_string(exp);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rewriting

namespace {

Word rotated(const Word& w, std::size_t k) {
  std::vector<Letter> out;
  out.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out.push_back(w[(k + i) % w.size()]);
  return Word::reduce(out);
}

Word slice(const Word& w, std::size_t lo, std::size_t hi) {
  std::vector<Letter> out(w.letters().begin() + lo, w.letters().begin() + hi);
  return Word::reduce(out);
}

Word single(Letter l) { return Word::reduce(std::span<const Letter>(&l, 1)); }

std::size_t count_inverses(const Word& w) {
  return static_cast<std::size_t>(std::count_if(w.letters().begin(), w.letters().end(),
                                                [](Letter l) { return l.inv; }));
}

bool distinct_generators(const Word& w) {
  std::uint64_t seen = 0;
  for (Letter l : w.letters()) {
    std::uint64_t bit = std::uint64_t{1} << l.gen;
    if (seen & bit) return false;
    seen |= bit;
  }
  return true;
}

std::size_t inversions(const Word& w) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j)
      if (w[i].gen > w[j].gen) ++count;
  return count;
}

// Termination order: (length, inverse letters of the lighter orientation,
// index-order inversions of square-free positive words).
using Measure = std::tuple<std::size_t, std::size_t, std::size_t>;

Measure measure(const Word& cyclic) {
  Word w = least_rotation(cyclic);
  std::size_t n = w.size(), k = count_inverses(w);
  if (2 * k > n) {
    w = least_rotation(w.inverse());
    k = n - k;
  }
  std::size_t inv = (k == 0 && distinct_generators(w)) ? inversions(w) : 0;
  return {n, k, inv};
}

std::string memo_key(const Word& key) {
  std::string s;
  s.reserve(key.size());
  for (Letter l : key.letters()) s += static_cast<char>(l.code() + 1);
  return s;
}

}  // namespace

Word trace_key(const Word& w) {
  Word fwd = least_rotation(w);
  Word bwd = least_rotation(w.inverse());
  return bwd < fwd ? bwd : fwd;
}

std::shared_ptr<const TracePoly> TraceEngine::trace_poly(const Word& w) {
  Word key = trace_key(w);
  std::string mk = memo_key(key);
  {
    std::shared_lock lock(mutex_);
    if (auto it = memo_.find(mk); it != memo_.end()) return it->second;
  }
  auto result = compute(key);
  if (key.size() > memo_max_length_) return result;
  std::unique_lock lock(mutex_);
  return memo_.try_emplace(mk, std::move(result)).first->second;
}

std::size_t TraceEngine::memo_size() const {
  std::shared_lock lock(mutex_);
  return memo_.size();
}

void TraceEngine::clear() {
  std::unique_lock lock(mutex_);
  memo_.clear();
}

std::shared_ptr<const TracePoly> TraceEngine::compute(const Word& key) {
  if (key.empty()) return std::make_shared<const TracePoly>(TracePoly::constant(2));

  const Measure parent = measure(key);
  auto sub = [&](const Word& w) {
    if (!(measure(w) < parent)) throw std::logic_error("trace rewriting failed to decrease");
    return trace_poly(w);
  };
  auto var = [](Letter l) { return TracePoly::variable(CharVar{1u << l.gen}); };

  Word w = key;
  const std::size_t n = w.size();
  std::size_t k = count_inverses(w);
  if (2 * k > n) {
    w = least_rotation(w.inverse());
    k = n - k;
  }

  if (k > 0) {
    // tr(W x^{-1}) = tr(x) tr(W) - tr(W x)
    std::size_t pos = 0;
    while (!w[pos].inv) ++pos;
    Word r = rotated(w, pos + 1);
    Letter x = r[n - 1].inverse();
    Word head = slice(r, 0, n - 1);
    TracePoly out = var(x) * *sub(head) - *sub(head * single(x));
    return std::make_shared<const TracePoly>(std::move(out));
  }

  for (std::size_t i = 0; i < n && n > 1; ++i) {
    if (w[i] != w[(i + 1) % n]) continue;
    // tr(U x x) = tr(x) tr(U x) - tr(U)
    Word r = rotated(w, i + 2);
    Letter x = r[n - 1];
    Word u = slice(r, 0, n - 2);
    TracePoly out = var(x) * *sub(u * single(x)) - *sub(u);
    return std::make_shared<const TracePoly>(std::move(out));
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (w[i] != w[j]) continue;
      // tr(xU xV) = tr(xU) tr(xV) - tr(U V^{-1})
      Word r = rotated(w, i);
      std::size_t split = j - i;
      Word xu = slice(r, 0, split);
      Word xv = slice(r, split, n);
      Word u = slice(r, 1, split);
      Word v = slice(r, split + 1, n);
      TracePoly out = *sub(xu) * *sub(xv) - *sub(u * v.inverse());
      return std::make_shared<const TracePoly>(std::move(out));
    }
  }

  // Square-free positive word: smallest generator first.
  std::size_t lowest = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (w[i].gen < w[lowest].gen) lowest = i;
  Word r = rotated(w, lowest);
  std::size_t descent = 0;
  while (descent + 1 < n && r[descent].gen < r[descent + 1].gen) ++descent;
  if (descent + 1 == n) {
    std::uint32_t mask = 0;
    for (Letter l : r.letters()) mask |= 1u << l.gen;
    return std::make_shared<const TracePoly>(TracePoly::variable(CharVar{mask}));
  }
  // ba + ab = tr(b) a + tr(a) b + (tr(ab) - tr(a) tr(b)) I, applied to P b a Q.
  Letter b = r[descent], a = r[descent + 1];
  Word p = slice(r, 0, descent);
  Word q = slice(r, descent + 2, n);
  Word wa = single(a), wb = single(b);
  TracePoly out = -*sub(p * wa * wb * q) + var(b) * *sub(p * wa * q) + var(a) * *sub(p * wb * q) +
                  (*sub(wa * wb) - var(a) * var(b)) * *sub(p * q);
  return std::make_shared<const TracePoly>(std::move(out));
}

TraceEngine& default_trace_engine() {
  static TraceEngine engine;
  return engine;
}

TracePoly trace_poly(const Word& w, int m) {
  for (Letter l : w.letters())
    if (l.gen >= m) throw Error(Errc::InvalidWord, "letter outside the free group of rank m");
  return *default_trace_engine().trace_poly(w);
}

// ---------------------------------------------------------------------------
// R_min

Mat2q random_rational_sl2(CounterRng& rng) {
  auto small = [&](bool nonzero) {
    for (;;) {
      long num = static_cast<long>(rng.below(11)) - 5;
      long den = static_cast<long>(rng.below(4)) + 1;
      if (nonzero && num == 0) continue;
      Rational q(num, den);
      q.canonicalize();
      return q;
    }
  };
  Rational a = small(true), b = small(false), c = small(false);
  Rational d = (Rational(1) + b * c) / a;
  return {a, b, c, d};
}

Mat2d random_real_sl2(CounterRng& rng) {
  double a = rng.uniform(0.3, 2.0) * (rng.below(2) ? 1.0 : -1.0);
  double b = rng.uniform(-2.0, 2.0), c = rng.uniform(-2.0, 2.0);
  return {a, b, c, (1.0 + b * c) / a};
}

const char* to_string(RminVerdict::Kind k) {
  switch (k) {
    case RminVerdict::Kind::Equal: return "Equal";
    case RminVerdict::Kind::ProbablyEqual: return "ProbablyEqual";
    case RminVerdict::Kind::Distinct: return "Distinct";
  }
  return "?";
}

RminVerdict rmin_test(const Word& w1, const Word& w2, int m, std::uint64_t seed, int samples) {
  TracePoly p1 = trace_poly(w1, m), p2 = trace_poly(w2, m);
  RminVerdict verdict;
  if ((p1 * p1 - p2 * p2).is_zero()) return verdict;
  CounterRng rng(seed);
  for (int s = 0; s < samples; ++s) {
    std::vector<Mat2q> gens;
    for (int i = 0; i < m; ++i) gens.push_back(random_rational_sl2(rng));
    Rational t1 = evaluate<Rational>(w1, gens).trace();
    Rational t2 = evaluate<Rational>(w2, gens).trace();
    Rational q1 = t1 * t1, q2 = t2 * t2;
    if (q1 != q2) {
      verdict.kind = RminVerdict::Kind::Distinct;
      verdict.witness = std::move(gens);
      verdict.squared_trace_1 = q1;
      verdict.squared_trace_2 = q2;
      return verdict;
    }
  }
  verdict.kind = RminVerdict::Kind::ProbablyEqual;
  return verdict;
}

RminPartition rmin_pairs(std::span<const ConjClassKey> classes, int m, std::uint64_t seed,
                         int samples) {
  RminPartition out;
  std::map<std::string, std::size_t> block_of;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    TracePoly p = trace_poly(classes[i].word, m);
    if (!p.is_zero() && sgn(p.terms().front().coeff) < 0) p = -p;
    auto [it, fresh] = block_of.try_emplace(p.to_string(), out.blocks.size());
    if (fresh) out.blocks.emplace_back();
    out.blocks[it->second].push_back(i);
  }

  // Float fingerprints of the squared trace flag candidates for exact testing.
  CounterRng rng(seed);
  std::vector<std::vector<Mat2d>> reps(samples);
  for (auto& rep : reps)
    for (int i = 0; i < m; ++i) rep.push_back(random_real_sl2(rng));
  std::vector<std::vector<double>> prints(out.blocks.size());
  for (std::size_t b = 0; b < out.blocks.size(); ++b) {
    const Word& w = classes[out.blocks[b].front()].word;
    for (const auto& rep : reps) {
      double t = evaluate<double>(w, rep).trace();
      prints[b].push_back(t * t);
    }
  }
  for (std::size_t x = 0; x < out.blocks.size(); ++x) {
    for (std::size_t y = x + 1; y < out.blocks.size(); ++y) {
      bool agree = true;
      for (int s = 0; s < samples && agree; ++s) {
        double u = prints[x][s], v = prints[y][s];
        agree = std::fabs(u - v) <= 1e-6 * std::max({std::fabs(u), std::fabs(v), 1.0});
      }
      if (!agree) continue;
      std::size_t i = out.blocks[x].front(), j = out.blocks[y].front();
      auto verdict = rmin_test(classes[i].word, classes[j].word, m, seed ^ (x * 0x9e37 + y), samples);
      if (verdict.kind == RminVerdict::Kind::ProbablyEqual) out.probably_equal.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace speclab
