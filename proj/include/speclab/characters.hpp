#pragma once

// Trace polynomials of free-group words in the 2^m - 1 basic characters
// t_S = tr(s_{i1} ... s_{iv}), i1 < ... < iv, with exact integer coefficients.

#include <cstdint>
#include <cstddef>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "speclab/mobius.hpp"
#include "speclab/rng.hpp"
#include "speclab/surface_group.hpp"

namespace speclab {

/// Nonempty generator subset, bit i = generator i.
struct CharVar {
  std::uint32_t mask = 0;

  /// Ordered by subset size, then lexicographically on the sorted indices.
  friend bool operator<(CharVar x, CharVar y);
  friend bool operator==(CharVar, CharVar) = default;

  /// "t{1,2}" (1-based indices).
  std::string name() const;
};

/// Sparse exponent vector, sorted by CharVar order.
using Monomial = std::vector<std::pair<CharVar, std::uint32_t>>;

std::uint32_t degree(const Monomial& m);

class TracePoly {
 public:
  struct Term {
    Monomial mono;
    mpz_class coeff;
  };

  TracePoly() = default;
  static TracePoly constant(long c);
  static TracePoly variable(CharVar v);

  /// Canonical order: degree descending, then lexicographic on exponent
  /// vectors (earlier variables first), descending.
  std::span<const Term> terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::uint32_t total_degree() const;

  TracePoly operator+(const TracePoly& rhs) const;
  TracePoly operator-(const TracePoly& rhs) const;
  TracePoly operator*(const TracePoly& rhs) const;
  TracePoly operator-() const;

  friend bool operator==(const TracePoly& x, const TracePoly& y);

  /// "+1*t{1}^2 -1*t{1}*t{2}*t{1,2} -2"; "0" for the zero polynomial.
  std::string to_string() const;

 private:
  void normalize();
  TracePoly merge(const TracePoly& rhs, bool subtract) const;

  std::vector<Term> terms_;
};

/// Rewrites traces into the character basis.  Results are memoized on the
/// cyclic class of a word up to inversion; the table is safe for concurrent
/// use (shared reads, exclusive inserts).
class TraceEngine {
 public:
  /// Words longer than the cap are computed but not stored.
  explicit TraceEngine(std::size_t memo_max_length = SIZE_MAX) : memo_max_length_(memo_max_length) {}

  std::shared_ptr<const TracePoly> trace_poly(const Word& w);

  std::size_t memo_size() const;
  void clear();

 private:
  std::shared_ptr<const TracePoly> compute(const Word& key);

  std::size_t memo_max_length_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const TracePoly>> memo_;
};

/// Process-wide engine.
TraceEngine& default_trace_engine();

/// Canonical trace word: least rotation of the word or its inverse.
Word trace_key(const Word& w);

/// P_w with tr φ(w) = P_w(t_S) for every SL2 representation φ.  Letters must
/// index generators below m.
TracePoly trace_poly(const Word& w, int m);

/// Basic character values t_S for every nonempty S ⊆ {0..m-1}, indexed by mask.
template <Scalar T>
std::vector<T> character_values(std::span<const Mat2<T>> generators, int m) {
  std::vector<T> values(std::size_t{1} << m);
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    Mat2<T> prod = Mat2<T>::identity();
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) prod = prod * generators[i];
    values[mask] = prod.trace();
  }
  return values;
}

template <Scalar T>
T eval_at_characters(const TracePoly& p, std::span<const T> values) {
  T sum(0);
  for (const auto& term : p.terms()) {
    T value;
    if constexpr (ScalarTraits<T>::exact) {
      value = Rational(term.coeff);
    } else {
      value = term.coeff.get_d();
    }
    for (const auto& [var, exp] : term.mono)
      for (std::uint32_t e = 0; e < exp; ++e) value *= values[var.mask];
    sum += value;
  }
  return sum;
}

/// Substitutes t_S = tr(evaluate(s_S)) from the first m generators.
template <Scalar T>
T eval_trace_poly(const TracePoly& p, std::span<const Mat2<T>> generators, int m) {
  auto values = character_values(generators, m);
  return eval_at_characters<T>(p, values);
}

/// Random exact SL2 matrix with small rational entries.
Mat2q random_rational_sl2(CounterRng& rng);
/// Random float SL2 matrix (entries of order one).
Mat2d random_real_sl2(CounterRng& rng);

struct RminVerdict {
  enum class Kind { Equal, ProbablyEqual, Distinct };
  Kind kind = Kind::Equal;
  /// Set for Distinct: the separating representation and both squared traces.
  std::vector<Mat2q> witness;
  std::optional<Rational> squared_trace_1, squared_trace_2;
};

const char* to_string(RminVerdict::Kind k);

/// Equal iff P1^2 - P2^2 == 0; otherwise exact evaluation at N seeded
/// rational representations decides Distinct or ProbablyEqual.
RminVerdict rmin_test(const Word& w1, const Word& w2, int m, std::uint64_t seed, int samples);

struct RminPartition {
  /// Blocks of class indices; classes in a block have P^2 identical.
  std::vector<std::vector<std::size_t>> blocks;
  /// Pairs in different blocks that no sample separated.
  std::vector<std::pair<std::size_t, std::size_t>> probably_equal;
};

RminPartition rmin_pairs(std::span<const ConjClassKey> classes, int m, std::uint64_t seed,
                         int samples);

}  // namespace speclab
