#pragma once

// Surface-group presentations, free reduction, conjugacy-class keys and
// bounded enumeration of classes.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "speclab/mobius.hpp"
#include "speclab/rng.hpp"

namespace speclab {

/// Generator index with exponent ±1.  Letters are ordered a1 < A1 < b1 < B1 < ...
struct Letter {
  std::uint16_t gen = 0;
  bool inv = false;

  constexpr std::uint32_t code() const { return 2u * gen + (inv ? 1u : 0u); }
  constexpr Letter inverse() const { return {gen, !inv}; }
  constexpr bool cancels(Letter other) const { return gen == other.gen && inv != other.inv; }

  friend constexpr bool operator==(Letter, Letter) = default;
  friend constexpr auto operator<=>(Letter x, Letter y) { return x.code() <=> y.code(); }
};

/// Freely reduced word.
class Word {
 public:
  Word() = default;

  /// Free reduction of an arbitrary letter sequence.
  static Word reduce(std::span<const Letter> raw);

  std::span<const Letter> letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }

  Word inverse() const;
  Word operator*(const Word& rhs) const;
  Word power(int n) const;

  friend bool operator==(const Word&, const Word&) = default;
  /// Shortlex order.
  friend std::strong_ordering operator<=>(const Word& x, const Word& y);

 private:
  std::vector<Letter> letters_;
};

Word free_reduce(std::span<const Letter> raw);

class Presentation {
 public:
  /// Requires 2g + n >= 2.
  Presentation(int genus, int punctures);

  int genus() const { return genus_; }
  int punctures() const { return punctures_; }
  /// α1, β1, ..., αg, βg, γ1, ..., γn.
  int num_generators() const { return 2 * genus_ + punctures_; }
  /// With punctures the group is free on every generator but γn.
  bool is_free() const { return punctures_ > 0; }
  int rank() const { return is_free() ? num_generators() - 1 : num_generators(); }

  std::string generator_name(int gen) const;
  std::optional<int> generator_index(std::string_view name) const;

  friend bool operator==(const Presentation&, const Presentation&) = default;

 private:
  int genus_;
  int punctures_;
};

/// ∏[αi, βi] ∏γj, freely reduced.
Word relator(const Presentation& p);

/// Rewrites γn through the relator so the word uses the free basis only
/// (identity for closed surfaces).
Word to_free_basis(const Word& w, const Presentation& p);

struct ConjClassKey {
  Word word;
  bool inverse_paired = false;

  friend bool operator==(const ConjClassKey&, const ConjClassKey&) = default;
  friend std::strong_ordering operator<=>(const ConjClassKey& x, const ConjClassKey& y) {
    if (auto c = x.word <=> y.word; c != 0) return c;
    return x.inverse_paired <=> y.inverse_paired;
  }
};

/// Cyclic reduction followed by the least rotation.
Word least_rotation(const Word& w);

/// Cyclic Dehn reduction against the relator of a closed surface.
Word dehn_reduce_cyclic(const Word& w, const Presentation& p);

ConjClassKey canonical_class(const Word& w, const Presentation& p, bool merge_inverse = false);

/// Depth-first walk over the cyclically reduced words of one length over
/// `rank` generators that are their own least rotation (one per conjugacy
/// class of the free group).  Prefixes that cannot extend to a least rotation
/// are pruned.  `push(depth, letter)` fires whenever position `depth` is
/// (re)assigned; `leaf(letters)` fires for each class representative.
template <class Push, class Leaf>
void visit_necklaces(int rank, int length, Push&& push, Leaf&& leaf) {
  if (length < 1 || rank < 1) return;
  std::vector<Letter> w(static_cast<std::size_t>(length));
  // p is the length of the longest Lyndon prefix of w[0..k).
  auto rec = [&](auto&& self, int k, int p) -> void {
    if (k == length) {
      if (length % p == 0 && !(length >= 2 && w.front().cancels(w.back()))) leaf(std::span<const Letter>(w));
      return;
    }
    std::uint32_t floor_code = k == 0 ? 0 : w[k - p].code();
    for (std::uint32_t code = floor_code; code < 2u * static_cast<std::uint32_t>(rank); ++code) {
      Letter l{static_cast<std::uint16_t>(code / 2), (code % 2) == 1};
      if (k > 0 && w[k - 1].cancels(l)) continue;
      w[k] = l;
      push(k, l);
      self(self, k + 1, (k == 0 || code > floor_code) ? k + 1 : p);
    }
  };
  rec(rec, 0, 1);
}

/// One key per class of cyclic length <= maxlen, shortlex order.
std::vector<ConjClassKey> enumerate_classes(const Presentation& p, int maxlen,
                                            bool merge_inverse = false);

/// Uniformly random freely reduced word with length in [min_len, max_len].
Word random_reduced_word(CounterRng& rng, int rank, int min_len, int max_len);

/// Word syntax: a letter optionally followed by digits, uppercase = inverse,
/// whitespace optional.  `a1`, `b2`, `c1` name αi, βi, γj of the presentation;
/// a bare letter is the generator at that alphabet position (a = 0, b = 1, ...).
Word parse_word(std::string_view text, const Presentation* p = nullptr);

/// Surface names separated by spaces ("a1 B1 a1").
std::string format_word(const Word& w, const Presentation& p);
/// Bare alphabet letters ("abAB").
std::string format_word_alpha(const Word& w);

template <Scalar T>
Mat2<T> evaluate(const Word& w, std::span<const Mat2<T>> generators) {
  Mat2<T> out = Mat2<T>::identity();
  for (Letter l : w.letters()) {
    if (l.gen >= generators.size())
      throw Error(Errc::InvalidWord, "letter outside the generator range");
    const Mat2<T>& g = generators[l.gen];
    out = out * (l.inv ? g.inverse() : g);
  }
  return out;
}

}  // namespace speclab
