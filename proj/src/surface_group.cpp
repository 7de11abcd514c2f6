#include "speclab/surface_group.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace speclab {

namespace {

Word letters_to_word(std::vector<Letter> raw) { return Word::reduce(raw); }

Word cyclic_reduce(const Word& w) {
  std::size_t lo = 0, hi = w.size();
  while (hi - lo >= 2 && w[lo].cancels(w[hi - 1])) {
    ++lo;
    --hi;
  }
  if (lo == 0) return w;
  return Word::reduce(w.letters().subspan(lo, hi - lo));
}

Word rotate(const Word& w, std::size_t k) {
  std::vector<Letter> out;
  out.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out.push_back(w[(k + i) % w.size()]);
  return Word::reduce(out);
}

std::vector<Word> relator_conjugates(const Presentation& p) {
  Word r = relator(p);
  std::vector<Word> out;
  for (const Word& base : {r, r.inverse()})
    for (std::size_t k = 0; k < base.size(); ++k) out.push_back(rotate(base, k));
  return out;
}

// Replaces, at some cyclic position, a prefix of length k of a relator
// conjugate by the inverse of its complement.  Pieces with k > |R|/2 shorten
// the word; with `allow_half`, k == |R|/2 pieces are also accepted (length
// preserving).  Returns all results of single replacements of that kind.
std::vector<Word> dehn_moves(const Word& cw, const std::vector<Word>& conjugates, bool half_only) {
  std::vector<Word> out;
  std::size_t n = cw.size();
  if (n == 0) return out;
  for (const Word& r : conjugates) {
    std::size_t len = r.size();
    for (std::size_t start = 0; start < n; ++start) {
      std::size_t k = 0;
      while (k < std::min(n, len) && cw[(start + k) % n] == r[k]) ++k;
      bool take = half_only ? (2 * k == len) : (2 * k > len);
      if (!take) continue;
      std::vector<Letter> next;
      for (std::size_t i = len; i > k; --i) next.push_back(r[i - 1].inverse());
      for (std::size_t i = k; i < n; ++i) next.push_back(cw[(start + i) % n]);
      out.push_back(cyclic_reduce(Word::reduce(next)));
      if (!half_only) return out;
    }
  }
  return out;
}

Word dehn_shorten(Word w, const std::vector<Word>& conjugates) {
  w = cyclic_reduce(w);
  for (;;) {
    auto moves = dehn_moves(w, conjugates, false);
    if (moves.empty()) return w;
    w = moves.front();
  }
}

Word canonical_word(const Word& w, const Presentation& p) {
  if (p.is_free()) return least_rotation(to_free_basis(w, p));
  auto conjugates = relator_conjugates(p);
  // Close under length-preserving half-relator swaps and keep the least form.
  constexpr std::size_t kClosureCap = 256;
  Word start = least_rotation(dehn_shorten(w, conjugates));
  std::set<Word> seen{start};
  std::vector<Word> frontier{start};
  Word best = start;
  while (!frontier.empty() && seen.size() < kClosureCap) {
    Word cur = frontier.back();
    frontier.pop_back();
    for (const Word& next : dehn_moves(cur, conjugates, true)) {
      Word canon = least_rotation(dehn_shorten(next, conjugates));
      if (!seen.insert(canon).second) continue;
      if (canon < best) best = canon;
      frontier.push_back(canon);
    }
  }
  return best;
}

void for_each_reduced(int num_letters, int length, std::vector<Letter>& prefix,
                      const auto& visit) {
  if (static_cast<int>(prefix.size()) == length) {
    visit(prefix);
    return;
  }
  for (int code = 0; code < 2 * num_letters; ++code) {
    Letter l{static_cast<std::uint16_t>(code / 2), (code % 2) == 1};
    if (!prefix.empty() && prefix.back().cancels(l)) continue;
    prefix.push_back(l);
    for_each_reduced(num_letters, length, prefix, visit);
    prefix.pop_back();
  }
}

}  // namespace

Word Word::reduce(std::span<const Letter> raw) {
  Word w;
  w.letters_.reserve(raw.size());
  for (Letter l : raw) {
    if (!w.letters_.empty() && w.letters_.back().cancels(l))
      w.letters_.pop_back();
    else
      w.letters_.push_back(l);
  }
  return w;
}

Word free_reduce(std::span<const Letter> raw) { return Word::reduce(raw); }

Word Word::inverse() const {
  Word w;
  w.letters_.reserve(letters_.size());
  for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) w.letters_.push_back(it->inverse());
  return w;
}

Word Word::operator*(const Word& rhs) const {
  std::vector<Letter> raw(letters_);
  raw.insert(raw.end(), rhs.letters_.begin(), rhs.letters_.end());
  return reduce(raw);
}

Word Word::power(int n) const {
  Word base = n < 0 ? inverse() : *this;
  Word out;
  for (int i = 0; i < std::abs(n); ++i) out = out * base;
  return out;
}

std::strong_ordering operator<=>(const Word& x, const Word& y) {
  if (auto c = x.size() <=> y.size(); c != 0) return c;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (auto c = x[i] <=> y[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

Presentation::Presentation(int genus, int punctures) : genus_(genus), punctures_(punctures) {
  if (genus < 0 || punctures < 0 || 2 * genus + punctures < 2)
    throw Error(Errc::InvalidRepresentation, "presentation needs 2g + n >= 2");
}

std::string Presentation::generator_name(int gen) const {
  if (gen < 2 * genus_) return std::string(gen % 2 == 0 ? "a" : "b") + std::to_string(gen / 2 + 1);
  return "c" + std::to_string(gen - 2 * genus_ + 1);
}

std::optional<int> Presentation::generator_index(std::string_view name) const {
  if (name.size() < 2) return std::nullopt;
  int idx = 0;
  for (char ch : name.substr(1)) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return std::nullopt;
    idx = idx * 10 + (ch - '0');
    if (idx > 100000) return std::nullopt;
  }
  if (idx < 1) return std::nullopt;
  switch (name[0]) {
    case 'a': if (idx <= genus_) return 2 * (idx - 1); break;
    case 'b': if (idx <= genus_) return 2 * (idx - 1) + 1; break;
    case 'c': if (idx <= punctures_) return 2 * genus_ + idx - 1; break;
    default: break;
  }
  return std::nullopt;
}

Word relator(const Presentation& p) {
  std::vector<Letter> raw;
  for (int i = 0; i < p.genus(); ++i) {
    auto a = static_cast<std::uint16_t>(2 * i), b = static_cast<std::uint16_t>(2 * i + 1);
    raw.insert(raw.end(), {Letter{a, false}, Letter{b, false}, Letter{a, true}, Letter{b, true}});
  }
  for (int j = 0; j < p.punctures(); ++j)
    raw.push_back(Letter{static_cast<std::uint16_t>(2 * p.genus() + j), false});
  return letters_to_word(std::move(raw));
}

Word to_free_basis(const Word& w, const Presentation& p) {
  if (!p.is_free()) return w;
  auto last = static_cast<std::uint16_t>(p.num_generators() - 1);
  // R = X γn = e, so γn = X^{-1}.
  Word rel = relator(p);
  std::vector<Letter> head(rel.letters().begin(), rel.letters().end() - 1);
  Word gamma_n = Word::reduce(head).inverse();
  Word gamma_n_inv = gamma_n.inverse();
  std::vector<Letter> raw;
  for (Letter l : w.letters()) {
    if (l.gen != last) {
      raw.push_back(l);
      continue;
    }
    const Word& sub = l.inv ? gamma_n_inv : gamma_n;
    raw.insert(raw.end(), sub.letters().begin(), sub.letters().end());
  }
  return Word::reduce(raw);
}

Word least_rotation(const Word& w) {
  Word cw = cyclic_reduce(w);
  std::size_t n = cw.size(), best = 0;
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      Letter x = cw[(k + i) % n], y = cw[(best + i) % n];
      if (x == y) continue;
      if (x < y) best = k;
      break;
    }
  }
  return best == 0 ? cw : rotate(cw, best);
}

Word dehn_reduce_cyclic(const Word& w, const Presentation& p) {
  if (p.is_free()) return cyclic_reduce(w);
  return dehn_shorten(w, relator_conjugates(p));
}

ConjClassKey canonical_class(const Word& w, const Presentation& p, bool merge_inverse) {
  Word key = canonical_word(w, p);
  if (key.empty()) throw Error(Errc::EmptyWord, "the trivial class has no key");
  if (merge_inverse) {
    Word inv = canonical_word(w.inverse(), p);
    if (inv < key) key = std::move(inv);
  }
  return {std::move(key), merge_inverse};
}

std::vector<ConjClassKey> enumerate_classes(const Presentation& p, int maxlen, bool merge_inverse) {
  std::vector<ConjClassKey> out;
  if (maxlen < 1) return out;
  std::vector<Letter> prefix;
  if (p.is_free()) {
    for (int len = 1; len <= maxlen; ++len) {
      visit_necklaces(p.rank(), len, [](int, Letter) {}, [&](std::span<const Letter> raw) {
        Word w = Word::reduce(raw);
        if (merge_inverse && least_rotation(w.inverse()) < w) return;
        out.push_back({std::move(w), merge_inverse});
      });
    }
    return out;
  }
  std::set<ConjClassKey> keys;
  for (int len = 1; len <= maxlen; ++len) {
    for_each_reduced(p.rank(), len, prefix, [&](const std::vector<Letter>& raw) {
      if (raw.size() >= 2 && raw.front().cancels(raw.back())) return;
      Word w = Word::reduce(raw);
      Word key = canonical_word(w, p);
      if (merge_inverse) {
        Word inv = canonical_word(w.inverse(), p);
        if (inv < key) key = std::move(inv);
      }
      if (!key.empty() && static_cast<int>(key.size()) <= maxlen)
        keys.insert({std::move(key), merge_inverse});
    });
  }
  out.assign(keys.begin(), keys.end());
  return out;
}

Word random_reduced_word(CounterRng& rng, int rank, int min_len, int max_len) {
  int len = min_len + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len - min_len + 1)));
  std::vector<Letter> raw;
  while (static_cast<int>(raw.size()) < len) {
    auto code = static_cast<std::uint32_t>(rng.below(2u * static_cast<std::uint64_t>(rank)));
    Letter l{static_cast<std::uint16_t>(code / 2), (code % 2) == 1};
    if (!raw.empty() && raw.back().cancels(l)) continue;
    raw.push_back(l);
  }
  return Word::reduce(raw);
}

Word parse_word(std::string_view text, const Presentation* p) {
  std::vector<Letter> raw;
  std::size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    if (!std::isalpha(static_cast<unsigned char>(ch)))
      throw Error(Errc::Parse, "unexpected character '" + std::string(1, ch) + "' in word");
    bool inv = std::isupper(static_cast<unsigned char>(ch));
    char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    std::size_t j = i + 1;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    int gen;
    if (j > i + 1) {
      if (p == nullptr) throw Error(Errc::Parse, "indexed generator names need a presentation");
      std::string name = std::string(1, lower) + std::string(text.substr(i + 1, j - i - 1));
      auto idx = p->generator_index(name);
      if (!idx) throw Error(Errc::Parse, "unknown generator '" + name + "'");
      gen = *idx;
    } else {
      gen = lower - 'a';
      if (p != nullptr && gen >= p->num_generators())
        throw Error(Errc::Parse, "generator '" + std::string(1, lower) + "' outside the presentation");
    }
    raw.push_back(Letter{static_cast<std::uint16_t>(gen), inv});
    i = j;
  }
  return Word::reduce(raw);
}

std::string format_word(const Word& w, const Presentation& p) {
  std::string out;
  for (Letter l : w.letters()) {
    if (!out.empty()) out += ' ';
    std::string name = p.generator_name(l.gen);
    if (l.inv) name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    out += name;
  }
  return out;
}

std::string format_word_alpha(const Word& w) {
  std::string out;
  for (Letter l : w.letters()) {
    char ch = static_cast<char>('a' + l.gen);
    out += l.inv ? static_cast<char>(std::toupper(static_cast<unsigned char>(ch))) : ch;
  }
  return out;
}

}  // namespace speclab
