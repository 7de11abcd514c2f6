#include "horowitz_exact.hpp"

#include <array>
#include <bit>
#include <chrono>
#include <limits>
#include <map>
#include <unordered_map>
#include <vector>

#include "speclab/characters.hpp"
#include "speclab/rng.hpp"
#include "speclab/surface_group.hpp"

namespace speclab::testing {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

constexpr int kMaxLen = 12;

// Generator numerators N with det N = D^2; the represented matrix is N / D.
// Letter code 2g is N_g, 2g + 1 its adjugate (the inverse times D).
struct RationalRep {
  i64 den = 1;
  std::vector<std::array<i64, 4>> letters;
};

i64 pick(CounterRng& rng, i64 bound) {
  return static_cast<i64>(rng.below(static_cast<std::uint64_t>(2 * bound + 1))) - bound;
}

RationalRep random_rep(CounterRng& rng, int m) {
  RationalRep rep;
  rep.den = 1 + static_cast<i64>(rng.below(6));
  const i64 bound = 3 * rep.den;
  for (int g = 0; g < m; ++g) {
    for (;;) {
      i64 a = pick(rng, bound), b = pick(rng, bound), c = pick(rng, bound);
      if (a == 0) continue;
      i64 num = rep.den * rep.den + b * c;
      if (num % a != 0) continue;
      i64 d = num / a;
      if (d < -bound || d > bound) continue;
      rep.letters.push_back({a, b, c, d});
      rep.letters.push_back({d, -b, -c, a});
      break;
    }
  }
  return rep;
}

// Class of a reduced word up to conjugation and inversion, as an integer.
std::uint64_t class_key(const std::uint8_t* w, int n) {
  int lo = 0, hi = n;
  while (hi - lo >= 2 && (w[lo] ^ 1) == w[hi - 1]) {
    ++lo;
    --hi;
  }
  int len = hi - lo;
  std::uint8_t fwd[kMaxLen], bwd[kMaxLen];
  for (int i = 0; i < len; ++i) {
    fwd[i] = w[lo + i];
    bwd[i] = w[hi - 1 - i] ^ 1;
  }
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (const std::uint8_t* src : {fwd, bwd}) {
    for (int r = 0; r < len; ++r) {
      std::uint64_t key = 0;
      for (int i = 0; i < len; ++i) key = (key << 4) | (src[(r + i) % len] + 1u);
      best = std::min(best, key);
    }
  }
  return best | (static_cast<std::uint64_t>(len) << 56);
}

Word key_word(std::uint64_t key) {
  int len = static_cast<int>(key >> 56);
  std::vector<Letter> raw(static_cast<std::size_t>(len));
  for (int i = len - 1; i >= 0; --i) {
    unsigned code = static_cast<unsigned>(key & 0xf) - 1;
    raw[static_cast<std::size_t>(i)] = Letter{static_cast<std::uint16_t>(code / 2), (code & 1) != 0};
    key >>= 4;
  }
  return Word::reduce(raw);
}

// Calls visit(depth, letters) for every reduced word of length 1..maxlen in
// a fixed depth-first order.
template <class Visit>
void for_each_word(int m, int maxlen, Visit&& visit) {
  std::uint8_t w[kMaxLen];
  auto rec = [&](auto&& self, int depth) -> void {
    for (int code = 0; code < 2 * m; ++code) {
      if (depth > 0 && (w[depth - 1] ^ 1) == code) continue;
      w[depth] = static_cast<std::uint8_t>(code);
      visit(depth + 1, w);
      if (depth + 1 < maxlen) self(self, depth + 1);
    }
  };
  rec(rec, 0);
}

struct CompactPoly {
  int length = 0;
  std::vector<std::pair<std::uint32_t, i64>> terms;  // (monomial id, coefficient)
};

std::string describe(const Word& w) { return format_word_alpha(w); }

}  // namespace

HorowitzReport check_horowitz_exact(int m, int maxlen, int reps, std::uint64_t seed, int batch) {
  auto start = std::chrono::steady_clock::now();
  HorowitzReport report;
  report.m = m;
  report.maxlen = maxlen;
  report.reps = static_cast<std::size_t>(reps);
  if (maxlen > 10 || m > 3 || m < 1) {
    report.first_failure = "harness supports m <= 3, maxlen <= 10";
    report.mismatches = 1;
    return report;
  }

  // Pass 1: class index of every word, in visiting order.
  std::unordered_map<std::uint64_t, std::uint32_t> index;
  std::vector<std::uint64_t> keys;
  std::vector<std::uint32_t> node_class;
  for_each_word(m, maxlen, [&](int depth, const std::uint8_t* w) {
    std::uint64_t key = class_key(w, depth);
    auto [it, fresh] = index.try_emplace(key, static_cast<std::uint32_t>(keys.size()));
    if (fresh) keys.push_back(key);
    node_class.push_back(it->second);
  });
  index.clear();
  report.words = node_class.size();
  report.classes = keys.size();

  // Pass 2: compact polynomials over a shared monomial table.
  std::map<Monomial, std::uint32_t, bool (*)(const Monomial&, const Monomial&)> mono_ids(
      [](const Monomial& x, const Monomial& y) {
        return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end(),
                                            [](const auto& p, const auto& q) {
                                              if (p.first.mask != q.first.mask) return p.first.mask < q.first.mask;
                                              return p.second < q.second;
                                            });
      });
  std::vector<Monomial> monos;
  std::vector<int> mono_weight;
  std::vector<CompactPoly> polys(keys.size());
  {
    TraceEngine engine(static_cast<std::size_t>(std::max(1, maxlen - 1)));
    for (std::size_t k = 0; k < keys.size(); ++k) {
      Word w = key_word(keys[k]);
      auto poly = engine.trace_poly(w);
      CompactPoly& cp = polys[k];
      cp.length = static_cast<int>(w.size());
      for (const auto& term : poly->terms()) {
        auto [it, fresh] = mono_ids.try_emplace(term.mono, static_cast<std::uint32_t>(monos.size()));
        if (fresh) {
          monos.push_back(term.mono);
          int weight = 0;
          for (const auto& [var, exp] : term.mono) weight += std::popcount(var.mask) * static_cast<int>(exp);
          mono_weight.push_back(weight);
        }
        if (mono_weight[it->second] > cp.length) ++report.degree_violations;
        if (!term.coeff.fits_slong_p()) {
          ++report.mismatches;
          if (report.first_failure.empty()) report.first_failure = "coefficient overflow in " + describe(w);
          continue;
        }
        cp.terms.emplace_back(it->second, term.coeff.get_si());
      }
    }
  }
  if (report.degree_violations > 0) {
    if (report.first_failure.empty()) report.first_failure = "weighted degree exceeds word length";
    report.mismatches += report.degree_violations;
    return report;
  }

  CounterRng root(seed);
  std::vector<RationalRep> all_reps;
  for (int r = 0; r < reps; ++r) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(r));
    all_reps.push_back(random_rep(rng, m));
  }

  // Every trace is compared at the common scale D^maxlen.
  const i64 kBad = std::numeric_limits<i64>::min();
  const std::size_t nm = monos.size();
  for (int first = 0; first < reps; first += batch) {
    const int count = std::min(batch, reps - first);
    const auto cnt = static_cast<std::size_t>(count);
    std::vector<std::vector<i64>> den_pows(static_cast<std::size_t>(maxlen + 1));
    for (int j = 0; j < count; ++j) {
      i64 p = 1;
      for (int e = 0; e <= maxlen; ++e) {
        den_pows[static_cast<std::size_t>(e)].push_back(p);
        p *= all_reps[static_cast<std::size_t>(first + j)].den;
      }
    }

    // scaled[id * count + j] = monomial id at rep j, times D^(maxlen - weight).
    std::vector<i128> scaled(nm * cnt);
    for (int j = 0; j < count; ++j) {
      const RationalRep& rep = all_reps[static_cast<std::size_t>(first + j)];
      std::vector<i64> basic(std::size_t{1} << m);
      for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        std::array<i64, 4> p{1, 0, 0, 1};
        for (int g = 0; g < m; ++g) {
          if (!(mask & (1u << g))) continue;
          const auto& x = rep.letters[2 * static_cast<std::size_t>(g)];
          p = {p[0] * x[0] + p[1] * x[2], p[0] * x[1] + p[1] * x[3], p[2] * x[0] + p[3] * x[2],
               p[2] * x[1] + p[3] * x[3]};
        }
        basic[mask] = p[0] + p[3];
      }
      for (std::size_t id = 0; id < nm; ++id) {
        i128 v = den_pows[static_cast<std::size_t>(maxlen - mono_weight[id])][static_cast<std::size_t>(j)];
        for (const auto& [var, exp] : monos[id])
          for (std::uint32_t e = 0; e < exp; ++e) v *= basic[var.mask];
        scaled[id * cnt + static_cast<std::size_t>(j)] = v;
      }
    }

    std::vector<i64> expected(keys.size() * cnt);
    std::vector<i128> acc(cnt);
    for (std::size_t k = 0; k < keys.size(); ++k) {
      std::fill(acc.begin(), acc.end(), 0);
      for (const auto& [id, coeff] : polys[k].terms) {
        const i128* row = &scaled[id * cnt];
        for (std::size_t j = 0; j < cnt; ++j) acc[j] += coeff * row[j];
      }
      for (std::size_t j = 0; j < cnt; ++j) {
        bool fits = acc[j] > std::numeric_limits<i64>::min() && acc[j] <= std::numeric_limits<i64>::max();
        expected[k * cnt + j] = fits ? static_cast<i64>(acc[j]) : kBad;
      }
    }

    // Pass 3: prefix products over the same word order.
    struct Column {
      std::vector<i64> a, b, c, d;
    };
    std::vector<Column> depth_prod(static_cast<std::size_t>(maxlen + 1));
    for (auto& col : depth_prod) {
      col.a.assign(static_cast<std::size_t>(count), 0);
      col.b = col.c = col.d = col.a;
    }
    for (int j = 0; j < count; ++j) {
      depth_prod[0].a[static_cast<std::size_t>(j)] = 1;
      depth_prod[0].d[static_cast<std::size_t>(j)] = 1;
    }
    std::vector<std::array<std::vector<i64>, 4>> letter(static_cast<std::size_t>(2 * m));
    for (int code = 0; code < 2 * m; ++code)
      for (int e = 0; e < 4; ++e)
        for (int j = 0; j < count; ++j)
          letter[static_cast<std::size_t>(code)][static_cast<std::size_t>(e)].push_back(
              all_reps[static_cast<std::size_t>(first + j)].letters[static_cast<std::size_t>(code)][static_cast<std::size_t>(e)]);

    std::size_t node = 0;
    for_each_word(m, maxlen, [&](int depth, const std::uint8_t* w) {
      const Column& prev = depth_prod[static_cast<std::size_t>(depth - 1)];
      Column& cur = depth_prod[static_cast<std::size_t>(depth)];
      const auto& x = letter[w[depth - 1]];
      const i64* xa = x[0].data();
      const i64* xb = x[1].data();
      const i64* xc = x[2].data();
      const i64* xd = x[3].data();
      std::uint32_t cls = node_class[node];
      const i64* exp = &expected[cls * static_cast<std::size_t>(count)];
      const i64* lift = den_pows[static_cast<std::size_t>(maxlen - depth)].data();
      bool bad = false;
      for (int j = 0; j < count; ++j) {
        i64 pa = prev.a[j], pb = prev.b[j], pc = prev.c[j], pd = prev.d[j];
        cur.a[j] = pa * xa[j] + pb * xc[j];
        cur.b[j] = pa * xb[j] + pb * xd[j];
        cur.c[j] = pc * xa[j] + pd * xc[j];
        cur.d[j] = pc * xb[j] + pd * xd[j];
        bad |= (cur.a[j] + cur.d[j]) * lift[j] != exp[j];
      }
      if (bad) {
        for (int j = 0; j < count; ++j) {
          if ((cur.a[j] + cur.d[j]) * lift[j] == exp[j]) continue;
          ++report.mismatches;
          if (report.first_failure.empty()) {
            std::vector<Letter> raw;
            for (int i = 0; i < depth; ++i) raw.push_back(Letter{static_cast<std::uint16_t>(w[i] / 2), (w[i] & 1) != 0});
            report.first_failure = "word " + describe(Word::reduce(raw)) + " rep " + std::to_string(first + j);
          }
        }
      }
      ++node;
    });
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace speclab::testing
