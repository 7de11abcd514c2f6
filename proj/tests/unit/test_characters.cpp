#include <doctest.h>

#include <map>
#include <set>

#include "horowitz_exact.hpp"
#include "speclab/characters.hpp"
#include "speclab/surface_group.hpp"

using namespace speclab;

namespace {

Word W(std::string_view s) { return parse_word(s); }

CharVar var(std::initializer_list<int> indices) {
  CharVar v;
  for (int i : indices) v.mask |= 1u << i;
  return v;
}

Rational exact_trace(const Word& w, std::span<const Mat2q> g) { return evaluate<Rational>(w, g).trace(); }

// Sign-free key: P and -P give the same squared polynomial.
std::string square_key(const TracePoly& p) {
  if (!p.is_zero() && sgn(p.terms()[0].coeff) < 0) return (-p).to_string();
  return p.to_string();
}

}  // namespace

TEST_CASE("basis words are single variables") {
  CHECK(trace_poly(W("a"), 2) == TracePoly::variable(var({0})));
  CHECK(trace_poly(W("b"), 2) == TracePoly::variable(var({1})));
  CHECK(trace_poly(W("ba"), 2) == TracePoly::variable(var({0, 1})));
  CHECK(trace_poly(W("ab"), 2) == TracePoly::variable(var({0, 1})));
  CHECK(trace_poly(W("abc"), 3) == TracePoly::variable(var({0, 1, 2})));
  CHECK(trace_poly(W("ac"), 3) == TracePoly::variable(var({0, 2})));
  CHECK(trace_poly(W("a"), 2).to_string() == "+1*t{1}");
  CHECK(trace_poly(W("ba"), 2).to_string() == "+1*t{1,2}");
}

TEST_CASE("variables and their order") {
  CHECK(var({0}).name() == "t{1}");
  CHECK(var({0, 2}).name() == "t{1,3}");
  CHECK(var({0}) < var({1}));
  CHECK(var({2}) < var({0, 1}));
  CHECK(var({0, 1}) < var({0, 2}));
  CHECK(var({0, 2}) < var({1, 2}));
  CHECK(var({1, 2}) < var({0, 1, 2}));
}

TEST_CASE("commutator polynomial") {
  TracePoly t1 = TracePoly::variable(var({0})), t2 = TracePoly::variable(var({1}));
  TracePoly t12 = TracePoly::variable(var({0, 1}));
  TracePoly expected = t1 * t1 + t2 * t2 + t12 * t12 - t1 * t2 * t12 - TracePoly::constant(2);
  TracePoly p = trace_poly(W("abAB"), 2);
  CHECK(p == expected);
  CHECK(p.total_degree() == 3);
  CHECK(p.to_string() == "-1*t{1}*t{2}*t{1,2} +1*t{1}^2 +1*t{2}^2 +1*t{1,2}^2 -2");

  CounterRng rng(2024);
  for (int k = 0; k < 200; ++k) {
    std::vector<Mat2q> g{random_rational_sl2(rng), random_rational_sl2(rng)};
    std::span<const Mat2q> gs(g);
    Rational lhs = eval_trace_poly<Rational>(p, gs, 2);
    CHECK(lhs == exact_trace(W("abAB"), gs));
    // Closed form, independent of the engine.
    Rational a = g[0].trace(), b = g[1].trace(), ab = (g[0] * g[1]).trace();
    CHECK(lhs == a * a + b * b + ab * ab - a * b * ab - 2);
  }
}

TEST_CASE("polynomial arithmetic") {
  TracePoly x = TracePoly::variable(var({0})), y = TracePoly::variable(var({1}));
  CHECK((x - x).is_zero());
  CHECK((x + y) * (x - y) == x * x - y * y);
  CHECK((x * y) * TracePoly::constant(3) == TracePoly::constant(3) * (y * x));
  CHECK(-(x + y) == TracePoly::constant(-1) * (x + y));
  CHECK(TracePoly{}.to_string() == "0");
  CHECK(TracePoly::constant(0).is_zero());
}

TEST_CASE("empty word and simple evaluations") {
  TracePoly two = trace_poly(Word{}, 2);
  CHECK(two == TracePoly::constant(2));
  CHECK(two.to_string() == "+2");

  CounterRng rng(8);
  std::vector<Mat2q> g{random_rational_sl2(rng), random_rational_sl2(rng)};
  std::span<const Mat2q> gs(g);
  CHECK(eval_trace_poly<Rational>(two, gs, 2) == 2);
  CHECK(eval_trace_poly<Rational>(trace_poly(W("a"), 2), gs, 2) == g[0].trace());

  std::vector<Mat2d> gd{to_double(g[0]), to_double(g[1])};
  std::span<const Mat2d> gds(gd);
  double t = eval_trace_poly<double>(trace_poly(W("aabAbb"), 2), gds, 2);
  CHECK(t == doctest::Approx(evaluate<double>(W("aabAbb"), gds).trace()).epsilon(1e-9));
}

TEST_CASE("random words evaluate exactly") {
  CounterRng rng(77);
  for (int m : {2, 3}) {
    for (int k = 0; k < 150; ++k) {
      std::vector<Mat2q> g;
      for (int i = 0; i < m; ++i) g.push_back(random_rational_sl2(rng));
      std::span<const Mat2q> gs(g);
      Word w = random_reduced_word(rng, m, 0, 10);
      TracePoly p = trace_poly(w, m);
      if (eval_trace_poly<Rational>(p, gs, m) != exact_trace(w, gs))
        FAIL("defect for " << format_word_alpha(w) << " at m=" << m);
      CHECK(p.total_degree() <= std::max<std::size_t>(w.size(), 0));
    }
  }
}

TEST_CASE("conjugation and inversion leave the polynomial unchanged") {
  CounterRng rng(99);
  for (int k = 0; k < 1000; ++k) {
    int m = 2 + static_cast<int>(rng.below(2));
    Word w = random_reduced_word(rng, m, 1, 7);
    Word u = random_reduced_word(rng, m, 1, 3);
    TracePoly p = trace_poly(w, m);
    CHECK(trace_poly(u * w * u.inverse(), m) == p);
    CHECK(trace_poly(w.inverse(), m) == p);
  }
}

TEST_CASE("degree is bounded by word length") {
  Presentation p(1, 1);
  for (const auto& key : enumerate_classes(p, 7)) {
    TracePoly poly = trace_poly(key.word, 2);
    CHECK(poly.total_degree() <= key.word.size());
  }
}

TEST_CASE("memo is keyed on trace classes") {
  TraceEngine engine;
  auto p1 = engine.trace_poly(W("aabAB"));
  auto p2 = engine.trace_poly(W("ABaab"));
  auto p3 = engine.trace_poly(W("aabAB").inverse());
  CHECK(*p1 == *p2);
  CHECK(*p1 == *p3);
  CHECK(trace_key(W("ba")) == trace_key(W("ab")));
  CHECK(trace_key(W("BA")) == trace_key(W("ab")));
  CHECK(engine.memo_size() > 0);
  engine.clear();
  CHECK(engine.memo_size() == 0);

  TraceEngine capped(3);
  CHECK(*capped.trace_poly(W("aabAB")) == *p1);
}

TEST_CASE("rmin verdicts") {
  Word w = W("aabAb");
  CHECK(rmin_test(w, W("ba") * w * W("AB"), 2, 1, 20).kind == RminVerdict::Kind::Equal);
  CHECK(rmin_test(w, w.inverse(), 2, 1, 20).kind == RminVerdict::Kind::Equal);

  RminVerdict v = rmin_test(W("a"), W("b"), 2, 1, 20);
  REQUIRE(v.kind == RminVerdict::Kind::Distinct);
  REQUIRE(v.witness.size() == 2);
  REQUIRE(v.squared_trace_1.has_value());
  REQUIRE(v.squared_trace_2.has_value());
  CHECK(*v.squared_trace_1 != *v.squared_trace_2);
  Rational ta = v.witness[0].trace(), tb = v.witness[1].trace();
  CHECK(ta * ta == *v.squared_trace_1);
  CHECK(tb * tb == *v.squared_trace_2);
  CHECK(std::string(to_string(RminVerdict::Kind::ProbablyEqual)) == "ProbablyEqual");
}

TEST_CASE("rmin partition of short classes") {
  Presentation p(1, 1);
  auto classes = enumerate_classes(p, 2);
  REQUIRE(classes.size() == 12);
  RminPartition part = rmin_pairs(classes, 2, 5, 20);

  std::map<std::string, std::size_t> block_of;
  for (std::size_t b = 0; b < part.blocks.size(); ++b)
    for (std::size_t i : part.blocks[b]) block_of[format_word_alpha(classes[i].word)] = b;
  REQUIRE(block_of.size() == 12);
  CHECK(block_of.at("a") == block_of.at("A"));
  CHECK(block_of.at("b") == block_of.at("B"));
  CHECK(block_of.at("a") != block_of.at("b"));
  CHECK(block_of.at("ab") == block_of.at("AB"));
  CHECK(block_of.at("aa") == block_of.at("AA"));
  CHECK(block_of.at("ab") != block_of.at("aB"));
  CHECK(part.probably_equal.empty());

  // Blocks agree with direct polynomial comparison.
  for (std::size_t i = 0; i < classes.size(); ++i)
    for (std::size_t j = i + 1; j < classes.size(); ++j) {
      bool same_poly = square_key(trace_poly(classes[i].word, 2)) == square_key(trace_poly(classes[j].word, 2));
      bool same_block = block_of.at(format_word_alpha(classes[i].word)) ==
                        block_of.at(format_word_alpha(classes[j].word));
      CHECK(same_poly == same_block);
    }
}

TEST_CASE("a non-conjugate pair with identical squared polynomials") {
  // Classes up to inversion; equal polynomials across distinct keys are
  // exactly the nontrivial R_min pairs.
  Presentation p(1, 1);
  std::map<std::string, Word> seen;
  std::optional<std::pair<Word, Word>> found;
  for (const auto& key : enumerate_classes(p, 8, true)) {
    std::string k = square_key(trace_poly(key.word, 2));
    auto [it, inserted] = seen.emplace(k, key.word);
    if (!inserted) {
      found = std::pair{it->second, key.word};
      break;
    }
  }
  REQUIRE(found.has_value());
  auto [x, y] = *found;
  MESSAGE("nontrivial pair: " << format_word_alpha(x) << " ~ " << format_word_alpha(y));
  CHECK_FALSE(canonical_class(x, p, true) == canonical_class(y, p, true));
  CHECK(rmin_test(x, y, 2, 3, 20).kind == RminVerdict::Kind::Equal);
}

TEST_CASE("exhaustive exact check at small length") {
  auto report = speclab::testing::check_horowitz_exact(2, 8, 30, 17);
  CHECK(report.words > 0);
  CHECK(report.mismatches == 0);
  CHECK(report.degree_violations == 0);
  CHECK(report.first_failure.empty());
}
