// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "horowitz_exact.hpp"
#include "speclab/boundary.hpp"
#include "speclab/characters.hpp"
#include "speclab/cli.hpp"
#include "speclab/fricke.hpp"
#include "speclab/spectrum.hpp"

using namespace speclab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome a1() {
  auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = true;
  for (int m : {2, 3}) {
    auto r = testing::check_horowitz_exact(m, 10, 200, 1000 + m);
    pass = pass && r.mismatches == 0 && r.degree_violations == 0 && r.words > 0;
    detail += fmt("m=%d words=%zu classes=%zu reps=%zu mismatches=%zu; ", m, r.words, r.classes, r.reps, r.mismatches);
    if (!r.first_failure.empty()) detail += "first failure " + r.first_failure + "; ";
  }
  double secs = seconds_since(t0);
  pass = pass && secs < 120;
  return {pass, detail + fmt("%.1fs (limit 120s)", secs)};
}

Outcome a2() {
  SchottkyParams cusped;
  cusped.mode = SchottkyParams::Mode::Cusped;
  double worst_relator = 0, worst_trace = 0;
  int built = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SurfaceRep sample = schottky_sample(seed, seed < 25 ? 2 : 4, cusped);
    SurfaceRep norm = conjugate_rep(fricke_normalizer(sample), sample);
    SurfaceRep rebuilt = rep_from_fricke(fricke_from_rep(norm));
    ++built;
    worst_relator = std::max(worst_relator, rebuilt.validity.relator_defect);
    for (std::size_t i = 0; i < sample.generators.size(); ++i)
      worst_trace = std::max(worst_trace, std::fabs(std::fabs(rebuilt.generators[i].trace()) -
                                                    std::fabs(sample.generators[i].trace())));
  }
  bool pass = built == 50 && worst_relator < 1e-8 && worst_trace < 1e-7;
  return {pass, fmt("reps=%d (25 genus 1, 25 genus 2) relator=%.3e (<1e-8) trace=%.3e (<1e-7)", built,
                    worst_relator, worst_trace)};
}

Outcome a3() {
  double worst = 0;
  int reps = 0, words = 0;
  for (int m : {2, 3}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      SurfaceRep rep = schottky_sample(300 + seed, m);
      CounterRng rng(400 + seed);
      int found = 0;
      for (int tries = 0; found < 50 && tries < 1000; ++tries) {
        Mat2d g = evaluate<double>(random_reduced_word(rng, m, 1, 8), rep.basis());
        if (classify(g) != IsometryClass::Hyperbolic) continue;
        ++found;
        double expected = 2 * std::acosh(std::fabs(g.trace()) / 2);
        worst = std::max(worst, std::fabs(busemann(g, fixed_points(g).first) - expected));
      }
      ++reps;
      words += found;
    }
  }
  return {words == 50 * reps && worst < 1e-8, fmt("reps=%d words=%d max=%.3e (<1e-8)", reps, words, worst)};
}

Outcome a4() {
  static const std::set<std::string> identities{
      "cocycle_identity",   "pairing_identity", "antisymmetry_at_poles", "recover_cocycle",
      "recover_cocycle_aux_independence", "step1_identity", "step1_paired_limit", "northsouth_limits"};
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  std::size_t min_samples = SIZE_MAX;
  std::set<std::string> seen;
  bool all_pass = true;
  for (int m : {2, 3}) {
    for (const auto& r : cocycle_verify(schottky_sample(500 + m, m), 600 + m, 1000)) {
      all_pass = all_pass && r.pass;
      if (!identities.count(r.check)) continue;
      seen.insert(r.check);
      worst = std::max(worst, r.max_defect);
      min_samples = std::min(min_samples, r.samples);
    }
  }
  double secs = seconds_since(t0);
  bool pass = all_pass && seen == identities && worst < 1e-7 && min_samples >= 1000 && secs < 60;
  return {pass, fmt("checks=%zu max=%.3e (<1e-7) min_samples=%zu %.1fs (limit 60s)", seen.size(), worst,
                    min_samples, secs)};
}

Outcome a5() {
  SurfaceRep rep = schottky_sample(700, 2);
  std::vector<Word> words;
  for (const auto& key : enumerate_classes(rep.presentation, 6)) words.push_back(key.word);
  CounterRng rng(701);
  double worst_len = 0, worst_cob = 0;
  for (int k = 0; k < 20; ++k) {
    PullbackReport r = pullback_cocycle_test(rep, random_real_sl2(rng), words, 800 + k, 200);
    worst_len = std::max(worst_len, r.length_defect);
    worst_cob = std::max(worst_cob, r.coboundary_defect);
  }
  return {worst_len < 1e-8 && worst_cob < 1e-7,
          fmt("conjugators=20 words=%zu lengths=%.3e (<1e-8) coboundary=%.3e (<1e-7)", words.size(), worst_len,
              worst_cob)};
}

Outcome a6() {
  ScanConfig cfg;
  cfg.seed = 1;
  cfg.trials = 100;
  cfg.m = 2;
  cfg.maxlen = 6;
  cfg.tau = 1e-9;
  ScanReport r = scan_generic(cfg);
  int violating = 0, collapsed = 0;
  for (const auto& t : r.trials) {
    violating += !t.violations.empty();
    collapsed += t.collapsed;
  }
  bool pass = r.trials.size() == 100 && violating == 0 && collapsed >= 95;
  return {pass, fmt("trials=%zu violating=%d (=0) collapsed=%d (>=95)", r.trials.size(), violating, collapsed)};
}

Outcome a7() {
  SurfaceRep torus = modular_torus();
  LengthSpectrum s = spectrum(torus, 4, 1e-9);
  Pattern p = pattern(s, 1e-9);
  for (const auto& block : p.blocks)
    for (std::size_t i = 0; i < block.size(); ++i)
      for (std::size_t j = i + 1; j < block.size(); ++j) {
        const Word& x = s.entries[block[i]].key.word;
        const Word& y = s.entries[block[j]].key.word;
        RminVerdict v = rmin_test(x, y, 2, 900, 20);
        if (v.kind != RminVerdict::Kind::Distinct) continue;
        return {true, fmt("%s ~ %s, |tr| = %s, rmin Distinct (%s vs %s)", format_word_alpha(x).c_str(),
                          format_word_alpha(y).c_str(), Rational(abs(*s.entries[block[i]].exact_trace)).get_str().c_str(),
                          v.squared_trace_1->get_str().c_str(), v.squared_trace_2->get_str().c_str())};
      }
  return {false, "no R_g pair separated by rmin_test"};
}

std::string run_cli(const std::vector<std::string>& args, int& code) {
  std::vector<const char*> argv{"speclab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome a8() {
  fs::path dir = fs::temp_directory_path() / ("speclab-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> commands{
      {"scan", "--trials", "30", "--maxlen", "5", "--seed", "17"},
      {"scan", "--trials", "10", "--maxlen", "4", "--seed", "18", "--rank", "3"},
      {"scan", "--trials", "10", "--maxlen", "4", "--seed", "19", "--cusped", "--inject-arithmetic"},
      {"sample", "--seed", "20"},
      {"sample", "--seed", "21", "--rank", "4", "--cusped"},
      {"cocycle-verify", "--seed", "22", "--samples", "300"},
      {"rmin", "--maxlen", "4", "--seed", "23"},
      {"rmin", "--word", "aabaB", "--word", "aaBab", "--word", "ab", "--seed", "24"},
      {"compare", "--finer", "rmin", "--coarser", "schottky:25", "--maxlen", "4", "--seed", "25"},
      {"spectrum", "--input", "schottky:26", "--maxlen", "4", "--format", "csv"},
      {"pattern", "--input", "schottky:27:cusped", "--maxlen", "4"},
  };
  int identical = 0;
  std::string first_diff;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    int c1 = -1, c2 = -1, c3 = -1;
    std::string x = run_cli(commands[i], c1);
    std::string y = run_cli(commands[i], c2);
    auto with_file = commands[i];
    fs::path file = dir / ("out" + std::to_string(i));
    with_file.insert(with_file.end(), {"--output", file.string()});
    run_cli(with_file, c3);
    bool same = c1 == 0 && c2 == 0 && c3 == 0 && !x.empty() && x == y && slurp(file) == x;
    if (commands[i][0] == "scan") {
      auto serial = commands[i];
      serial.insert(serial.end(), {"--workers", "1"});
      int c4 = -1;
      same = same && run_cli(serial, c4) == x && c4 == 0;
    }
    if (same)
      ++identical;
    else if (first_diff.empty())
      first_diff = commands[i][0];
  }
  fs::remove_all(dir);
  std::string detail = fmt("commands=%zu identical=%d", commands.size(), identical);
  if (!first_diff.empty()) detail += " first difference in " + first_diff;
  return {identical == static_cast<int>(commands.size()), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8}};
  bool all = true;
  for (const auto& [name, f] : criteria) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s %s %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
