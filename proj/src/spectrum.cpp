#include "speclab/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "speclab/characters.hpp"
#include "speclab/json_writer.hpp"

namespace speclab {

namespace {

std::string trace_text(const SpectrumEntry& e) {
  return e.exact_trace ? e.exact_trace->get_str() : format_double(e.trace);
}

}  // namespace

LengthSpectrum spectrum(const SurfaceRep& rep, std::span<const ConjClassKey> classes, double tau) {
  LengthSpectrum s;
  s.presentation = rep.presentation;
  s.rep_id = rep_digest(rep);
  s.tolerance = tau;
  s.exact = rep.is_exact();
  std::vector<ConjClassKey> sorted(classes.begin(), classes.end());
  std::sort(sorted.begin(), sorted.end());
  for (ConjClassKey& key : sorted) {
    if (key.word.empty()) throw Error(Errc::EmptyWord, "the trivial class has no length");
    s.maxlen = std::max(s.maxlen, static_cast<int>(key.word.size()));
    SpectrumEntry e;
    if (s.exact) {
      Mat2q m = evaluate<Rational>(key.word, std::span<const Mat2q>(*rep.exact));
      if (classify(m) == IsometryClass::Elliptic)
        throw Error(Errc::EllipticClassFound, "elliptic class " + format_word(key.word, rep.presentation));
      e.exact_trace = m.trace();
      e.trace = e.exact_trace->get_d();
      e.length = translation_length(m);
    } else {
      Mat2d m = evaluate<double>(key.word, std::span<const Mat2d>(rep.generators));
      if (classify(m) == IsometryClass::Elliptic)
        throw Error(Errc::EllipticClassFound, "elliptic class " + format_word(key.word, rep.presentation));
      e.trace = m.trace();
      e.length = translation_length(m);
    }
    e.key = std::move(key);
    s.entries.push_back(std::move(e));
  }
  return s;
}

LengthSpectrum spectrum(const SurfaceRep& rep, int maxlen, double tau, bool merge_inverse) {
  auto classes = enumerate_classes(rep.presentation, maxlen, merge_inverse);
  LengthSpectrum s = spectrum(rep, classes, tau);
  s.maxlen = maxlen;
  return s;
}

std::size_t Pattern::block_of(std::size_t cls) const {
  for (std::size_t b = 0; b < blocks.size(); ++b)
    if (std::binary_search(blocks[b].begin(), blocks[b].end(), cls)) return b;
  throw Error(Errc::ClassSetMismatch, "class not covered by the pattern");
}

Pattern pattern_from_blocks(std::vector<ConjClassKey> classes, std::vector<std::vector<std::size_t>> blocks,
                            std::vector<double> fingerprints) {
  if (fingerprints.size() != blocks.size()) fingerprints.assign(blocks.size(), 0.0);
  std::vector<std::pair<std::vector<std::size_t>, double>> tagged;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::sort(blocks[b].begin(), blocks[b].end());
    tagged.emplace_back(std::move(blocks[b]), fingerprints[b]);
  }
  std::sort(tagged.begin(), tagged.end(),
            [](const auto& x, const auto& y) { return x.first.front() < y.first.front(); });
  Pattern p;
  p.classes = std::move(classes);
  for (auto& [block, fp] : tagged) {
    p.blocks.push_back(std::move(block));
    p.fingerprints.push_back(fp);
  }
  return p;
}

Pattern pattern(const LengthSpectrum& s, double tau) {
  std::vector<ConjClassKey> classes;
  for (const auto& e : s.entries) classes.push_back(e.key);
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<double> fps;
  if (s.exact) {
    std::map<Rational, std::size_t> by_trace;
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      Rational t = abs(*s.entries[i].exact_trace);
      auto [it, fresh] = by_trace.try_emplace(t, blocks.size());
      if (fresh) {
        blocks.emplace_back();
        fps.push_back(s.entries[i].length);
      }
      blocks[it->second].push_back(i);
    }
  } else {
    std::vector<std::size_t> order(s.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return s.entries[x].length < s.entries[y].length;
    });
    for (std::size_t k = 0; k < order.size(); ++k) {
      double len = s.entries[order[k]].length;
      if (k == 0 || len - s.entries[order[k - 1]].length > tau) {
        blocks.emplace_back();
        fps.push_back(len);
      }
      blocks.back().push_back(order[k]);
    }
  }
  Pattern p = pattern_from_blocks(std::move(classes), std::move(blocks), std::move(fps));
  p.tolerance = tau;
  p.exact = s.exact;
  return p;
}

SubrelationReport subrelation(const Pattern& finer, const Pattern& coarser) {
  std::vector<ConjClassKey> a = finer.classes, b = coarser.classes;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw Error(Errc::ClassSetMismatch, "patterns cover different class sets");
  std::map<ConjClassKey, std::size_t> coarse_block;
  for (std::size_t bl = 0; bl < coarser.blocks.size(); ++bl)
    for (std::size_t i : coarser.blocks[bl]) coarse_block[coarser.classes[i]] = bl;
  SubrelationReport r;
  for (const auto& block : finer.blocks) {
    for (std::size_t x = 0; x < block.size(); ++x)
      for (std::size_t y = x + 1; y < block.size(); ++y) {
        const ConjClassKey& kx = finer.classes[block[x]];
        const ConjClassKey& ky = finer.classes[block[y]];
        if (coarse_block.at(kx) != coarse_block.at(ky)) r.violations.emplace_back(kx, ky);
      }
  }
  r.holds = r.violations.empty();
  return r;
}

bool same_partition(const Pattern& x, const Pattern& y) {
  return x.blocks.size() == y.blocks.size() && subrelation(x, y).holds;
}

RminPattern rmin_pattern(std::span<const ConjClassKey> classes, int m, std::uint64_t seed, int samples) {
  RminPartition part = rmin_pairs(classes, m, seed, samples);
  RminPattern out;
  out.pattern = pattern_from_blocks(std::vector<ConjClassKey>(classes.begin(), classes.end()),
                                    std::move(part.blocks));
  out.pattern.exact = true;
  out.probably_equal = std::move(part.probably_equal);
  return out;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& f) {
  std::size_t n = workers > 0 ? static_cast<std::size_t>(workers)
                              : std::max(1u, std::thread::hardware_concurrency());
  n = std::min(n, count);
  if (n <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

ScanReport scan_generic(const ScanConfig& config, std::optional<std::vector<ConjClassKey>> classes) {
  if (config.trials < 1) throw Error(Errc::InvalidRepresentation, "scan needs at least one trial");
  if (config.inject_arithmetic && config.m != 2)
    throw Error(Errc::InvalidRepresentation, "the arithmetic point exists for m = 2 only");
  ScanReport report;
  report.presentation = schottky_presentation(config.m);
  if (!classes) classes = enumerate_classes(report.presentation, config.maxlen);
  RminPattern rmin = rmin_pattern(*classes, config.m, config.seed, config.rmin_samples);
  report.probably_equal_pairs = rmin.probably_equal.size();

  int offset = config.inject_arithmetic ? 1 : 0;
  std::size_t total = static_cast<std::size_t>(config.trials + offset);
  report.trials.resize(total);
  parallel_for(total, config.workers, [&](std::size_t idx) {
    TrialRecord& t = report.trials[idx];
    t.trial = static_cast<int>(idx);
    SurfaceRep rep;
    if (config.inject_arithmetic && idx == 0) {
      t.source = "arithmetic";
      t.seed = config.seed;
      rep = modular_torus();
    } else {
      t.source = "schottky";
      t.seed = config.seed ^ static_cast<std::uint64_t>(idx);
      rep = schottky_sample(t.seed, config.m, config.sampler);
    }
    t.rep_digest = rep_digest(rep);
    Pattern g = pattern(spectrum(rep, *classes, config.tau), config.tau);
    SubrelationReport sub = subrelation(rmin.pattern, g);
    t.classes = classes->size();
    t.n_blocks_g = g.blocks.size();
    t.n_blocks_min = rmin.pattern.blocks.size();
    t.collapsed = sub.holds && t.n_blocks_g == t.n_blocks_min;
    t.violations = std::move(sub.violations);
  });
  return report;
}

std::string to_json_line(const TrialRecord& t, const Presentation& p) {
  JsonWriter w;
  w.begin_object()
      .field("trial", t.trial)
      .field("seed", static_cast<unsigned long long>(t.seed))
      .field("source", t.source)
      .field("rep_digest", t.rep_digest)
      .field("classes", t.classes)
      .field("n_blocks_g", t.n_blocks_g)
      .field("n_blocks_min", t.n_blocks_min)
      .field("collapsed", t.collapsed);
  w.key("violations").begin_array();
  for (const auto& [x, y] : t.violations)
    w.begin_array().value(format_word(x.word, p)).value(format_word(y.word, p)).end_array();
  w.end_array().end_object();
  return w.str();
}

std::string spectrum_csv(const LengthSpectrum& s) {
  std::string out = "class,trace,length\n";
  for (const auto& e : s.entries)
    out += format_word(e.key.word, s.presentation) + "," + trace_text(e) + "," + format_double(e.length) + "\n";
  return out;
}

std::string spectrum_jsonl(const LengthSpectrum& s) {
  std::string out;
  for (const auto& e : s.entries) {
    JsonWriter w;
    w.begin_object().field("class", format_word(e.key.word, s.presentation));
    w.key("trace");
    if (e.exact_trace)
      w.value(e.exact_trace->get_str());
    else
      w.value(e.trace);
    w.field("length", e.length).end_object();
    out += w.str() + "\n";
  }
  return out;
}

}  // namespace speclab
