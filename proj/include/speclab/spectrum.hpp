#pragma once

// Marked length spectra, length patterns R_g and the genericity scan.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "speclab/fricke.hpp"
#include "speclab/surface_group.hpp"

namespace speclab {

struct SpectrumEntry {
  ConjClassKey key;
  double trace = 0;
  double length = 0;
  /// Set for exact reps.
  std::optional<Rational> exact_trace;
};

struct LengthSpectrum {
  Presentation presentation{1, 1};
  std::vector<SpectrumEntry> entries;
  std::string rep_id;
  int maxlen = 0;
  double tolerance = 0;
  bool exact = false;
};

/// Lengths of the given classes (words over the free basis of the rep).
LengthSpectrum spectrum(const SurfaceRep& rep, std::span<const ConjClassKey> classes, double tau);
/// Enumerates classes up to maxlen first.
LengthSpectrum spectrum(const SurfaceRep& rep, int maxlen, double tau, bool merge_inverse = false);

struct Pattern {
  std::vector<ConjClassKey> classes;
  /// Sorted class indices; blocks ordered by their first index.
  std::vector<std::vector<std::size_t>> blocks;
  /// Smallest length in each block.
  std::vector<double> fingerprints;
  double tolerance = 0;
  /// Built from exact |trace| equality.
  bool exact = false;

  std::size_t block_of(std::size_t cls) const;
};

/// Single-linkage at gap τ on sorted lengths; exact spectra group by |tr|.
Pattern pattern(const LengthSpectrum& s, double tau);

/// Pattern from explicit blocks (indices into classes), canonicalized.
Pattern pattern_from_blocks(std::vector<ConjClassKey> classes, std::vector<std::vector<std::size_t>> blocks,
                            std::vector<double> fingerprints = {});

struct SubrelationReport {
  bool holds = true;
  std::vector<std::pair<ConjClassKey, ConjClassKey>> violations;
};

/// Every block of `finer` inside one block of `coarser`.
SubrelationReport subrelation(const Pattern& finer, const Pattern& coarser);

bool same_partition(const Pattern& x, const Pattern& y);

struct RminPattern {
  Pattern pattern;
  std::vector<std::pair<std::size_t, std::size_t>> probably_equal;
};

/// R_min on a free class set via trace-polynomial identity.
RminPattern rmin_pattern(std::span<const ConjClassKey> classes, int m, std::uint64_t seed, int samples);

struct ScanConfig {
  std::uint64_t seed = 0;
  int trials = 100;
  int m = 2;
  int maxlen = 6;
  double tau = 1e-9;
  /// Prepends the modular torus as trial 0 (m = 2 only).
  bool inject_arithmetic = false;
  int workers = 0;
  int rmin_samples = 20;
  SchottkyParams sampler;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string source;
  std::string rep_digest;
  std::size_t classes = 0;
  std::size_t n_blocks_g = 0;
  std::size_t n_blocks_min = 0;
  bool collapsed = false;
  std::vector<std::pair<ConjClassKey, ConjClassKey>> violations;
};

struct ScanReport {
  Presentation presentation{1, 1};
  std::vector<TrialRecord> trials;
  std::size_t probably_equal_pairs = 0;
};

/// `classes` overrides enumeration (used by the CLI cache).
ScanReport scan_generic(const ScanConfig& config,
                        std::optional<std::vector<ConjClassKey>> classes = std::nullopt);

std::string to_json_line(const TrialRecord& t, const Presentation& p);

/// "class,trace,length" rows.
std::string spectrum_csv(const LengthSpectrum& s);
/// One {"class","trace","length"} object per line.
std::string spectrum_jsonl(const LengthSpectrum& s);

/// Runs f(0..count-1) over a bounded pool; workers <= 0 means hardware concurrency.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& f);

}  // namespace speclab
