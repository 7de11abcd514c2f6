#pragma once

// Batch front end: argument and config parsing, input resolution, the class
// cache and the subcommand drivers behind the `speclab` tool.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "speclab/fricke.hpp"
#include "speclab/surface_group.hpp"

namespace speclab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitVerification = 2;

struct RunConfig {
  std::string command;
  /// Input sources; `compare` takes two (finer, coarser), the rest at most one.
  std::vector<std::string> inputs;
  int rank = 2;
  int maxlen = 6;
  double tau = 1e-9;
  int trials = 100;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  int rmin_samples = 20;
  int workers = 0;
  bool inject_arithmetic = false;
  bool merge_inverse = false;
  bool cusped = false;
  std::vector<std::string> words;
  std::string output;
  std::string format = "jsonl";
};

/// Field-level configuration error.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Checks the command-independent invariants of a config.
void validate(const RunConfig& config);

/// Digest of everything that determines the payload (not output path or workers).
std::string config_digest(const RunConfig& config);

/// Resolves `schottky:SEED[:cusped]`, `fricke:G:N:v1,v2,...`, `rep:PATH` or
/// `preset:modular-torus`.
SurfaceRep resolve_input(const std::string& source, int rank);

/// Class list for (g, n, maxlen), read from or written to the directory in
/// SPECLAB_CACHE_DIR when that is set.
std::vector<ConjClassKey> cached_classes(const Presentation& p, int maxlen, bool merge_inverse = false);

/// Executes a validated config.  Payload goes to `out` (or the output file),
/// diagnostics to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full entry point: parses argv (and `--config FILE`), then runs.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace speclab::cli
