#include "speclab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "speclab/boundary.hpp"
#include "speclab/characters.hpp"
#include "speclab/error.hpp"
#include "speclab/json_writer.hpp"
#include "speclab/spectrum.hpp"

#ifndef SPECLAB_VERSION
#define SPECLAB_VERSION "0.0.0"
#endif

namespace speclab::cli {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kCommands = {"spectrum", "pattern",        "compare", "tracepoly",
                                            "rmin",     "cocycle-verify", "scan",    "sample"};

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Parse, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Parse, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::Parse, "cannot write " + path.string());
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

long long parse_int(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(Errc::Parse, what + ": expected an integer, got '" + text + "'");
  return v;
}

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    if (!text.empty() && text[0] != '-') v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(Errc::Parse, what + ": expected a seed, got '" + text + "'");
  return v;
}

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw Error(Errc::Parse, what + ": expected a number, got '" + text + "'");
  return v;
}

// Word over the free group of the given rank: bare letters, or surface
// names rewritten into the free basis.
Word parse_free_word(const std::string& text, int rank) {
  bool indexed = std::any_of(text.begin(), text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  Word w;
  if (indexed) {
    Presentation p = schottky_presentation(rank);
    w = to_free_basis(parse_word(text, &p), p);
  } else {
    w = parse_word(text);
  }
  for (Letter l : w.letters())
    if (l.gen >= rank) throw Error(Errc::InvalidWord, "'" + text + "' uses a generator outside rank " + std::to_string(rank));
  return w;
}

bool is_rmin_source(const std::string& s) { return s == "rmin"; }

std::string timestamp_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(const RunConfig& config, const std::string& payload, std::ostream& out) {
  if (config.output.empty()) {
    out << payload;
    return;
  }
  write_file(config.output, payload);
  JsonWriter meta;
  meta.begin_object()
      .field("version", SPECLAB_VERSION)
      .field("command", config.command)
      .field("config_digest", config_digest(config))
      .field("timestamp", timestamp_utc())
      .end_object();
  write_file(config.output + ".meta.json", meta.str() + "\n");
}

// ---------------------------------------------------------------------------
// Subcommands

std::string pattern_payload(const Pattern& pat, const LengthSpectrum& s, const std::string& format) {
  std::vector<double> length(pat.classes.size());
  for (std::size_t i = 0; i < s.entries.size(); ++i) length[i] = s.entries[i].length;
  std::string out;
  if (format == "csv") {
    out = "block,class,length\n";
    for (std::size_t b = 0; b < pat.blocks.size(); ++b)
      for (std::size_t i : pat.blocks[b])
        out += std::to_string(b) + "," + format_word(pat.classes[i].word, s.presentation) + "," +
               format_double(length[i]) + "\n";
    return out;
  }
  for (std::size_t b = 0; b < pat.blocks.size(); ++b) {
    JsonWriter w;
    w.begin_object().field("block", b).field("size", pat.blocks[b].size());
    w.field("fingerprint", b < pat.fingerprints.size() ? pat.fingerprints[b] : length[pat.blocks[b].front()]);
    w.key("classes").begin_array();
    for (std::size_t i : pat.blocks[b]) w.value(format_word(pat.classes[i].word, s.presentation));
    w.end_array().end_object();
    out += w.str() + "\n";
  }
  return out;
}

int cmd_spectrum(const RunConfig& c, std::ostream& out) {
  SurfaceRep rep = resolve_input(c.inputs.at(0), c.rank);
  auto classes = cached_classes(rep.presentation, c.maxlen, c.merge_inverse);
  LengthSpectrum s = spectrum(rep, classes, c.tau);
  s.maxlen = c.maxlen;
  emit(c, c.format == "csv" ? spectrum_csv(s) : spectrum_jsonl(s), out);
  return kExitOk;
}

int cmd_pattern(const RunConfig& c, std::ostream& out) {
  SurfaceRep rep = resolve_input(c.inputs.at(0), c.rank);
  auto classes = cached_classes(rep.presentation, c.maxlen, c.merge_inverse);
  LengthSpectrum s = spectrum(rep, classes, c.tau);
  emit(c, pattern_payload(pattern(s, c.tau), s, c.format), out);
  return kExitOk;
}

int cmd_compare(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const std::string& finer_src = c.inputs.at(0);
  const std::string& coarser_src = c.inputs.at(1);
  std::optional<SurfaceRep> finer_rep, coarser_rep;
  if (!is_rmin_source(finer_src)) finer_rep = resolve_input(finer_src, c.rank);
  if (!is_rmin_source(coarser_src)) coarser_rep = resolve_input(coarser_src, c.rank);
  Presentation p = finer_rep ? finer_rep->presentation : coarser_rep->presentation;
  if (finer_rep && coarser_rep && !(finer_rep->presentation == coarser_rep->presentation))
    throw Error(Errc::ClassSetMismatch, "finer and coarser inputs have different presentations");
  auto classes = cached_classes(p, c.maxlen, c.merge_inverse);

  auto build = [&](const std::optional<SurfaceRep>& rep) {
    if (rep) return pattern(spectrum(*rep, classes, c.tau), c.tau);
    if (!p.is_free()) throw Error(Errc::InvalidRepresentation, "rmin needs a free presentation");
    return rmin_pattern(classes, p.rank(), *c.seed, c.rmin_samples).pattern;
  };
  Pattern finer = build(finer_rep);
  Pattern coarser = build(coarser_rep);
  SubrelationReport r = subrelation(finer, coarser);

  JsonWriter w;
  w.begin_object()
      .field("holds", r.holds)
      .field("classes", classes.size())
      .field("finer_blocks", finer.blocks.size())
      .field("coarser_blocks", coarser.blocks.size());
  w.key("violations").begin_array();
  for (const auto& [x, y] : r.violations)
    w.begin_array().value(format_word(x.word, p)).value(format_word(y.word, p)).end_array();
  w.end_array().end_object();
  emit(c, w.str() + "\n", out);
  if (!r.holds) {
    err << "verification failed: compare: " << r.violations.size()
        << " pairs share a finer block but are split in the coarser pattern\n";
    return kExitVerification;
  }
  return kExitOk;
}

int cmd_tracepoly(const RunConfig& c, std::ostream& out) {
  Word w = parse_free_word(c.words.at(0), c.rank);
  emit(c, trace_poly(w, c.rank).to_string() + "\n", out);
  return kExitOk;
}

std::string mat_json(const Mat2q& m) {
  JsonWriter w;
  w.begin_array().value(m.a.get_str()).value(m.b.get_str()).value(m.c.get_str()).value(m.d.get_str()).end_array();
  return w.str();
}

int cmd_rmin(const RunConfig& c, std::ostream& out) {
  const int samples = c.samples.value_or(20);
  std::string payload;
  if (!c.words.empty()) {
    std::vector<Word> words;
    for (const auto& text : c.words) words.push_back(parse_free_word(text, c.rank));
    for (std::size_t i = 0; i < words.size(); ++i) {
      for (std::size_t j = i + 1; j < words.size(); ++j) {
        RminVerdict v = rmin_test(words[i], words[j], c.rank, *c.seed, samples);
        JsonWriter w;
        w.begin_object()
            .field("w1", format_word_alpha(words[i]))
            .field("w2", format_word_alpha(words[j]))
            .field("verdict", to_string(v.kind));
        if (v.kind == RminVerdict::Kind::Distinct) {
          w.field("squared_trace_1", v.squared_trace_1->get_str())
              .field("squared_trace_2", v.squared_trace_2->get_str());
          w.key("witness").begin_array();
          for (const auto& m : v.witness) w.raw(mat_json(m));
          w.end_array();
        }
        w.end_object();
        payload += w.str() + "\n";
      }
    }
    emit(c, payload, out);
    return kExitOk;
  }

  Presentation p = schottky_presentation(c.rank);
  auto classes = cached_classes(p, c.maxlen, c.merge_inverse);
  RminPattern r = rmin_pattern(classes, c.rank, *c.seed, samples);
  for (std::size_t b = 0; b < r.pattern.blocks.size(); ++b) {
    JsonWriter w;
    w.begin_object().field("block", b).field("size", r.pattern.blocks[b].size());
    w.key("classes").begin_array();
    for (std::size_t i : r.pattern.blocks[b]) w.value(format_word(classes[i].word, p));
    w.end_array().end_object();
    payload += w.str() + "\n";
  }
  for (const auto& [i, j] : r.probably_equal) {
    JsonWriter w;
    w.begin_object()
        .field("probably_equal", true)
        .field("w1", format_word(classes[i].word, p))
        .field("w2", format_word(classes[j].word, p))
        .end_object();
    payload += w.str() + "\n";
  }
  emit(c, payload, out);
  return kExitOk;
}

int cmd_cocycle_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  SurfaceRep rep = c.inputs.empty() ? schottky_sample(*c.seed, c.rank, {}) : resolve_input(c.inputs[0], c.rank);
  auto reports = cocycle_verify(rep, *c.seed, c.samples.value_or(1000));
  std::string payload;
  int status = kExitOk;
  for (const auto& r : reports) {
    payload += to_json(r) + "\n";
    if (!r.pass) {
      err << "verification failed: " << r.check << " max_defect " << format_double(r.max_defect)
          << " tolerance " << format_double(r.tolerance) << "\n";
      status = kExitVerification;
    }
  }
  emit(c, payload, out);
  return status;
}

int cmd_scan(const RunConfig& c, std::ostream& out, std::ostream& err) {
  ScanConfig sc;
  sc.seed = *c.seed;
  sc.trials = c.trials;
  sc.m = c.rank;
  sc.maxlen = c.maxlen;
  sc.tau = c.tau;
  sc.inject_arithmetic = c.inject_arithmetic;
  sc.workers = c.workers;
  sc.rmin_samples = c.rmin_samples;
  if (c.cusped) sc.sampler.mode = SchottkyParams::Mode::Cusped;
  Presentation p = schottky_presentation(c.rank);
  ScanReport report = scan_generic(sc, cached_classes(p, c.maxlen));

  std::string payload;
  std::size_t violating = 0, collapsed = 0;
  for (const auto& t : report.trials) {
    payload += to_json_line(t, report.presentation) + "\n";
    if (!t.violations.empty()) ++violating;
    if (t.collapsed) ++collapsed;
  }
  emit(c, payload, out);
  err << "trials " << report.trials.size() << " collapsed " << collapsed << " violating " << violating << "\n";
  if (violating > 0) {
    err << "verification failed: R_min is not a sub-relation of R_g in " << violating << " trials\n";
    return kExitVerification;
  }
  return kExitOk;
}

int cmd_sample(const RunConfig& c, std::ostream& out, std::ostream& err) {
  SchottkyParams params;
  if (c.cusped) params.mode = SchottkyParams::Mode::Cusped;
  SurfaceRep rep = schottky_sample(*c.seed, c.rank, params);
  emit(c, to_json(rep) + "\n", out);
  double cert = certificate_defect(rep);
  if (!(rep.validity.relator_defect < kRelatorTolerance) || !(cert < 1e-9)) {
    err << "verification failed: sample relator_defect " << format_double(rep.validity.relator_defect)
        << " certificate_defect " << format_double(cert) << "\n";
    return kExitVerification;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Argument parsing

struct Bindings {
  std::string input, finer, coarser;
  std::uint64_t seed = 0;
  int samples = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* samples_opt = nullptr;
  CLI::Option* input_opt = nullptr;
  CLI::Option* finer_opt = nullptr;
  CLI::Option* coarser_opt = nullptr;
};

void add_subcommands(CLI::App& app, RunConfig& cfg, std::map<std::string, Bindings>& bind) {
  auto common = [&](CLI::App* sub, Bindings& b, bool randomized) {
    sub->add_option("--output,-o", cfg.output, "Write the payload here (plus a .meta.json sidecar)");
    if (randomized) b.seed_opt = sub->add_option("--seed", b.seed, "Seed (mandatory)");
  };
  auto optional_seed = [&](CLI::App* sub, Bindings& b) {
    sub->add_option("--output,-o", cfg.output, "Write the payload here (plus a .meta.json sidecar)");
    b.seed_opt = sub->add_option("--seed", b.seed, "Seed (mandatory when either side is rmin)");
  };
  auto input = [&](CLI::App* sub, Bindings& b) {
    b.input_opt = sub->add_option("--input,-i", b.input,
                                  "schottky:SEED[:cusped] | fricke:G:N:v1,v2,... | rep:PATH | preset:modular-torus");
    sub->add_option("--rank", cfg.rank, "Free rank for schottky inputs")->capture_default_str();
  };
  auto classes = [&](CLI::App* sub) {
    sub->add_option("--maxlen", cfg.maxlen, "Longest cyclic length enumerated")->capture_default_str();
    sub->add_flag("--merge-inverse", cfg.merge_inverse, "Identify each class with its inverse");
  };

  {
    auto* sub = app.add_subcommand("spectrum", "Class / trace / length table");
    auto& b = bind["spectrum"];
    common(sub, b, false);
    input(sub, b);
    classes(sub);
    sub->add_option("--tau", cfg.tau, "Length tolerance")->capture_default_str();
    sub->add_option("--format", cfg.format, "jsonl or csv")->capture_default_str();
  }
  {
    auto* sub = app.add_subcommand("pattern", "Blocks of equal length");
    auto& b = bind["pattern"];
    common(sub, b, false);
    input(sub, b);
    classes(sub);
    sub->add_option("--tau", cfg.tau, "Single-linkage gap")->capture_default_str();
    sub->add_option("--format", cfg.format, "jsonl or csv")->capture_default_str();
  }
  {
    auto* sub = app.add_subcommand("compare", "Is the finer pattern a sub-relation of the coarser one");
    auto& b = bind["compare"];
    optional_seed(sub, b);
    b.finer_opt = sub->add_option("--finer", b.finer, "Input source, or 'rmin'");
    b.coarser_opt = sub->add_option("--coarser", b.coarser, "Input source, or 'rmin'");
    sub->add_option("--rank", cfg.rank, "Free rank for schottky inputs")->capture_default_str();
    classes(sub);
    sub->add_option("--tau", cfg.tau, "Single-linkage gap")->capture_default_str();
    sub->add_option("--rmin-samples", cfg.rmin_samples, "Samples for probable-equality checks")->capture_default_str();
  }
  {
    auto* sub = app.add_subcommand("tracepoly", "Canonical trace polynomial of a word");
    auto& b = bind["tracepoly"];
    common(sub, b, false);
    sub->add_option("--word,-w", cfg.words, "Word, e.g. \"a b A B\"");
    sub->add_option("--rank", cfg.rank, "Free rank")->capture_default_str();
  }
  {
    auto* sub = app.add_subcommand("rmin", "R_min verdicts for word pairs, or R_min blocks up to --maxlen");
    auto& b = bind["rmin"];
    common(sub, b, true);
    sub->add_option("--word,-w", cfg.words, "Words to compare pairwise");
    sub->add_option("--rank", cfg.rank, "Free rank")->capture_default_str();
    classes(sub);
    b.samples_opt = sub->add_option("--samples", b.samples, "Exact evaluation samples (default 20)");
  }
  {
    auto* sub = app.add_subcommand("cocycle-verify", "Boundary cocycle checks");
    auto& b = bind["cocycle-verify"];
    common(sub, b, true);
    input(sub, b);
    b.samples_opt = sub->add_option("--samples", b.samples, "Samples per check (default 1000)");
  }
  {
    auto* sub = app.add_subcommand("scan", "Genericity experiment");
    auto& b = bind["scan"];
    common(sub, b, true);
    sub->add_option("--trials", cfg.trials, "Number of trials")->capture_default_str();
    sub->add_option("--rank", cfg.rank, "Free rank")->capture_default_str();
    sub->add_option("--maxlen", cfg.maxlen, "Longest cyclic length enumerated")->capture_default_str();
    sub->add_option("--tau", cfg.tau, "Single-linkage gap")->capture_default_str();
    sub->add_option("--workers", cfg.workers, "Worker threads (0 = hardware)")->capture_default_str();
    sub->add_option("--rmin-samples", cfg.rmin_samples, "Samples for probable-equality checks")->capture_default_str();
    sub->add_flag("--inject-arithmetic", cfg.inject_arithmetic, "Prepend the modular torus as trial 0");
    sub->add_flag("--cusped", cfg.cusped, "Sample finite-area surfaces with one cusp (rank 2 or 4)");
  }
  {
    auto* sub = app.add_subcommand("sample", "Certified Schottky representation");
    auto& b = bind["sample"];
    common(sub, b, true);
    sub->add_option("--rank", cfg.rank, "Free rank")->capture_default_str();
    sub->add_flag("--cusped", cfg.cusped, "Finite-area surface with one cusp (rank 2 or 4)");
  }
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

std::string json_scalar(const nlohmann::json& v, const std::string& field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  throw ConfigError(field, "expected a string or number");
}

// Appends config fields as command-line tokens unless given explicitly.
void apply_config(const fs::path& path, std::vector<std::string>& args, CLI::App& app) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config", "top level must be an object");

  bool has_command = !args.empty() && std::find(kCommands.begin(), kCommands.end(), args[0]) != kCommands.end();
  if (!has_command) {
    if (!doc.contains("command")) throw ConfigError("command", "missing (give a subcommand or a \"command\" field)");
    if (!doc["command"].is_string()) throw ConfigError("command", "expected a string");
    std::string cmd = doc["command"].get<std::string>();
    if (std::find(kCommands.begin(), kCommands.end(), cmd) == kCommands.end())
      throw ConfigError("command", "unknown subcommand '" + cmd + "'");
    args.insert(args.begin(), cmd);
  } else if (doc.contains("command") && doc["command"] != args[0]) {
    throw ConfigError("command", "config names '" + doc["command"].dump() + "' but the command line runs " + args[0]);
  }
  CLI::App* sub = app.get_subcommand(args[0]);

  for (const auto& [key, value] : doc.items()) {
    if (key == "command") continue;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr) throw ConfigError(key, "not an option of " + args[0]);
    if (given_on_command_line(args, flag)) continue;
    if (value.is_null()) continue;
    if (value.is_boolean()) {
      if (opt->get_expected_min() != 0) throw ConfigError(key, "expected a value, got a boolean");
      if (value.get<bool>()) args.push_back(flag);
      continue;
    }
    if (opt->get_expected_min() == 0) throw ConfigError(key, "expected true or false");
    if (value.is_array()) {
      for (const auto& item : value) {
        args.push_back(flag);
        args.push_back(json_scalar(item, key));
      }
      continue;
    }
    args.push_back(flag);
    args.push_back(json_scalar(value, key));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void validate(const RunConfig& c) {
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end())
    throw ConfigError("command", "unknown subcommand '" + c.command + "'");
  if (c.rank < 1 || c.rank > 8) throw ConfigError("rank", "must be in 1..8");
  if (c.maxlen < 1 || c.maxlen > 14) throw ConfigError("maxlen", "must be in 1..14");
  if (!(c.tau >= 0) || !std::isfinite(c.tau)) throw ConfigError("tau", "must be a finite number >= 0");
  if (c.trials < 1) throw ConfigError("trials", "must be >= 1");
  if (c.samples && *c.samples < 1) throw ConfigError("samples", "must be >= 1");
  if (c.rmin_samples < 1) throw ConfigError("rmin_samples", "must be >= 1");
  if (c.workers < 0) throw ConfigError("workers", "must be >= 0");
  if (c.format != "jsonl" && c.format != "csv") throw ConfigError("format", "must be jsonl or csv");
  if (c.format == "csv" && c.command != "spectrum" && c.command != "pattern")
    throw ConfigError("format", "csv is only available for spectrum and pattern");

  const std::string& cmd = c.command;
  if (cmd == "compare") {
    if (c.inputs.size() != 2) throw ConfigError("finer/coarser", "compare needs both --finer and --coarser");
    if (is_rmin_source(c.inputs[0]) && is_rmin_source(c.inputs[1]))
      throw ConfigError("finer/coarser", "at most one side may be 'rmin'");
  } else if (cmd == "spectrum" || cmd == "pattern") {
    if (c.inputs.size() != 1) throw ConfigError("input", "exactly one input source is required");
  } else if (cmd == "cocycle-verify") {
    if (c.inputs.size() > 1) throw ConfigError("input", "at most one input source");
  } else if (!c.inputs.empty()) {
    throw ConfigError("input", cmd + " takes no input source");
  }
  for (const auto& in : c.inputs)
    if (is_rmin_source(in) && cmd != "compare") throw ConfigError("input", "'rmin' is only valid for compare");

  bool randomized = cmd == "scan" || cmd == "sample" || cmd == "rmin" || cmd == "cocycle-verify" ||
                    (cmd == "compare" && std::any_of(c.inputs.begin(), c.inputs.end(), is_rmin_source));
  if (randomized && !c.seed) throw ConfigError("seed", "required for " + cmd);

  if (cmd == "tracepoly" && c.words.size() != 1) throw ConfigError("word", "tracepoly needs exactly one --word");
  if (cmd == "rmin" && c.words.size() == 1) throw ConfigError("word", "rmin compares at least two words");
  if (c.inject_arithmetic && c.rank != 2) throw ConfigError("inject_arithmetic", "needs rank 2");
  if (c.cusped && c.rank != 2 && c.rank != 4) throw ConfigError("cusped", "needs rank 2 or 4");
}

std::string config_digest(const RunConfig& c) {
  JsonWriter w;
  w.begin_object().field("command", c.command);
  w.key("inputs").begin_array();
  for (const auto& in : c.inputs) w.value(in);
  w.end_array();
  w.field("rank", c.rank).field("maxlen", c.maxlen).field("tau", c.tau).field("trials", c.trials);
  w.key("seed");
  if (c.seed)
    w.value(static_cast<unsigned long long>(*c.seed));
  else
    w.null();
  w.key("samples");
  if (c.samples)
    w.value(*c.samples);
  else
    w.null();
  w.field("rmin_samples", c.rmin_samples)
      .field("inject_arithmetic", c.inject_arithmetic)
      .field("merge_inverse", c.merge_inverse)
      .field("cusped", c.cusped);
  w.key("words").begin_array();
  for (const auto& word : c.words) w.value(word);
  w.end_array().field("format", c.format).end_object();
  return hex64(fnv1a(w.str()));
}

SurfaceRep resolve_input(const std::string& source, int rank) {
  auto colon = source.find(':');
  std::string kind = source.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : source.substr(colon + 1);
  if (kind == "schottky") {
    auto parts = split(rest, ':');
    SchottkyParams params;
    if (parts.size() == 2 && parts[1] == "cusped")
      params.mode = SchottkyParams::Mode::Cusped;
    else if (parts.size() != 1)
      throw Error(Errc::Parse, "input: expected schottky:SEED or schottky:SEED:cusped");
    return schottky_sample(parse_seed(parts[0], "input seed"), rank, params);
  }
  if (kind == "fricke") {
    auto parts = split(rest, ':');
    if (parts.size() != 3) throw Error(Errc::Parse, "input: expected fricke:G:N:v1,v2,...");
    FrickeVector v;
    v.genus = static_cast<int>(parse_int(parts[0], "input genus"));
    v.punctures = static_cast<int>(parse_int(parts[1], "input punctures"));
    if (!parts[2].empty())
      for (const auto& item : split(parts[2], ',')) v.values.push_back(parse_real(item, "input coordinate"));
    v.validate();
    return rep_from_fricke(v);
  }
  if (kind == "rep") {
    if (rest.empty()) throw Error(Errc::Parse, "input: expected rep:PATH");
    return rep_from_json(read_file(rest));
  }
  if (kind == "preset") {
    if (rest == "modular-torus") return modular_torus();
    throw Error(Errc::Parse, "input: unknown preset '" + rest + "'");
  }
  throw Error(Errc::Parse, "input: unknown source '" + source + "'");
}

std::vector<ConjClassKey> cached_classes(const Presentation& p, int maxlen, bool merge_inverse) {
  const char* dir = std::getenv("SPECLAB_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return enumerate_classes(p, maxlen, merge_inverse);

  std::string header = "# speclab classes v1 g=" + std::to_string(p.genus()) + " n=" + std::to_string(p.punctures()) +
                       " maxlen=" + std::to_string(maxlen) + " merge_inverse=" + (merge_inverse ? "1" : "0");
  fs::path path = fs::path(dir) / ("classes-" + hex64(fnv1a(header)) + ".txt");

  std::error_code ec;
  if (fs::exists(path, ec)) {
    try {
      std::istringstream in(read_file(path));
      std::string line;
      std::getline(in, line);
      if (line.rfind(header + " count=", 0) == 0) {
        std::size_t count = static_cast<std::size_t>(parse_int(line.substr(header.size() + 7), "count"));
        std::vector<ConjClassKey> out;
        out.reserve(count);
        while (std::getline(in, line)) out.push_back({parse_word(line, &p), merge_inverse});
        if (out.size() == count) return out;
      }
    } catch (const Error&) {
    }
  }

  auto classes = enumerate_classes(p, maxlen, merge_inverse);
  std::string text = header + " count=" + std::to_string(classes.size()) + "\n";
  for (const auto& k : classes) text += format_word(k.word, p) + "\n";
  fs::create_directories(dir, ec);
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  try {
    write_file(tmp, text);
    fs::rename(tmp, path, ec);
    if (ec) fs::remove(tmp, ec);
  } catch (const Error&) {
    fs::remove(tmp, ec);
  }
  return classes;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    validate(c);
    if (c.command == "spectrum") return cmd_spectrum(c, out);
    if (c.command == "pattern") return cmd_pattern(c, out);
    if (c.command == "compare") return cmd_compare(c, out, err);
    if (c.command == "tracepoly") return cmd_tracepoly(c, out);
    if (c.command == "rmin") return cmd_rmin(c, out);
    if (c.command == "cocycle-verify") return cmd_cocycle_verify(c, out, err);
    if (c.command == "scan") return cmd_scan(c, out, err);
    if (c.command == "sample") return cmd_sample(c, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::map<std::string, Bindings> bind;
  CLI::App app{"Marked length spectra, trace polynomials and boundary cocycles of surface groups", "speclab"};
  app.set_version_flag("--version", SPECLAB_VERSION);
  app.require_subcommand(0, 1);
  add_subcommands(app, cfg, bind);

  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<fs::path> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        err << "config error: config: missing file name\n";
        return kExitInput;
      }
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      --i;
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      --i;
    }
  }

  try {
    if (config_path) apply_config(*config_path, args, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitInput;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << SPECLAB_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitInput;
  }

  auto subs = app.get_subcommands();
  if (subs.empty()) {
    out << app.help();
    return kExitInput;
  }
  CLI::App* sub = subs.front();
  cfg.command = sub->get_name();
  Bindings& b = bind[cfg.command];
  if (b.seed_opt != nullptr && b.seed_opt->count() > 0) cfg.seed = b.seed;
  if (b.samples_opt != nullptr && b.samples_opt->count() > 0) cfg.samples = b.samples;
  if (b.input_opt != nullptr && b.input_opt->count() > 0) cfg.inputs.push_back(b.input);
  if (b.finer_opt != nullptr && b.finer_opt->count() > 0) cfg.inputs.push_back(b.finer);
  if (b.coarser_opt != nullptr && b.coarser_opt->count() > 0) cfg.inputs.push_back(b.coarser);
  return run(cfg, out, err);
}

}  // namespace speclab::cli
