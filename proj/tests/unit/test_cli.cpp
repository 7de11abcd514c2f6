#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "speclab/cli.hpp"

using namespace speclab;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "speclab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("speclab-test-cli-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("tracepoly prints the canonical form") {
  Result r = invoke({"tracepoly", "--word", "a b A B"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out == "-1*t{1}*t{2}*t{1,2} +1*t{1}^2 +1*t{2}^2 +1*t{1,2}^2 -2\n");
  CHECK(invoke({"tracepoly", "--word", "abAB"}).out == r.out);
  CHECK(invoke({"tracepoly", "--word", "ba"}).out == "+1*t{1,2}\n");
  CHECK(invoke({"tracepoly", "--word", "abd"}).code == cli::kExitInput);
}

TEST_CASE("exit codes for input errors") {
  CHECK(invoke({"--version"}).code == cli::kExitOk);
  CHECK(invoke({"frobnicate"}).code == cli::kExitInput);
  CHECK(invoke({"scan", "--trials", "3"}).code == cli::kExitInput);  // seed is mandatory
  CHECK(invoke({"scan", "--trials", "0", "--seed", "1"}).code == cli::kExitInput);
  CHECK(invoke({"scan", "--seed", "1", "--rank", "9"}).code == cli::kExitInput);
  CHECK(invoke({"scan", "--seed", "1", "--maxlen", "40"}).code == cli::kExitInput);
  CHECK(invoke({"spectrum", "--input", "nowhere:3"}).code == cli::kExitInput);
  CHECK(invoke({"spectrum", "--input", "rep:/nonexistent/file.json"}).code == cli::kExitInput);
  CHECK(invoke({"sample", "--seed", "1", "--rank", "3", "--cusped"}).code == cli::kExitInput);
  CHECK(invoke({"scan", "--seed", "1", "--format", "csv"}).code == cli::kExitInput);

  Result r = invoke({"scan", "--trials", "3"});
  CHECK(r.err.find("config error: seed") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("verification failures exit with 2") {
  Result bad = invoke({"compare", "--finer", "preset:modular-torus", "--coarser", "schottky:3", "--maxlen", "3"});
  CHECK(bad.code == cli::kExitVerification);
  auto j = nlohmann::json::parse(bad.out);
  CHECK(j["holds"] == false);
  CHECK(!j["violations"].empty());

  Result good = invoke({"compare", "--finer", "rmin", "--coarser", "schottky:3", "--maxlen", "4", "--seed", "2"});
  CHECK(good.code == cli::kExitOk);
  CHECK(nlohmann::json::parse(good.out)["holds"] == true);

  Result scan = invoke({"scan", "--trials", "5", "--maxlen", "4", "--seed", "9", "--workers", "1"});
  CHECK(scan.code == cli::kExitOk);
  CHECK(json_lines(scan.out).size() == 5);
}

TEST_CASE("configuration files") {
  fs::path cfg = scratch("scan.json");
  write(cfg, R"({"command": "scan", "trials": 4, "maxlen": 4, "seed": 11, "workers": 1})");
  Result from_file = invoke({"--config", cfg.string()});
  Result direct = invoke({"scan", "--trials", "4", "--maxlen", "4", "--seed", "11", "--workers", "1"});
  CHECK(from_file.code == cli::kExitOk);
  CHECK(from_file.out == direct.out);

  // The command line wins over the file.
  Result override = invoke({"scan", "--config", cfg.string(), "--trials", "2"});
  CHECK(json_lines(override.out).size() == 2);

  write(cfg, R"({"command": "scan", "trails": 4, "seed": 1})");
  Result typo = invoke({"--config", cfg.string()});
  CHECK(typo.code == cli::kExitInput);
  CHECK(typo.err.find("config error: trails") != std::string::npos);

  write(cfg, R"({"command": "scan", "trials": "many", "seed": 1})");
  CHECK(invoke({"--config", cfg.string()}).code == cli::kExitInput);

  write(cfg, R"({"command": "scan", "seed": 1, "inject_arithmetic": 3})");
  Result flag = invoke({"--config", cfg.string()});
  CHECK(flag.code == cli::kExitInput);
  CHECK(flag.err.find("inject_arithmetic") != std::string::npos);

  write(cfg, "{not json");
  CHECK(invoke({"--config", cfg.string()}).code == cli::kExitInput);
  CHECK(invoke({"--config"}).code == cli::kExitInput);
}

TEST_CASE("class cache") {
  fs::path dir = scratch("cache");
  fs::remove_all(dir);
  ::setenv("SPECLAB_CACHE_DIR", dir.c_str(), 1);
  Presentation p(1, 1);
  auto cold = cli::cached_classes(p, 5);
  REQUIRE(fs::exists(dir));
  std::size_t files = 0;
  fs::path cache_file;
  for (const auto& e : fs::directory_iterator(dir)) {
    ++files;
    cache_file = e.path();
  }
  CHECK(files == 1);
  auto warm = cli::cached_classes(p, 5);
  CHECK(warm == cold);
  CHECK(cold == enumerate_classes(p, 5));

  std::string text = slurp(cache_file);
  CHECK(text.rfind("# speclab classes v1 g=1 n=1 maxlen=5 merge_inverse=0 count=", 0) == 0);

  // A truncated file is ignored and rewritten.
  write(cache_file, text.substr(0, text.size() / 2));
  CHECK(cli::cached_classes(p, 5) == cold);
  CHECK(slurp(cache_file) == text);

  CHECK(cli::cached_classes(p, 4, true) == enumerate_classes(p, 4, true));
  ::unsetenv("SPECLAB_CACHE_DIR");
  fs::remove_all(dir);
}

TEST_CASE("spectrum formats") {
  Result csv = invoke({"spectrum", "--input", "preset:modular-torus", "--maxlen", "2", "--format", "csv"});
  CHECK(csv.code == cli::kExitOk);
  CHECK(csv.out.rfind("class,trace,length\n", 0) == 0);
  CHECK(csv.out.find("\na1,3,") != std::string::npos);

  Result jl = invoke({"spectrum", "--input", "schottky:5", "--maxlen", "2"});
  auto rows = json_lines(jl.out);
  CHECK(rows.size() == 12);
  // 17 significant digits.
  std::string line = jl.out.substr(0, jl.out.find('\n'));
  std::string len = line.substr(line.find("\"length\":") + 9);
  len = len.substr(0, len.find_first_of(",}"));
  CHECK(std::strtod(len.c_str(), nullptr) == rows[0]["length"].get<double>());
  std::size_t digits = 0;
  for (char ch : len.substr(0, len.find_first_of("eE"))) digits += std::isdigit(static_cast<unsigned char>(ch)) != 0;
  CHECK(digits >= 16);

  Result pat = invoke({"pattern", "--input", "preset:modular-torus", "--maxlen", "2", "--format", "csv"});
  CHECK(pat.code == cli::kExitOk);
  CHECK(pat.out.rfind("block,class,length\n", 0) == 0);
}

TEST_CASE("output files and metadata") {
  fs::path out = scratch("sample.json");
  Result r = invoke({"sample", "--seed", "4", "--output", out.string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.empty());
  REQUIRE(fs::exists(out));
  fs::path meta = out;
  meta += ".meta.json";
  REQUIRE(fs::exists(meta));
  auto m = nlohmann::json::parse(slurp(meta));
  CHECK(m["command"] == "sample");
  CHECK(m.contains("version"));
  CHECK(m.contains("config_digest"));
  CHECK(m.contains("timestamp"));

  Result again = invoke({"sample", "--seed", "4"});
  CHECK(again.out == slurp(out));
  auto rep = nlohmann::json::parse(again.out);
  CHECK(rep.is_object());

  cli::RunConfig a;
  a.command = "scan";
  a.seed = 1;
  cli::RunConfig b = a;
  b.workers = 7;
  b.output = "elsewhere";
  CHECK(cli::config_digest(a) == cli::config_digest(b));
  b.trials = 5;
  CHECK(cli::config_digest(a) != cli::config_digest(b));
}

TEST_CASE("rmin and cocycle-verify") {
  Result pair = invoke({"rmin", "--word", "aabaB", "--word", "aaBab", "--word", "b", "--seed", "1"});
  CHECK(pair.code == cli::kExitOk);
  auto rows = json_lines(pair.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["verdict"] == "Equal");
  CHECK(rows[1]["verdict"] == "Distinct");

  Result cv = invoke({"cocycle-verify", "--seed", "3", "--samples", "200"});
  CHECK(cv.code == cli::kExitOk);
  for (const auto& j : json_lines(cv.out)) CHECK(j["pass"] == true);
  CHECK(invoke({"cocycle-verify", "--seed", "3", "--samples", "200"}).out == cv.out);
}
