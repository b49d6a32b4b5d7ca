#include "mixop/errors.hpp"
#include "mixop/experiment.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace mixop;
namespace fs = std::filesystem;

namespace {

std::string config_error(const Json& config) {
  try {
    validate_config(config);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mixop_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunOutcome run_quiet(const Json& config, const fs::path& out, std::optional<std::uint64_t> seed = {},
                     unsigned workers = 0) {
  RunOptions o;
  o.out_dir = out;
  o.quiet = true;
  o.seed = seed;
  o.workers = workers;
  std::ostringstream log;
  return run_experiment(config, o, log);
}

const Json small_solve = Json::parse(R"json({
  "kind": "solve",
  "kernel": {"family": "fractional", "s": 0.5},
  "domain": {"shape": "ball", "center": [0, 0], "radius": 1},
  "f": "1 + x1^2",
  "g": "abs(x2)",
  "points": [[0, 0], [0.3, -0.2]],
  "n_paths": 400,
  "dt": 1e-3,
  "seed": 5
})json");

int cli(const std::string& args, const fs::path& log) {
  const std::string command = std::string(MIXOP_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("schema errors name the field") {
    CHECK(config_error(Json::object()) == "missing required field 'kind'");
    CHECK(config_error(Json{{"kind", "eigen"}}).find("missing required field 'kernel'") != std::string::npos);
    Json no_s = Json::parse(R"json({"kind": "validate-kernel", "kernel": {"family": "fractional"}, "dimension": 1})json");
    CHECK(config_error(no_s) == "missing required field 'kernel.s'");
    Json unknown = small_solve;
    unknown["colour"] = "blue";
    CHECK(config_error(unknown).find("colour") != std::string::npos);
    Json bad_kind = small_solve;
    bad_kind["kind"] = "fly";
    CHECK(config_error(bad_kind).find("fly") != std::string::npos);
    Json bad_expr = small_solve;
    bad_expr["f"] = "x1 + x7";
    CHECK(config_error(bad_expr).find("at position") != std::string::npos);
    CHECK(config_error(small_solve).empty());
  }

  TEST_CASE("validate-kernel reports the integrability value") {
    const Json c = Json::parse(R"json({"kind": "validate-kernel", "kernel": {"family": "fractional", "s": 0.5},
                                   "dimension": 1, "expected": 4})json");
    const auto out = run_quiet(c, scratch("validate"));
    CHECK(out.all_pass);
    CHECK(out.summary["results"]["integrability"]["value"].get<double>() == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(out.summary["results"]["flags"]["positivity_radius"] == "inf");
  }

  TEST_CASE("reruns are byte-identical and independent of the worker count") {
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
    const auto ra = run_quiet(small_solve, a, {}, 1);
    const auto rb = run_quiet(small_solve, b, {}, 3);
    REQUIRE(ra.files.size() == rb.files.size());
    for (const auto& f : ra.files) CHECK(read_file(a / f.filename()) == read_file(b / f.filename()));
    const std::string csv = read_file(a / "solve.csv");
    const std::string hash = ra.summary["config_hash"];
    CHECK(csv.rfind("# config_hash=" + hash + " seed=5\n", 0) == 0);
  }

  TEST_CASE("seed override changes the seed and the hash") {
    const auto base = run_quiet(small_solve, scratch("seed_a"));
    const fs::path dir = scratch("seed_b");
    const auto other = run_quiet(small_solve, dir, 99);
    CHECK(other.summary["seed"] == 99);
    CHECK(other.summary["config_hash"] != base.summary["config_hash"]);
    CHECK(read_file(dir / "solve.csv").find("seed=99") != std::string::npos);
  }

  TEST_CASE("hypothesis violations propagate") {
    const Json c = Json::parse(R"json({"kind": "faber-krahn",
      "kernel": {"family": "tabulated", "radii": [0.1, 0.5, 1.0], "values": [1, 2, 3]},
      "domain": {"shape": "box", "lo": [-1, -1], "hi": [1, 1]}, "n_paths": 100})json");
    CHECK_THROWS_AS(run_quiet(c, scratch("hypothesis")), HypothesisError);
  }

  TEST_CASE("command-line exit codes") {
    const fs::path dir = scratch("cli");
    const fs::path log = dir / "log.txt";
    CHECK(cli("list-kernels", log) == 0);
    CHECK(read_file(log).find("tempered-fractional") != std::string::npos);
    CHECK(cli("list-domains", log) == 0);
    CHECK(read_file(log).find("polygon") != std::string::npos);
    CHECK(cli("", log) == 2);
    CHECK(cli("frobnicate", log) == 2);
    CHECK(cli("run " + (dir / "missing.json").string(), log) == 2);

    const auto good = write_config(dir, "good.json", R"json({"kind": "validate-kernel",
      "kernel": {"family": "fractional", "s": 0.5}, "dimension": 1, "expected": 4})json");
    CHECK(cli("validate " + good.string(), log) == 0);
    CHECK(cli("run " + good.string() + " --quiet --out " + (dir / "good").string(), log) == 0);
    CHECK(fs::exists(dir / "good" / "summary.json"));

    const auto wrong = write_config(dir, "wrong.json", R"json({"kind": "validate-kernel",
      "kernel": {"family": "fractional", "s": 0.5}, "dimension": 1, "expected": 5})json");
    CHECK(cli("run " + wrong.string() + " --quiet --out " + (dir / "wrong").string(), log) == 1);

    const auto broken = write_config(dir, "broken.json", R"json({"kind": "eigen"})json");
    CHECK(cli("validate " + broken.string(), log) == 2);
    CHECK(read_file(log).find("missing required field") != std::string::npos);
    const auto not_json = write_config(dir, "not.json", "{ kind: ");
    CHECK(cli("validate " + not_json.string(), log) == 2);

    const auto censored = write_config(dir, "censored.json", R"json({"kind": "solve", "kernel": {"family": "zero"},
      "domain": {"shape": "ball", "center": [0, 0], "radius": 1}, "f": 1, "g": 0,
      "n_paths": 50, "dt": 1e-3, "t_max": 0.002})json");
    CHECK(cli("run " + censored.string() + " --quiet --out " + (dir / "censored").string(), log) == 3);
  }
}
