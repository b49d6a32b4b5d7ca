#pragma once

#include "mixop/geometry.hpp"
#include "mixop/kernel.hpp"
#include "mixop/path_sim.hpp"
#include "mixop/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mixop {

using Json = nlohmann::json;

/// Experiment kinds accepted in the "kind" field.
const std::vector<std::string>& experiment_kinds();

struct Catalogue {
  std::string name;
  std::string parameters;
  std::string description;
};
const std::vector<Catalogue>& kernel_catalogue();
const std::vector<Catalogue>& domain_catalogue();

/// Reads a JSON document; syntax errors become ConfigError.
Json load_config(const std::filesystem::path& path);

/// Checks kind-specific required fields and builds kernel and domain once to
/// catch value errors. Throws ConfigError naming the first offending field.
void validate_config(const Json& config);

Domain build_domain(const Json& spec);
JumpKernel build_kernel(const Json& spec, int dimension);
/// A number or an expression string over x1..xd.
Field build_field(const Json& spec, int dimension, const std::string& name);
PathConfig build_path_config(const Json& config, unsigned workers);

/// FNV-1a over the canonical (sorted-key, compact) dump.
std::uint64_t config_hash(const Json& config);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  bool quiet = false;
};

struct RunOutcome {
  bool all_pass = true;
  Json summary;
  std::vector<std::filesystem::path> files;
};

/// Runs one experiment and writes summary.json plus CSV files into out_dir.
RunOutcome run_experiment(Json config, const RunOptions& options, std::ostream& log);

}  // namespace mixop
