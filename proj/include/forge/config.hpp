#pragma once
// Pipeline configuration: flat `key = value` files (blank lines and '#'
// comments ignored), located through FORGE_CONFIG unless given explicitly.
// Command-line flags are applied on top by the CLI.

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>

#include "forge/chunk_split.hpp"
#include "forge/mixture_assemble.hpp"
#include "forge/quality_filter.hpp"
#include "forge/tokencount.hpp"

namespace forge {

using KeyValues = std::map<std::string, std::string>;

// Throws Error{MalformedRecord} naming the line for lines without '='.
KeyValues parse_key_values(std::istream& in, const std::string& source = "config");
KeyValues load_key_values(const std::filesystem::path& path);

struct PipelineConfig {
  std::filesystem::path input_root;
  std::filesystem::path output_root;
  std::filesystem::path cache_dir;
  CleanPolicy clean;
  AssemblyPolicy assembly;
  SplitPolicy split{.max_chars = 7500, .min_chars = 50};
  std::string counter_spec = "char:4.0";
  unsigned worker_count = 1;
  std::size_t shard_size_records = 100000;

  // Throws Error{InvalidArgument} when worker_count or shard_size_records is 0
  // or any embedded policy is invalid.
  void validate() const;
};

// Unknown keys throw Error{InvalidArgument}, so typos do not pass silently.
PipelineConfig config_from_key_values(const KeyValues& kv);

// Reads $FORGE_CONFIG when set, otherwise returns the defaults.
PipelineConfig load_pipeline_config(const std::optional<std::filesystem::path>& explicit_path = {});

}  // namespace forge
