#include "forge/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::MalformedRecord,
                  source + ":" + std::to_string(lineno) + ": expected `key = value`");
    }
    const std::string key(text::trim(body.substr(0, eq)));
    if (key.empty()) {
      throw Error(ErrorKind::MalformedRecord, source + ":" + std::to_string(lineno) + ": empty key");
    }
    kv[key] = std::string(text::trim(body.substr(eq + 1)));
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  return parse_key_values(in, path.string());
}

void PipelineConfig::validate() const {
  if (worker_count == 0) throw Error(ErrorKind::InvalidArgument, "worker_count must be >= 1");
  if (shard_size_records == 0) throw Error(ErrorKind::InvalidArgument, "shard_size_records must be >= 1");
  clean.validate();
  split.validate();
  if (assembly.max_tokens == 0) throw Error(ErrorKind::InvalidArgument, "assembly.max_tokens must be >= 1");
}

namespace {

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used == v.size() && v.front() != '-') return x;
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorKind::InvalidArgument, "config key '" + key + "' expects a nonnegative integer, got '" + v + "'");
}

double to_f64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorKind::InvalidArgument, "config key '" + key + "' expects a number, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string_view t = text::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

BoundaryKind to_boundary(const std::string& key, const std::string& v) {
  if (v == "file" || v == "FileMarker") return BoundaryKind::FileMarker;
  if (v == "function" || v == "FunctionBoundary") return BoundaryKind::FunctionBoundary;
  if (v == "statement" || v == "StatementBoundary") return BoundaryKind::StatementBoundary;
  throw Error(ErrorKind::InvalidArgument, "config key '" + key + "': unknown boundary kind '" + v + "'");
}

}  // namespace

PipelineConfig config_from_key_values(const KeyValues& kv) {
  PipelineConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"input_root", [&](auto&, auto& v) { c.input_root = v; }},
      {"output_root", [&](auto&, auto& v) { c.output_root = v; }},
      {"cache_dir", [&](auto&, auto& v) { c.cache_dir = v; }},
      {"workers", [&](auto& k, auto& v) { c.worker_count = static_cast<unsigned>(to_u64(k, v)); }},
      {"shard_size", [&](auto& k, auto& v) { c.shard_size_records = to_u64(k, v); }},
      {"counter", [&](auto&, auto& v) { c.counter_spec = v; }},
      {"clean.separator_min_run", [&](auto& k, auto& v) { c.clean.separator_min_run = to_u64(k, v); }},
      {"clean.separator_chars", [&](auto&, auto& v) { c.clean.separator_chars = v; }},
      {"clean.repeat_min_run", [&](auto& k, auto& v) { c.clean.repeat_min_run = to_u64(k, v); }},
      {"clean.repeat_reduce_to", [&](auto& k, auto& v) { c.clean.repeat_reduce_to = to_u64(k, v); }},
      {"clean.tab_width", [&](auto& k, auto& v) { c.clean.tab_width = to_u64(k, v); }},
      {"clean.garbage_reject_threshold", [&](auto& k, auto& v) { c.clean.garbage_reject_threshold = to_f64(k, v); }},
      {"clean.min_nl_words", [&](auto& k, auto& v) { c.clean.min_nl_words = to_u64(k, v); }},
      {"clean.min_chars", [&](auto& k, auto& v) { c.clean.min_chars = to_u64(k, v); }},
      {"clean.code_indicators", [&](auto&, auto& v) { c.clean.code_indicators = to_list(v); }},
      {"split.max_chars", [&](auto& k, auto& v) { c.split.max_chars = to_u64(k, v); }},
      {"split.min_chars", [&](auto& k, auto& v) { c.split.min_chars = to_u64(k, v); }},
      {"split.marker_prefix", [&](auto&, auto& v) { c.split.marker_prefix = v; }},
      {"split.hierarchy", [&](auto& k, auto& v) {
         c.split.hierarchy.clear();
         for (const std::string& item : to_list(v)) c.split.hierarchy.push_back(to_boundary(k, item));
       }},
      {"assembly.max_tokens", [&](auto& k, auto& v) { c.assembly.max_tokens = to_u64(k, v); }},
      {"assembly.eot_token", [&](auto&, auto& v) { c.assembly.eot_token = v; }},
      {"assembly.boundary_chars", [&](auto&, auto& v) {
         // Escapes so a newline can be written on one line.
         std::string out;
         for (std::size_t i = 0; i < v.size(); ++i) {
           if (v[i] == '\\' && i + 1 < v.size() && v[i + 1] == 'n') {
             out.push_back('\n');
             ++i;
           } else {
             out.push_back(v[i]);
           }
         }
         c.assembly.boundary_chars = out;
       }},
  };
  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
    it->second(key, value);
  }
  c.assembly.counter = TokenCounter::parse(c.counter_spec);
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return config_from_key_values(load_key_values(*explicit_path));
  if (const char* env = std::getenv("FORGE_CONFIG"); env && *env) {
    return config_from_key_values(load_key_values(env));
  }
  PipelineConfig c;
  c.validate();
  return c;
}

}  // namespace forge
