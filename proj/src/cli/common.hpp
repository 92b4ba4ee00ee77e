#pragma once
// Shared plumbing for the subcommand implementations.

#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forge/cli.hpp"
#include "forge/config.hpp"
#include "forge/records.hpp"

namespace forge::cli {

// Options every record-producing subcommand accepts.
struct CommonOpts {
  std::string in = "-";
  std::string out = "-";
  std::string out_dir;
  std::size_t shard_size = 0;
  std::string config;
  unsigned workers = 0;  // 0: take it from the config
  bool json = false;
};

void add_input(CLI::App& app, CommonOpts& o);
void add_output(CLI::App& app, CommonOpts& o);
void add_config(CLI::App& app, CommonOpts& o);

PipelineConfig resolve_config(const CommonOpts& o);
unsigned resolve_workers(const CommonOpts& o, const PipelineConfig& cfg);

// Input stream for `path` ("-" is stdin from Io).
class Input {
 public:
  Input(const std::string& path, Io& io);
  std::istream& stream() { return *stream_; }
  const std::string& name() const { return name_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_;
  std::string name_;
};

// Output destination: --out-dir (sharded), --out FILE, or stdout.
class Output {
 public:
  Output(const CommonOpts& o, const PipelineConfig& cfg, Io& io);
  records::RecordSink& sink() { return *sink_; }
  std::ostream& text();  // plain-text reports; not valid for sharded output
  void close();

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
  std::unique_ptr<records::RecordSink> sink_;
};

std::vector<Sample> read_samples(const std::string& path, Io& io);

// Each subcommand registers its options on `app` and returns the action.
using Action = std::function<int(Io&)>;

Action setup_ingest(CLI::App& app);
Action setup_split(CLI::App& app);
Action setup_clean(CLI::App& app);
Action setup_pack(CLI::App& app);
Action setup_stats(CLI::App& app);
Action setup_plan(CLI::App& app);
Action setup_monitor(CLI::App& app);
Action setup_eval(CLI::App& app);
Action setup_sweep(CLI::App& app);

std::string fixed(double v, int places);

}  // namespace forge::cli
