#include <cstdio>
#include <sstream>

#include "common.hpp"
#include "forge/error.hpp"

namespace forge::cli {

void add_input(CLI::App& app, CommonOpts& o) {
  app.add_option("--in,-i", o.in, "Input JSONL file ('-' for stdin)");
}

void add_output(CLI::App& app, CommonOpts& o) {
  app.add_option("--out,-o", o.out, "Output file ('-' for stdout)");
  app.add_option("--out-dir", o.out_dir, "Write sharded output files into this directory");
  app.add_option("--shard-size", o.shard_size, "Records per shard (default: config shard_size)");
}

void add_config(CLI::App& app, CommonOpts& o) {
  app.add_option("--config", o.config, "Key-value config file (default: $FORGE_CONFIG)");
  app.add_option("--workers,-j", o.workers, "Worker threads");
}

PipelineConfig resolve_config(const CommonOpts& o) {
  if (!o.config.empty()) return load_pipeline_config(std::filesystem::path(o.config));
  return load_pipeline_config();
}

unsigned resolve_workers(const CommonOpts& o, const PipelineConfig& cfg) {
  return o.workers ? o.workers : cfg.worker_count;
}

Input::Input(const std::string& path, Io& io) : stream_(&io.in), name_("<stdin>") {
  if (path.empty() || path == "-") return;
  file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*file_) throw Error(ErrorKind::IoError, "cannot open " + path);
  stream_ = file_.get();
  name_ = path;
}

Output::Output(const CommonOpts& o, const PipelineConfig& cfg, Io& io) {
  if (!o.out_dir.empty()) {
    sink_ = std::make_unique<records::RecordSink>(o.out_dir, o.shard_size ? o.shard_size : cfg.shard_size_records);
    return;
  }
  stream_ = &io.out;
  if (!o.out.empty() && o.out != "-") {
    file_ = std::make_unique<std::ofstream>(o.out, std::ios::binary | std::ios::trunc);
    if (!*file_) throw Error(ErrorKind::IoError, "cannot write " + o.out);
    stream_ = file_.get();
  }
  sink_ = std::make_unique<records::RecordSink>(*stream_);
}

std::ostream& Output::text() {
  if (!stream_) throw Error(ErrorKind::InvalidArgument, "text reports cannot be sharded; use --out");
  return *stream_;
}

void Output::close() {
  sink_->close();
  if (file_) {
    file_->close();
    if (file_->fail()) throw Error(ErrorKind::IoError, "write failed");
  }
}

std::vector<Sample> read_samples(const std::string& path, Io& io) {
  Input input(path, io);
  return records::read_jsonl<Sample>(input.stream(), input.name(), records::sample_from_json);
}

std::string fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

int run_subcommand(const std::vector<std::string>& args, Io io) {
  CLI::App app{"forge: corpus preparation, run planning and evaluation toolkit", "forge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "forge 1.0.0");

  struct Entry {
    const char* name;
    const char* help;
    Action (*setup)(CLI::App&);
  };
  const Entry entries[] = {
      {"ingest", "Split raw corpus files into ordered sample records", setup_ingest},
      {"split", "Split oversized samples at code-aware boundaries", setup_split},
      {"clean", "Clean samples and drop rejects", setup_clean},
      {"pack", "Truncate samples and pack them into fixed token windows", setup_pack},
      {"stats", "Corpus summary: sample count, tokens, fill rate", setup_stats},
      {"plan", "Adapter, batch and schedule arithmetic for a run", setup_plan},
      {"monitor", "Scan training events for NaN/Inf and spikes", setup_monitor},
      {"eval", "Perplexity, top-k, BLEU-4 and token accuracy from recorded outputs", setup_eval},
      {"sweep", "Reductions, marginal effects and gradient tables for a sweep", setup_sweep},
  };
  std::vector<std::pair<CLI::App*, Action>> actions;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    actions.emplace_back(sub, e.setup(*sub));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  std::ostringstream usage_out;
  std::ostringstream usage_err;
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, usage_out, usage_err);
    io.out << usage_out.str();
    io.err << usage_err.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (auto& [sub, action] : actions) {
    if (!sub->parsed()) continue;
    try {
      return action(io);
    } catch (const Error& e) {
      io.err << "forge " << sub->get_name() << ": " << to_string(e.kind()) << ": " << e.what() << '\n';
      return e.kind() == ErrorKind::InvalidArgument ? kExitUsage : kExitData;
    } catch (const std::exception& e) {
      io.err << "forge " << sub->get_name() << ": " << e.what() << '\n';
      return kExitData;
    }
  }
  return kExitUsage;
}

int run_subcommand(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::ios::sync_with_stdio(false);
  return run_subcommand(args, Io{std::cin, std::cout, std::cerr});
}

}  // namespace forge::cli
