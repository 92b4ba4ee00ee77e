// ingest, split, clean, pack, stats
#include <algorithm>
#include <map>

#include "common.hpp"
#include "forge/chunk_split.hpp"
#include "forge/error.hpp"
#include "forge/parallel.hpp"
#include "forge/quality_filter.hpp"
#include "forge/text.hpp"

namespace forge::cli {

Action setup_ingest(CLI::App& app) {
  struct Opts {
    CommonOpts common;
    std::string root;
    std::string manifest;
    std::size_t delimiter_len = kSectionDelimiterLen;
    bool drop_marker = false;
    bool await = false;
    double poll_s = 5.0;
    std::string mark_done;
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--root", o->root, "Corpus root directory");
  app.add_option("--manifest", o->manifest, "Lines of `relative_path<TAB>category`");
  app.add_option("--delimiter-len", o->delimiter_len, "Section delimiter length in '=' characters");
  app.add_flag("--drop-marker", o->drop_marker, "Strip `// File:` marker lines from sample text");
  app.add_flag("--await", o->await, "Wait for <root>/.done before reading");
  app.add_option("--poll", o->poll_s, "Seconds between --await checks");
  app.add_option("--mark-done", o->mark_done, "Write a .done marker into this directory when finished");
  add_output(app, o->common);
  add_config(app, o->common);
  return [o](Io& io) {
    const PipelineConfig cfg = resolve_config(o->common);
    IngestOptions opts;
    opts.root = o->root.empty() ? cfg.input_root : std::filesystem::path(o->root);
    if (opts.root.empty()) throw Error(ErrorKind::InvalidArgument, "--root is required");
    if (!o->manifest.empty()) opts.manifest = o->manifest;
    opts.delimiter_len = o->delimiter_len;
    opts.retain_marker = !o->drop_marker;
    opts.workers = resolve_workers(o->common, cfg);
    if (o->await) {
      AwaitClock clock = system_await_clock();
      clock.log = [&io](std::string_view msg) { io.err << msg << '\n'; };
      await_done_marker(opts.root, AwaitOptions{std::chrono::duration<double>(o->poll_s)}, clock);
    }
    const std::vector<RawDocument> docs = load_documents(opts);
    const std::vector<Sample> samples = ingest_documents(docs, opts);
    Output out(o->common, cfg, io);
    for (const Sample& s : samples) out.sink().write(records::to_json(s));
    out.close();
    if (!samples.empty() && !verify_order(samples).ok()) {
      throw Error(ErrorKind::StreamOrder, "sample order check failed after ingest");
    }
    if (!o->mark_done.empty()) write_done_marker(o->mark_done);
    io.err << "ingest: " << docs.size() << " documents, " << samples.size() << " samples\n";
    return kExitOk;
  };
}

Action setup_split(CLI::App& app) {
  struct Opts {
    CommonOpts common;
    std::optional<std::size_t> max_chars;
    std::optional<std::size_t> min_chars;
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--max-chars", o->max_chars, "Largest chunk, in characters");
  app.add_option("--min-chars", o->min_chars, "Smallest chunk, in characters");
  add_input(app, o->common);
  add_output(app, o->common);
  add_config(app, o->common);
  return [o](Io& io) {
    PipelineConfig cfg = resolve_config(o->common);
    if (o->max_chars) cfg.split.max_chars = *o->max_chars;
    if (o->min_chars) cfg.split.min_chars = *o->min_chars;
    cfg.split.validate();
    const std::vector<Sample> samples = read_samples(o->common.in, io);
    std::vector<SplitResult> results(samples.size());
    parallel_for(samples.size(), resolve_workers(o->common, cfg), [&](std::size_t i) {
      if (text::char_length(samples[i].text) > cfg.split.max_chars) {
        results[i] = split_large(samples[i].text, cfg.split);
      } else {
        results[i].chunks.push_back(samples[i].text);
      }
    });
    Output out(o->common, cfg, io);
    std::uint64_t next_idx = 0;
    std::size_t split_samples = 0, hard = 0, dropped_chars = 0, dropped_chunks = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const SplitResult& r = results[i];
      split_samples += r.chunks.size() > 1;
      hard += r.hard_splits;
      dropped_chars += r.dropped_chars;
      dropped_chunks += r.dropped_chunks;
      for (const std::string& chunk : r.chunks) {
        Sample s = samples[i];
        s.sample_idx = next_idx++;
        s.text = chunk;
        out.sink().write(records::to_json(s));
      }
    }
    out.close();
    io.err << "split: " << samples.size() << " in, " << next_idx << " out, " << split_samples
           << " split, " << hard << " hard splits, " << dropped_chunks << " short tails dropped ("
           << dropped_chars << " chars)\n";
    return kExitOk;
  };
}

Action setup_clean(CLI::App& app) {
  struct Opts {
    CommonOpts common;
    std::optional<double> threshold;
    std::optional<std::size_t> min_words;
    std::string rejects;
    std::string policy;
    bool keep_idx = false;
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--threshold", o->threshold, "Reject when more than this fraction was removed");
  app.add_option("--min-words", o->min_words, "Prose word count that accepts a sample without code");
  app.add_option("--rejects", o->rejects, "Write rejected samples (with reason) to this file");
  app.add_option("--policy", o->policy, "Key-value file of clean policy fields (e.g. tab_width = 4)");
  app.add_flag("--keep-idx", o->keep_idx, "Keep input sample_idx instead of renumbering");
  add_input(app, o->common);
  add_output(app, o->common);
  add_config(app, o->common);
  return [o](Io& io) {
    PipelineConfig cfg = resolve_config(o->common);
    if (!o->policy.empty()) {
      KeyValues kv;
      for (const auto& [k, v] : load_key_values(o->policy)) kv[k.starts_with("clean.") ? k : "clean." + k] = v;
      cfg.clean = config_from_key_values(kv).clean;
    }
    if (o->threshold) cfg.clean.garbage_reject_threshold = *o->threshold;
    if (o->min_words) cfg.clean.min_nl_words = *o->min_words;
    cfg.clean.validate();
    const std::vector<Sample> samples = read_samples(o->common.in, io);
    std::vector<CleanResult> results(samples.size());
    parallel_for(samples.size(), resolve_workers(o->common, cfg),
                 [&](std::size_t i) { results[i] = clean_and_judge(samples[i].text, cfg.clean); });
    Output out(o->common, cfg, io);
    std::unique_ptr<std::ofstream> reject_file;
    if (!o->rejects.empty()) {
      reject_file = std::make_unique<std::ofstream>(o->rejects, std::ios::binary | std::ios::trunc);
      if (!*reject_file) throw Error(ErrorKind::IoError, "cannot write " + o->rejects);
    }
    std::map<std::string, std::size_t> reasons;
    std::uint64_t next_idx = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const CleanResult& r = results[i];
      if (!r.report.accepted) {
        ++reasons[std::string(to_string(*r.report.reject_reason))];
        if (reject_file) {
          records::Json j = records::to_json(samples[i]);
          j["reject_reason"] = std::string(to_string(*r.report.reject_reason));
          j["garbage_ratio"] = r.report.garbage_ratio;
          records::write_line(*reject_file, j);
        }
        continue;
      }
      Sample s = samples[i];
      s.text = r.text;
      s.sample_idx = o->keep_idx ? s.sample_idx : next_idx;
      ++next_idx;
      out.sink().write(records::to_json(s));
    }
    out.close();
    io.err << "clean: " << samples.size() << " in, " << next_idx << " accepted";
    for (const auto& [reason, n] : reasons) io.err << ", " << n << ' ' << reason;
    io.err << '\n';
    return kExitOk;
  };
}

namespace {

PackMode parse_mode(const std::string& m) {
  if (m == "stream") return PackMode::Stream;
  if (m == "greedy") return PackMode::Greedy;
  throw Error(ErrorKind::InvalidArgument, "--mode must be stream or greedy");
}

}  // namespace

Action setup_pack(CLI::App& app) {
  struct Opts {
    CommonOpts common;
    std::optional<std::uint64_t> window;
    std::string counter;
    std::string mode = "stream";
    std::string truncated;
    bool repair_order = false;
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--window", o->window, "Window length in tokens (default: assembly.max_tokens)");
  app.add_option("--counter", o->counter, "Token counter: char:<ratio>, whitespace, external:<file>");
  app.add_option("--mode", o->mode, "stream (samples may continue across windows) or greedy");
  app.add_option("--truncated", o->truncated, "Write the truncated, EOT-terminated samples here");
  app.add_flag("--repair-order", o->repair_order, "Stable-sort samples by sample_idx when the order check fails");
  add_input(app, o->common);
  add_output(app, o->common);
  add_config(app, o->common);
  return [o](Io& io) {
    PipelineConfig cfg = resolve_config(o->common);
    if (o->window) cfg.assembly.max_tokens = *o->window;
    if (!o->counter.empty()) cfg.assembly.counter = TokenCounter::parse(o->counter);
    const PackMode mode = parse_mode(o->mode);
    const std::uint64_t window = cfg.assembly.max_tokens;
    if (window == 0) throw Error(ErrorKind::InvalidArgument, "--window must be >= 1");
    std::vector<Sample> samples = read_samples(o->common.in, io);
    if (!samples.empty() && !verify_order(samples).ok()) {
      if (!o->repair_order) {
        throw Error(ErrorKind::StreamOrder,
                    "samples are not in sample_idx order 0..N-1 (use --repair-order to re-sort)");
      }
      repair_order(samples);
      io.err << "pack: sample order repaired\n";
    }
    std::vector<Truncation> cut(samples.size());
    parallel_for(samples.size(), resolve_workers(o->common, cfg), [&](std::size_t i) {
      cut[i] = truncate_sample(samples[i].text, cfg.assembly, samples[i].sample_idx);
    });
    std::unique_ptr<std::ofstream> tfile;
    if (!o->truncated.empty()) {
      tfile = std::make_unique<std::ofstream>(o->truncated, std::ios::binary | std::ios::trunc);
      if (!*tfile) throw Error(ErrorKind::IoError, "cannot write " + o->truncated);
    }
    std::vector<PackItem> items;
    items.reserve(samples.size());
    std::size_t truncated = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const std::string_view kept =
          std::string_view(cut[i].kept).substr(0, cut[i].kept.size() - cfg.assembly.eot_token.size());
      std::uint64_t tokens;
      if (cut[i].overflow) {
        ++truncated;
        // External counts describe the untruncated text; the budget caps them.
        tokens = std::min(cfg.assembly.counter.count(kept, samples[i].sample_idx), window - 1);
      } else {
        tokens = cfg.assembly.counter.count(kept, samples[i].sample_idx);
      }
      items.push_back({samples[i].sample_idx, tokens});
      if (tfile) {
        Sample s = samples[i];
        s.text = cut[i].kept;
        records::write_line(*tfile, records::to_json(s));
      }
    }
    const PackResult packed = pack(items, window, mode);
    Output out(o->common, cfg, io);
    for (std::size_t w = 0; w < packed.windows.size(); ++w) out.sink().write(records::to_json(packed.windows[w], w));
    out.close();
    io.err << "pack: " << samples.size() << " samples (" << truncated << " truncated) into "
           << packed.windows.size() << " windows of " << window << " tokens, " << to_string(mode)
           << " fill rate " << fixed(packed.fill_rate() * 100.0, 2) << "%\n";
    return kExitOk;
  };
}

Action setup_stats(CLI::App& app) {
  struct Opts {
    CommonOpts common;
    std::optional<std::uint64_t> window;
    std::string counter;
    std::string mode = "stream";
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--window", o->window, "Window length in tokens");
  app.add_option("--counter", o->counter, "Token counter: char:<ratio>, whitespace, external:<file>");
  app.add_option("--mode", o->mode, "Packing mode used for the fill rate");
  app.add_flag("--json", o->common.json, "Emit one JSON record instead of the text table");
  add_input(app, o->common);
  add_config(app, o->common);
  app.add_option("--out,-o", o->common.out, "Output file ('-' for stdout)");
  return [o](Io& io) {
    PipelineConfig cfg = resolve_config(o->common);
    const std::uint64_t window = o->window ? *o->window : cfg.assembly.max_tokens;
    const TokenCounter counter = o->counter.empty() ? cfg.assembly.counter : TokenCounter::parse(o->counter);
    const PackMode mode = parse_mode(o->mode);
    const std::vector<Sample> samples = read_samples(o->common.in, io);
    const CorpusStats stats = corpus_stats(samples, counter, window, mode);
    std::map<std::string, std::pair<std::size_t, std::uint64_t>> per_cat;
    for (const Sample& s : samples) {
      auto& [n, t] = per_cat[s.category];
      ++n;
      std::string_view body = s.text;
      if (body.ends_with(cfg.assembly.eot_token)) body.remove_suffix(cfg.assembly.eot_token.size());
      t += counter.count(body, s.sample_idx);
    }
    Output out(o->common, cfg, io);
    if (o->common.json) {
      records::Json j;
      j["samples"] = stats.sample_count;
      j["total_tokens"] = stats.total_tokens;
      j["mean_sample_tokens"] = stats.mean_sample_tokens;
      j["packing_fill_rate"] = stats.packing_fill_rate;
      j["window_tokens"] = window;
      j["pack_mode"] = std::string(to_string(mode));
      j["counter"] = counter.describe();
      for (const auto& [cat, nt] : per_cat) j["categories"][cat] = {{"samples", nt.first}, {"tokens", nt.second}};
      out.sink().write(j);
    } else {
      std::ostream& t = out.text();
      t << "Corpus statistics\n";
      t << "  Samples                " << stats.sample_count << '\n';
      t << "  Total tokens           " << stats.total_tokens << '\n';
      t << "  Mean tokens per sample " << fixed(stats.mean_sample_tokens, 1) << '\n';
      t << "  Sequence length        " << window << '\n';
      t << "  Packing fill rate      " << fixed(stats.packing_fill_rate * 100.0, 1) << "% (" << to_string(mode)
        << ")\n";
      t << "  Token counter          " << counter.describe() << '\n';
      t << "  Categories             " << per_cat.size() << '\n';
      for (const auto& [cat, nt] : per_cat) {
        t << "    " << cat << std::string(cat.size() < 20 ? 20 - cat.size() : 1, ' ') << nt.first << " samples, "
          << nt.second << " tokens\n";
      }
    }
    out.close();
    return kExitOk;
  };
}

}  // namespace forge::cli
