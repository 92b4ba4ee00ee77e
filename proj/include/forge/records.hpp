#pragma once
// Line-delimited JSON for every record type the CLI moves around, plus a
// line-counting reader so malformed input is reported with its line number.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/corpus_ingest.hpp"
#include "forge/error.hpp"
#include "forge/eval_metrics.hpp"
#include "forge/mixture_assemble.hpp"
#include "forge/run_monitor.hpp"
#include "forge/sweep_stats.hpp"

namespace forge::records {

using Json = nlohmann::json;

Json to_json(const Sample& s);
Sample sample_from_json(const Json& j);

Json to_json(const PackedSequence& w, std::size_t window_index);

Json to_json(const monitor::RunEvent& e);
monitor::RunEvent event_from_json(const Json& j);
Json to_json(const monitor::Finding& f);
Json to_json(const monitor::RunSummary& s);

Json to_json(const eval::TokenRecord& r);
eval::TokenRecord token_record_from_json(const Json& j);
Json to_json(const eval::GenPair& p);
eval::GenPair gen_pair_from_json(const Json& j);
eval::ScoreMatrix score_matrix_from_json(const Json& j);

Json to_json(const sweep::SweepRun& r);
sweep::SweepRun sweep_run_from_json(const Json& j);

// Reads one JSON value per non-blank line. Parse and conversion failures are
// rethrown as Error{MalformedRecord} prefixed with "<source>:<line>: ".
class JsonlReader {
 public:
  JsonlReader(std::istream& in, std::string source_name);

  // False at end of input.
  bool next(Json& out);
  std::size_t line() const { return line_; }
  const std::string& source() const { return source_; }

  // Applies `convert` to each record, attaching the line number to errors.
  template <class T, class Convert>
  std::vector<T> read_all(Convert convert) {
    std::vector<T> out;
    Json j;
    while (next(j)) out.push_back(wrap(convert, j));
    return out;
  }

  template <class Convert>
  auto wrap(Convert convert, const Json& j) -> decltype(convert(j)) {
    try {
      return convert(j);
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::MalformedRecord || e.kind() == ErrorKind::InvalidArgument ||
          e.kind() == ErrorKind::InvalidEvent) {
        fail(e.what());
      }
      throw;
    }
  }

 private:
  [[noreturn]] void fail(const std::string& what) const;

  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

template <class T, class Convert>
std::vector<T> read_jsonl(std::istream& in, const std::string& source, Convert convert) {
  JsonlReader reader(in, source);
  return reader.template read_all<T>(convert);
}

template <class T, class Convert>
std::vector<T> read_jsonl_file(const std::filesystem::path& path, Convert convert) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return read_jsonl<T>(in, path.string(), convert);
}

// One compact JSON document followed by '\n'.
void write_line(std::ostream& out, const Json& j);

// Record sink that either streams to one ostream or rolls over to numbered
// shard files (`<stem>-00000.jsonl`, ...) every `shard_size` records. The
// shards concatenate to exactly what the single-stream sink would write.
class RecordSink {
 public:
  explicit RecordSink(std::ostream& out);
  RecordSink(std::filesystem::path out_dir, std::size_t shard_size, std::string stem = "part");
  ~RecordSink();

  RecordSink(const RecordSink&) = delete;
  RecordSink& operator=(const RecordSink&) = delete;

  void write(const Json& j);
  void close();

  std::size_t records() const { return records_; }
  const std::vector<std::filesystem::path>& shard_paths() const { return shard_paths_; }

 private:
  void open_next_shard();

  std::ostream* stream_ = nullptr;
  std::filesystem::path out_dir_;
  std::size_t shard_size_ = 0;
  std::string stem_;
  std::unique_ptr<std::ofstream> shard_;
  std::vector<std::filesystem::path> shard_paths_;
  std::size_t records_ = 0;
  std::size_t in_shard_ = 0;
};

std::filesystem::path shard_path(const std::filesystem::path& dir, const std::string& stem, std::size_t index);

}  // namespace forge::records
