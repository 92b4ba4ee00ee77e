#include "forge/records.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace forge::records {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorKind::MalformedRecord, what); }

const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) malformed("record is not a JSON object");
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) malformed(std::string("missing field '") + key + "'");
  return *it;
}

std::uint64_t get_u64(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    malformed(std::string("field '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

double get_f64(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number()) malformed(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::string get_str(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_string()) malformed(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::string opt_str(const Json& j, const char* key, std::string fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_string()) malformed(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

// JSON has no NaN or Inf literals: null and "nan" read as NaN, "inf"/"-inf"
// as infinities.
double loss_value(const Json& j) {
  const auto it = j.find("loss");
  if (it == j.end()) malformed("missing field 'loss'");
  if (it->is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (it->is_number()) return it->get<double>();
  if (it->is_string()) {
    const std::string s = it->get<std::string>();
    if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  malformed("field 'loss' must be a number, null, or one of \"nan\", \"inf\", \"-inf\"");
}

Json loss_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::vector<eval::TokenId> token_list(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_array()) malformed(std::string("field '") + key + "' must be an array");
  std::vector<eval::TokenId> out;
  out.reserve(v.size());
  for (const Json& t : v) {
    if (!t.is_number_integer()) malformed(std::string("field '") + key + "' must hold integer token ids");
    out.push_back(t.get<eval::TokenId>());
  }
  return out;
}

}  // namespace

Json to_json(const Sample& s) {
  Json j;
  j["sample_idx"] = s.sample_idx;
  j["text"] = s.text;
  j["category"] = s.category;
  if (s.source_file) j["source_file"] = *s.source_file;
  if (!s.origin_path.empty()) j["origin_path"] = s.origin_path;
  return j;
}

Sample sample_from_json(const Json& j) {
  Sample s;
  s.sample_idx = get_u64(j, "sample_idx");
  s.text = get_str(j, "text");
  s.category = opt_str(j, "category", std::string(kGeneralCategory));
  if (j.contains("source_file") && !j["source_file"].is_null()) s.source_file = get_str(j, "source_file");
  s.origin_path = opt_str(j, "origin_path", "");
  return s;
}

Json to_json(const PackedSequence& w, std::size_t window_index) {
  Json j;
  j["window"] = window_index;
  j["window_tokens"] = w.window_tokens;
  j["member_sample_idxs"] = w.member_sample_idxs;
  if (w.continued_sample_idx) {
    j["continued_sample_idx"] = *w.continued_sample_idx;
    j["continued_tokens"] = w.continued_tokens;
  }
  j["used_tokens"] = w.used_tokens;
  if (w.elided_eos) j["elided_eos"] = w.elided_eos;
  return j;
}

Json to_json(const monitor::RunEvent& e) {
  Json j;
  j["step"] = e.step;
  j["loss"] = loss_json(e.loss);
  if (e.grad_norm_post_clip) j["grad_norm_post_clip"] = *e.grad_norm_post_clip;
  j["step_time_sec"] = e.step_time_s;
  j["tokens"] = e.tokens_in_step;
  if (e.batch_preview) j["batch_preview"] = *e.batch_preview;
  return j;
}

monitor::RunEvent event_from_json(const Json& j) {
  monitor::RunEvent e;
  e.step = get_u64(j, "step");
  e.loss = loss_value(j);
  if (j.contains("grad_norm_post_clip") && !j["grad_norm_post_clip"].is_null()) {
    e.grad_norm_post_clip = get_f64(j, "grad_norm_post_clip");
  }
  e.step_time_s = get_f64(j, "step_time_sec");
  e.tokens_in_step = get_u64(j, "tokens");
  if (j.contains("batch_preview") && !j["batch_preview"].is_null()) e.batch_preview = get_str(j, "batch_preview");
  return e;
}

Json to_json(const monitor::Finding& f) {
  Json j;
  j["finding"] = std::string(monitor::to_string(f.kind));
  j["step"] = f.step;
  j["value"] = loss_json(f.value);
  if (f.kind == monitor::FindingKind::LossSpike || f.kind == monitor::FindingKind::GradSpike) {
    j["rolling_mean"] = f.reference;
  }
  if (f.batch_preview) j["batch_preview"] = *f.batch_preview;
  return j;
}

Json to_json(const monitor::RunSummary& s) {
  Json j;
  j["init_loss"] = s.init_loss;
  j["final_loss"] = s.final_loss;
  j["min_loss"] = s.min_loss;
  j["reduction_pct"] = s.reduction_pct;
  j["peak_grad"] = s.peak_grad;
  j["mean_grad"] = s.mean_grad;
  j["nan_count"] = s.nan_count;
  j["anomaly_count"] = s.anomaly_count;
  j["steps"] = s.steps;
  j["emergency_save"] = s.emergency;
  return j;
}

Json to_json(const eval::TokenRecord& r) {
  Json j;
  j["sample_id"] = r.sample_id;
  j["position"] = r.position;
  j["ref_token_id"] = r.ref_token_id;
  j["logprob_of_ref"] = r.logprob_of_ref;
  j["topk_ids"] = r.topk_ids;
  j["category"] = r.category;
  return j;
}

eval::TokenRecord token_record_from_json(const Json& j) {
  eval::TokenRecord r;
  const Json& id = require(j, "sample_id");
  r.sample_id = id.is_string() ? id.get<std::string>() : id.dump();
  r.position = get_u64(j, "position");
  const Json& ref = require(j, "ref_token_id");
  if (!ref.is_number_integer()) malformed("field 'ref_token_id' must be an integer");
  r.ref_token_id = ref.get<eval::TokenId>();
  r.logprob_of_ref = get_f64(j, "logprob_of_ref");
  r.topk_ids = token_list(j, "topk_ids");
  r.category = opt_str(j, "category", "general");
  eval::validate(r);
  return r;
}

Json to_json(const eval::GenPair& p) {
  Json j;
  j["sample_id"] = p.sample_id;
  j["category"] = p.category;
  j["reference_tokens"] = p.reference_tokens;
  j["generated_tokens"] = p.generated_tokens;
  if (!p.model.empty()) j["model"] = p.model;
  return j;
}

eval::GenPair gen_pair_from_json(const Json& j) {
  eval::GenPair p;
  const Json& id = require(j, "sample_id");
  p.sample_id = id.is_string() ? id.get<std::string>() : id.dump();
  p.category = opt_str(j, "category", "general");
  p.reference_tokens = token_list(j, "reference_tokens");
  p.generated_tokens = token_list(j, "generated_tokens");
  p.model = opt_str(j, "model", "");
  if (p.reference_tokens.empty()) malformed("field 'reference_tokens' must be non-empty");
  return p;
}

eval::ScoreMatrix score_matrix_from_json(const Json& j) {
  if (!j.is_object()) malformed("score matrix must be an object of model -> category -> score");
  eval::ScoreMatrix m;
  for (const auto& [model, row] : j.items()) {
    if (!row.is_object()) malformed("scores for model '" + model + "' must be an object");
    for (const auto& [cat, v] : row.items()) {
      if (!v.is_number()) malformed("score for " + model + "/" + cat + " must be a number");
      m[model][cat] = v.get<double>();
    }
  }
  return m;
}

Json to_json(const sweep::SweepRun& r) {
  Json j;
  j["name"] = r.name;
  j["config"] = r.config;
  j["init_loss"] = r.init_loss;
  j["final_loss"] = r.final_loss;
  j["min_loss"] = r.min_loss;
  j["peak_grad"] = r.peak_grad;
  j["mean_grad"] = r.mean_grad;
  j["gpu_hours"] = r.gpu_hours;
  return j;
}

sweep::SweepRun sweep_run_from_json(const Json& j) {
  sweep::SweepRun r;
  r.name = opt_str(j, "name", "");
  if (j.contains("config")) {
    const Json& c = j["config"];
    if (!c.is_object()) malformed("field 'config' must be an object");
    for (const auto& [axis, level] : c.items()) {
      r.config[axis] = level.is_string() ? level.get<std::string>() : level.dump();
    }
  }
  // Loss fields are optional so gradient-only tables load through the same path.
  auto opt = [&](const char* key) { return j.contains(key) && !j[key].is_null() ? get_f64(j, key) : 0.0; };
  r.init_loss = opt("init_loss");
  r.final_loss = opt("final_loss");
  r.min_loss = opt("min_loss");
  r.peak_grad = opt("peak_grad");
  r.mean_grad = opt("mean_grad");
  r.gpu_hours = opt("gpu_hours");
  if (j.contains("init_loss")) sweep::validate(r);
  return r;
}

JsonlReader::JsonlReader(std::istream& in, std::string source_name)
    : in_(in), source_(std::move(source_name)) {}

bool JsonlReader::next(Json& out) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(e.what());
    }
    return true;
  }
  if (in_.bad()) throw Error(ErrorKind::IoError, source_ + ": read failed");
  return false;
}

void JsonlReader::fail(const std::string& what) const {
  throw Error(ErrorKind::MalformedRecord, source_ + ":" + std::to_string(line_) + ": " + what);
}

void write_line(std::ostream& out, const Json& j) {
  out << j.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
}

std::filesystem::path shard_path(const std::filesystem::path& dir, const std::string& stem, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "-%05zu.jsonl", index);
  return dir / (stem + buf);
}

RecordSink::RecordSink(std::ostream& out) : stream_(&out) {}

RecordSink::RecordSink(std::filesystem::path out_dir, std::size_t shard_size, std::string stem)
    : out_dir_(std::move(out_dir)), shard_size_(shard_size), stem_(std::move(stem)) {
  if (shard_size_ == 0) throw Error(ErrorKind::InvalidArgument, "shard size must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir_, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir_.string() + ": " + ec.message());
}

RecordSink::~RecordSink() {
  try {
    close();
  } catch (...) {
  }
}

void RecordSink::open_next_shard() {
  if (shard_) shard_->close();
  const std::filesystem::path p = shard_path(out_dir_, stem_, shard_paths_.size());
  shard_ = std::make_unique<std::ofstream>(p, std::ios::binary | std::ios::trunc);
  if (!*shard_) throw Error(ErrorKind::IoError, "cannot write " + p.string());
  shard_paths_.push_back(p);
  in_shard_ = 0;
}

void RecordSink::write(const Json& j) {
  if (stream_) {
    write_line(*stream_, j);
  } else {
    if (!shard_ || in_shard_ == shard_size_) open_next_shard();
    write_line(*shard_, j);
    ++in_shard_;
  }
  ++records_;
}

void RecordSink::close() {
  if (stream_) {
    stream_->flush();
    return;
  }
  if (shard_) {
    shard_->close();
    if (shard_->fail()) throw Error(ErrorKind::IoError, "failed writing " + shard_paths_.back().string());
    shard_.reset();
  }
}

}  // namespace forge::records
