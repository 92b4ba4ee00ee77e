#include "forge/corpus_ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "forge/error.hpp"
#include "forge/parallel.hpp"
#include "forge/text.hpp"

namespace fs = std::filesystem;

namespace forge {

bool is_known_category(std::string_view label) {
  return std::find(kCategories.begin(), kCategories.end(), label) != kCategories.end();
}

namespace {

bool is_delimiter_line(std::string_view line, char ch, std::size_t len) {
  const std::string_view body = text::trim_right(line);
  return body.size() == len && std::all_of(body.begin(), body.end(), [ch](char c) { return c == ch; });
}

}  // namespace

std::vector<std::string> split_sections(const RawDocument& doc, char delimiter_char,
                                        std::size_t delimiter_len) {
  if (delimiter_len == 0) throw Error(ErrorKind::InvalidArgument, "delimiter_len must be >= 1");
  const std::string_view content = doc.content;
  std::vector<std::string> sections;
  std::size_t start = 0;
  for (const text::Line& line : text::split_lines(content)) {
    if (!is_delimiter_line(text::view(content, line), delimiter_char, delimiter_len)) continue;
    if (line.begin > start) sections.emplace_back(content.substr(start, line.begin - start));
    start = line.next;
  }
  if (start < content.size()) sections.emplace_back(content.substr(start));
  return sections;
}

std::vector<FileUnit> split_file_units(std::string_view section, std::string_view marker_prefix,
                                       bool retain_marker) {
  std::vector<text::Line> markers;
  for (const text::Line& line : text::split_lines(section)) {
    if (!marker_prefix.empty() && text::view(section, line).starts_with(marker_prefix)) {
      markers.push_back(line);
    }
  }
  std::vector<FileUnit> units;
  const std::size_t first = markers.empty() ? section.size() : markers.front().begin;
  if (first > 0) units.push_back({std::nullopt, std::string(section.substr(0, first))});
  for (std::size_t m = 0; m < markers.size(); ++m) {
    const text::Line& line = markers[m];
    const std::size_t end = m + 1 < markers.size() ? markers[m + 1].begin : section.size();
    const std::size_t body_begin = retain_marker ? line.begin : line.next;
    std::string_view path = text::view(section, line).substr(marker_prefix.size());
    units.push_back({std::string(text::trim(path)),
                     std::string(section.substr(body_begin, end - body_begin))});
  }
  return units;
}

OrderReport verify_order(const std::vector<Sample>& samples, std::size_t prefix_len) {
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "verify_order on an empty corpus");
  std::vector<std::uint64_t> idx;
  idx.reserve(samples.size());
  for (const Sample& s : samples) idx.push_back(s.sample_idx);
  std::sort(idx.begin(), idx.end());
  if (const auto dup = std::adjacent_find(idx.begin(), idx.end()); dup != idx.end()) {
    throw Error(ErrorKind::DuplicateIndex, "duplicate sample_idx " + std::to_string(*dup));
  }
  const std::uint64_t n = samples.size();
  OrderReport report;
  report.first_ok = samples.front().sample_idx == 0;
  report.last_ok = samples.back().sample_idx == n - 1;
  report.prefix_sequential_ok = true;
  for (std::size_t i = 0; i < std::min<std::size_t>(prefix_len, samples.size()); ++i) {
    if (samples[i].sample_idx != i) {
      report.prefix_sequential_ok = false;
      break;
    }
  }
  return report;
}

void repair_order(std::vector<Sample>& samples) {
  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) { return a.sample_idx < b.sample_idx; });
}

void write_done_marker(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorKind::IoError, "not a directory: " + dir.string());
  }
  std::ofstream out(dir / kDoneMarkerName, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write marker in " + dir.string());
  out << "done\n";
}

AwaitClock system_await_clock() {
  return AwaitClock{
      [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); },
      [](std::string_view) {},
  };
}

AwaitResult await_done_marker(const fs::path& dir, const AwaitOptions& options,
                              const AwaitClock& clock) {
  if (options.poll_interval.count() <= 0 || options.log_every.count() <= 0) {
    throw Error(ErrorKind::InvalidArgument, "poll and log intervals must be positive");
  }
  auto check = [&] {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
      throw Error(ErrorKind::IoError, "cannot read directory " + dir.string());
    }
    fs::directory_iterator probe(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot read directory " + dir.string() + ": " + ec.message());
    return fs::exists(dir / kDoneMarkerName, ec);
  };

  AwaitResult result;
  double next_log = options.log_every.count();
  while (!check()) {
    clock.sleep(options.poll_interval);
    ++result.polls;
    result.waited_seconds = static_cast<double>(result.polls) * options.poll_interval.count();
    if (result.waited_seconds >= next_log) {
      std::ostringstream msg;
      msg << "waiting for " << (dir / kDoneMarkerName).string() << ": " << result.waited_seconds
          << " s elapsed";
      if (clock.log) clock.log(msg.str());
      while (next_log <= result.waited_seconds) next_log += options.log_every.count();
    }
  }
  return result;
}

namespace {

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open manifest " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = text::trim_right(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tab = body.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(lineno) +
                                                  ": expected path<TAB>category");
    }
    const std::string category(text::trim(body.substr(tab + 1)));
    if (!is_known_category(category)) {
      throw Error(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(lineno) +
                                                  ": unknown category '" + category + "'");
    }
    out[std::string(text::trim(body.substr(0, tab)))] = category;
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<RawDocument> load_documents(const IngestOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(options.root, ec)) {
    throw Error(ErrorKind::IoError, "input root is not a directory: " + options.root.string());
  }
  const auto manifest = options.manifest ? read_manifest(*options.manifest)
                                         : std::map<std::string, std::string>{};
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(options.root)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename().string().starts_with('.')) continue;
    files.push_back(entry.path());
  }
  std::vector<std::pair<std::string, fs::path>> rel;
  rel.reserve(files.size());
  for (const auto& f : files) rel.emplace_back(fs::relative(f, options.root).generic_string(), f);
  std::sort(rel.begin(), rel.end());

  std::vector<RawDocument> docs;
  docs.reserve(rel.size());
  for (const auto& [relpath, path] : rel) {
    RawDocument doc;
    doc.path = relpath;
    doc.content = read_file(path);
    if (!text::is_valid_utf8(doc.content)) {
      throw Error(ErrorKind::MalformedRecord, relpath + ": not valid UTF-8");
    }
    if (doc.content.empty()) continue;
    if (const auto it = manifest.find(relpath); it != manifest.end()) {
      doc.category = it->second;
    } else if (const auto slash = relpath.find('/'); slash != std::string::npos &&
                                                     is_known_category(relpath.substr(0, slash))) {
      doc.category = relpath.substr(0, slash);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Sample> ingest_documents(const std::vector<RawDocument>& docs,
                                     const IngestOptions& options) {
  std::vector<std::vector<Sample>> per_doc(docs.size());
  parallel_for(docs.size(), options.workers, [&](std::size_t d) {
    const RawDocument& doc = docs[d];
    for (const std::string& section : split_sections(doc, options.delimiter_char, options.delimiter_len)) {
      for (FileUnit& unit : split_file_units(section, options.marker_prefix, options.retain_marker)) {
        if (unit.body.empty()) continue;
        Sample s;
        s.text = std::move(unit.body);
        s.category = doc.category;
        s.source_file = std::move(unit.source_file);
        s.origin_path = doc.path;
        per_doc[d].push_back(std::move(s));
      }
    }
  });
  std::vector<Sample> out;
  std::uint64_t next_idx = 0;
  for (auto& group : per_doc) {
    for (Sample& s : group) {
      s.sample_idx = next_idx++;
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace forge
