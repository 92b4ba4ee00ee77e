#pragma once
// Raw corpus files -> ordered Samples.
//
// Documents are split at whole-line section delimiters (82 '=' by default),
// then at `// File:` markers so each unit keeps its source-file provenance.
// Every sample carries a global ordinal (sample_idx) assigned in document
// order; verify_order is the post-hoc check that the order survived.

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

inline constexpr char kSectionDelimiterChar = '=';
inline constexpr std::size_t kSectionDelimiterLen = 82;
inline constexpr std::string_view kFileMarkerPrefix = "// File:";
inline constexpr std::string_view kGeneralCategory = "general";

// The evaluation domains, "general" included.
inline constexpr std::array<std::string_view, 13> kCategories = {
    "wireless_ble_wifi", "linux_kernel",      "nxp_imx",     "device_tree", "usb_stack",
    "zephyr_rtos",       "crypto",            "arm_cortex_asm", "stm32_hal", "general",
    "infineon_aurix",    "amd_gpu_registers", "register_defines"};

bool is_known_category(std::string_view label);

struct RawDocument {
  std::string path;
  std::string content;
  std::string category{kGeneralCategory};
};

struct Sample {
  std::uint64_t sample_idx = 0;
  std::string text;
  std::string category{kGeneralCategory};
  std::optional<std::string> source_file;
  std::string origin_path;

  bool operator==(const Sample&) const = default;
};

// Sections between delimiter lines. A delimiter line is exactly
// `delimiter_len` copies of `delimiter_char`, optionally followed by
// whitespace (so CRLF endings match). Empty sections are dropped; each
// section keeps its own trailing newline.
std::vector<std::string> split_sections(const RawDocument& doc,
                                        char delimiter_char = kSectionDelimiterChar,
                                        std::size_t delimiter_len = kSectionDelimiterLen);

struct FileUnit {
  std::optional<std::string> source_file;
  std::string body;

  bool operator==(const FileUnit&) const = default;
};

// Units start at lines beginning with `marker_prefix` (column 0). Text before
// the first marker becomes a unit with no source_file. With
// `retain_marker` the bodies concatenate back to `section` exactly.
std::vector<FileUnit> split_file_units(std::string_view section,
                                       std::string_view marker_prefix = kFileMarkerPrefix,
                                       bool retain_marker = true);

struct OrderReport {
  bool first_ok = false;
  bool last_ok = false;
  bool prefix_sequential_ok = false;

  bool ok() const { return first_ok && last_ok && prefix_sequential_ok; }
};

inline constexpr std::size_t kOrderPrefixCheck = 1000;

// Throws Error{DuplicateIndex} on a repeated sample_idx and
// Error{InvalidArgument} on an empty list.
OrderReport verify_order(const std::vector<Sample>& samples,
                         std::size_t prefix_len = kOrderPrefixCheck);

// Stable sort by sample_idx.
void repair_order(std::vector<Sample>& samples);

// ---- cross-process completion marker -------------------------------------

inline constexpr std::string_view kDoneMarkerName = ".done";

void write_done_marker(const std::filesystem::path& dir);

struct AwaitOptions {
  std::chrono::duration<double> poll_interval{5.0};
  std::chrono::duration<double> log_every{60.0};
};

// Injected time source so waiting can be tested without real sleeps.
struct AwaitClock {
  std::function<void(std::chrono::duration<double>)> sleep;
  std::function<void(std::string_view)> log;
};

AwaitClock system_await_clock();

struct AwaitResult {
  std::size_t polls = 0;      // sleep-then-check rounds after the initial check
  double waited_seconds = 0;  // polls * poll_interval
};

// Returns once `dir/.done` exists. Throws Error{IoError} when `dir` is not a
// readable directory.
AwaitResult await_done_marker(const std::filesystem::path& dir, const AwaitOptions& options = {},
                              const AwaitClock& clock = system_await_clock());

// ---- directory ingest ------------------------------------------------------

struct IngestOptions {
  std::filesystem::path root;
  std::optional<std::filesystem::path> manifest;  // lines of `path<TAB>category`
  char delimiter_char = kSectionDelimiterChar;
  std::size_t delimiter_len = kSectionDelimiterLen;
  std::string marker_prefix{kFileMarkerPrefix};
  bool retain_marker = true;
  unsigned workers = 1;
};

// Category for a file: manifest entry if present, else the first directory
// component under the root when it names a known category, else "general".
std::vector<RawDocument> load_documents(const IngestOptions& options);

// Splits documents (in parallel when workers > 1) and numbers the resulting
// samples 0..N-1 in document order.
std::vector<Sample> ingest_documents(const std::vector<RawDocument>& docs,
                                     const IngestOptions& options);

}  // namespace forge
