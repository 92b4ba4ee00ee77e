#pragma once
// Streaming checks over training-event logs. One MonitorState per stream.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace forge::monitor {

inline constexpr std::size_t kWindow = 20;
inline constexpr double kLossSpikeFactor = 1.5;
inline constexpr double kGradSpikeFactor = 2.0;
inline constexpr std::uint64_t kEmergencyNanRun = 3;
inline constexpr std::uint64_t kInitLossStep = 10;

struct RunEvent {
  std::uint64_t step = 0;
  double loss = 0.0;  // may be NaN/Inf
  std::optional<double> grad_norm_post_clip;
  double step_time_s = 1.0;
  std::uint64_t tokens_in_step = 0;
  std::optional<std::string> batch_preview;
};

enum class FindingKind { NanInf, EmergencySave, LossSpike, GradSpike };

std::string_view to_string(FindingKind kind);

struct Finding {
  FindingKind kind = FindingKind::NanInf;
  std::uint64_t step = 0;
  double value = 0.0;      // offending loss or grad norm
  double reference = 0.0;  // rolling mean it was compared against (spikes)
  std::optional<std::string> batch_preview;  // NanInf only
};

// Fixed-capacity FIFO with a running sum.
class RollingWindow {
 public:
  explicit RollingWindow(std::size_t capacity = kWindow) : capacity_(capacity) {}

  void push(double v);
  bool full() const { return values_.size() == capacity_; }
  std::size_t size() const { return values_.size(); }
  std::size_t capacity() const { return capacity_; }
  double mean() const;
  const std::deque<double>& values() const { return values_; }

 private:
  std::size_t capacity_;
  std::deque<double> values_;
};

struct MonitorState {
  RollingWindow loss_window{kWindow};
  RollingWindow grad_window{kWindow};
  std::deque<std::pair<std::uint64_t, double>> throughput_window;  // (tokens, seconds)
  std::size_t throughput_capacity = kWindow;
  std::uint64_t consecutive_nan = 0;
  std::uint64_t anomaly_count = 0;
  std::uint64_t nan_count = 0;
  std::optional<std::uint64_t> last_step;
  bool emergency_seen = false;
};

// Throws Error{StreamOrder} when step does not increase and
// Error{InvalidEvent} for step_time_s <= 0 or a negative grad norm.
std::vector<Finding> observe(MonitorState& state, const RunEvent& event);

// Tokens per second over the throughput window. Throws Error{InvalidArgument}
// before the first event.
double throughput(const MonitorState& state);

struct RunSummary {
  double init_loss = 0.0;
  double final_loss = 0.0;
  double min_loss = 0.0;
  double reduction_pct = 0.0;
  double peak_grad = 0.0;
  double mean_grad = 0.0;
  std::uint64_t nan_count = 0;
  std::uint64_t anomaly_count = 0;
  std::uint64_t steps = 0;
  bool emergency = false;
};

// Runs observe over the stream. init_loss is the finite loss at step 10, or
// at the first step >= 10 (the first finite loss when the stream ends
// earlier). Throws Error{InvalidArgument} on an empty stream or one without a
// finite loss.
RunSummary summarize(const std::vector<RunEvent>& events,
                     std::vector<Finding>* findings = nullptr);

}  // namespace forge::monitor
