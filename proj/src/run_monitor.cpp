#include "forge/run_monitor.hpp"

#include <algorithm>
#include <cmath>

#include "forge/error.hpp"

namespace forge::monitor {

std::string_view to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::NanInf: return "NanInf";
    case FindingKind::EmergencySave: return "EmergencySave";
    case FindingKind::LossSpike: return "LossSpike";
    case FindingKind::GradSpike: return "GradSpike";
  }
  return "Unknown";
}

void RollingWindow::push(double v) {
  values_.push_back(v);
  if (values_.size() > capacity_) values_.pop_front();
}

double RollingWindow::mean() const {
  if (values_.empty()) return 0.0;
  // Re-summed each time: 20 values, and no drift from add/subtract updates.
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

std::vector<Finding> observe(MonitorState& state, const RunEvent& event) {
  if (state.last_step && event.step <= *state.last_step) {
    throw Error(ErrorKind::StreamOrder, "step " + std::to_string(event.step) +
                                            " does not follow step " + std::to_string(*state.last_step));
  }
  if (!(event.step_time_s > 0.0) || !std::isfinite(event.step_time_s)) {
    throw Error(ErrorKind::InvalidEvent, "step " + std::to_string(event.step) + ": step_time_s must be > 0");
  }
  if (event.grad_norm_post_clip && !(*event.grad_norm_post_clip >= 0.0)) {
    throw Error(ErrorKind::InvalidEvent, "step " + std::to_string(event.step) + ": grad norm must be >= 0");
  }
  state.last_step = event.step;

  std::vector<Finding> found;
  if (!std::isfinite(event.loss)) {
    ++state.nan_count;
    ++state.consecutive_nan;
    found.push_back({FindingKind::NanInf, event.step, event.loss, 0.0, event.batch_preview});
    if (state.consecutive_nan == kEmergencyNanRun) {
      found.push_back({FindingKind::EmergencySave, event.step, event.loss, 0.0, std::nullopt});
      state.emergency_seen = true;
    }
  } else {
    state.consecutive_nan = 0;
    if (state.loss_window.full()) {
      const double ref = state.loss_window.mean();
      if (event.loss > kLossSpikeFactor * ref) {
        found.push_back({FindingKind::LossSpike, event.step, event.loss, ref, std::nullopt});
      }
    }
    state.loss_window.push(event.loss);
  }

  if (event.grad_norm_post_clip && std::isfinite(*event.grad_norm_post_clip)) {
    const double g = *event.grad_norm_post_clip;
    if (state.grad_window.full()) {
      const double ref = state.grad_window.mean();
      if (g > kGradSpikeFactor * ref) {
        found.push_back({FindingKind::GradSpike, event.step, g, ref, std::nullopt});
      }
    }
    state.grad_window.push(g);
  }

  state.throughput_window.emplace_back(event.tokens_in_step, event.step_time_s);
  if (state.throughput_window.size() > state.throughput_capacity) state.throughput_window.pop_front();

  state.anomaly_count += found.size();
  return found;
}

double throughput(const MonitorState& state) {
  if (state.throughput_window.empty()) {
    throw Error(ErrorKind::InvalidArgument, "throughput before any event");
  }
  double tokens = 0.0;
  double seconds = 0.0;
  for (const auto& [t, s] : state.throughput_window) {
    tokens += static_cast<double>(t);
    seconds += s;
  }
  return tokens / seconds;
}

RunSummary summarize(const std::vector<RunEvent>& events, std::vector<Finding>* findings) {
  if (events.empty()) throw Error(ErrorKind::InvalidArgument, "summarize on an empty stream");
  MonitorState state;
  RunSummary s;
  std::optional<double> init;
  std::optional<double> first_finite;
  std::optional<double> last_finite;
  double min_loss = 0.0;
  double grad_sum = 0.0;
  std::uint64_t grad_n = 0;
  for (const RunEvent& e : events) {
    std::vector<Finding> f = observe(state, e);
    if (findings) findings->insert(findings->end(), f.begin(), f.end());
    if (std::isfinite(e.loss)) {
      if (!first_finite) min_loss = e.loss;
      if (!first_finite) first_finite = e.loss;
      if (!init && e.step >= kInitLossStep) init = e.loss;
      last_finite = e.loss;
      min_loss = std::min(min_loss, e.loss);
    }
    if (e.grad_norm_post_clip && std::isfinite(*e.grad_norm_post_clip)) {
      s.peak_grad = std::max(s.peak_grad, *e.grad_norm_post_clip);
      grad_sum += *e.grad_norm_post_clip;
      ++grad_n;
    }
  }
  if (!first_finite) throw Error(ErrorKind::InvalidArgument, "stream has no finite loss");
  s.init_loss = init ? *init : *first_finite;
  s.final_loss = *last_finite;
  s.min_loss = min_loss;
  s.reduction_pct = s.init_loss != 0.0 ? (s.init_loss - s.final_loss) / s.init_loss * 100.0 : 0.0;
  s.mean_grad = grad_n ? grad_sum / static_cast<double>(grad_n) : 0.0;
  s.nan_count = state.nan_count;
  s.anomaly_count = state.anomaly_count;
  s.steps = events.size();
  s.emergency = state.emergency_seen;
  return s;
}

}  // namespace forge::monitor
