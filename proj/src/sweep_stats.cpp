#include "forge/sweep_stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "forge/error.hpp"

namespace forge::sweep {

void validate(const SweepRun& run) {
  if (run.min_loss > run.final_loss || run.min_loss > run.init_loss) {
    throw Error(ErrorKind::InvalidArgument, "run '" + run.name + "': min_loss exceeds init or final loss");
  }
}

double reduction(double init_loss, double final_loss) {
  if (!(init_loss > 0.0)) throw Error(ErrorKind::InvalidArgument, "init_loss must be positive");
  return (init_loss - final_loss) / init_loss * 100.0;
}

double reduction(const SweepRun& run) { return reduction(run.init_loss, run.final_loss); }

double round_half_up(double v, int places) {
  const double scale = std::pow(10.0, places);
  // 1.0875 is stored as 1.08749999...; the nudge restores the decimal intent.
  return std::floor(v * scale + 0.5 + 1e-9) / scale;
}

namespace {

bool parses_as_number(const std::string& s) {
  try {
    std::size_t used = 0;
    (void)std::stod(s, &used);
    return used == s.size();
  } catch (const std::logic_error&) {
    return false;
  }
}

}  // namespace

MarginalEffect marginal_effects(const std::vector<SweepRun>& runs, const std::string& axis,
                                const std::vector<std::string>& level_order) {
  if (runs.empty()) throw Error(ErrorKind::InvalidArgument, "marginal effects over no runs");
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const SweepRun& r : runs) {
    const auto it = r.config.find(axis);
    if (it == r.config.end()) {
      throw Error(ErrorKind::MissingAxis, "run '" + r.name + "' has no level for axis '" + axis + "'");
    }
    auto& [sum, n] = acc[it->second];
    sum += r.final_loss;
    ++n;
  }
  std::vector<std::string> order;
  if (!level_order.empty()) {
    order = level_order;
    for (const auto& [level, _] : acc) {
      if (std::find(order.begin(), order.end(), level) == order.end()) {
        throw Error(ErrorKind::InvalidArgument, "level '" + level + "' missing from the level order");
      }
    }
    std::erase_if(order, [&](const std::string& l) { return !acc.contains(l); });
  } else {
    for (const auto& [level, _] : acc) order.push_back(level);
    if (std::all_of(order.begin(), order.end(), parses_as_number)) {
      std::stable_sort(order.begin(), order.end(),
                       [](const std::string& a, const std::string& b) { return std::stod(a) < std::stod(b); });
    }
  }
  MarginalEffect out;
  out.axis = axis;
  for (const std::string& level : order) {
    const auto& [sum, n] = acc.at(level);
    LevelMean lm;
    lm.level = level;
    lm.runs = n;
    lm.mean = sum / static_cast<double>(n);
    lm.mean_rounded = round_half_up(lm.mean, 3);
    out.levels.push_back(lm);
  }
  const LevelMean& first = out.levels.front();
  const LevelMean& last = out.levels.back();
  out.delta_signed = round_half_up(first.mean_rounded - last.mean_rounded, 3);
  out.delta = std::abs(out.delta_signed);
  out.delta_raw = std::abs(first.mean - last.mean);
  return out;
}

std::vector<GradRow> grad_stats(const std::vector<SweepRun>& runs) {
  std::map<std::string, std::size_t> seen;
  for (const SweepRun& r : runs) ++seen[r.name];
  std::vector<GradRow> rows;
  rows.reserve(runs.size());
  for (const SweepRun& r : runs) rows.push_back({r.name, r.config, r.peak_grad, r.mean_grad, seen[r.name] > 1});
  std::stable_sort(rows.begin(), rows.end(), [](const GradRow& a, const GradRow& b) { return a.peak > b.peak; });
  return rows;
}

double total_gpu_hours(const std::vector<SweepRun>& runs) {
  double total = 0.0;
  for (const SweepRun& r : runs) total += r.gpu_hours;
  return total;
}

}  // namespace forge::sweep
