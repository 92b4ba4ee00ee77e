#pragma once
// Analytics over a finished hyperparameter sweep: loss reduction per run,
// per-axis marginal means, and gradient-norm rankings.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace forge::sweep {

struct SweepRun {
  std::string name;
  std::map<std::string, std::string> config;  // axis -> level
  double init_loss = 0.0;
  double final_loss = 0.0;
  double min_loss = 0.0;
  double peak_grad = 0.0;
  double mean_grad = 0.0;
  double gpu_hours = 0.0;
};

// Throws Error{InvalidArgument} when min_loss exceeds final or init loss.
void validate(const SweepRun& run);

// (init - final) / init * 100. Throws Error{InvalidArgument} for init <= 0.
double reduction(const SweepRun& run);
double reduction(double init_loss, double final_loss);

// Half-up rounding to `places` decimals. Values a hair below a half (binary
// representation of decimal inputs) still round up.
double round_half_up(double v, int places);

struct LevelMean {
  std::string level;
  std::size_t runs = 0;
  double mean = 0.0;          // full precision
  double mean_rounded = 0.0;  // 3 decimals
};

struct MarginalEffect {
  std::string axis;
  std::vector<LevelMean> levels;  // configured level order
  // Between the first and last configured level, on the 3-decimal means.
  double delta_signed = 0.0;  // first - last
  double delta = 0.0;         // |first - last|
  double delta_raw = 0.0;     // |first - last| at full precision
};

// Level order: numeric ascending when every level parses as a number,
// otherwise lexicographic. `level_order` overrides it. Throws
// Error{MissingAxis} when a run lacks the axis and Error{InvalidArgument} on
// an empty run list.
MarginalEffect marginal_effects(const std::vector<SweepRun>& runs, const std::string& axis,
                                const std::vector<std::string>& level_order = {});

struct GradRow {
  std::string name;
  std::map<std::string, std::string> config;
  double peak = 0.0;
  double mean = 0.0;
  bool duplicate_name = false;  // the same configuration appears more than once
};

// Sorted by peak descending; ties keep input order.
std::vector<GradRow> grad_stats(const std::vector<SweepRun>& runs);

double total_gpu_hours(const std::vector<SweepRun>& runs);

}  // namespace forge::sweep
