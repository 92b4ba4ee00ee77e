#pragma once
// Closed-form run planning: adapter scaling, trainable-parameter counts,
// batch/token arithmetic, the warmup+cosine schedule with two LR groups, the
// rank-scaled stable-LR rule, and factorial sweep grids.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace forge::plan {

struct ModuleDescriptor {
  std::string name;
  std::uint64_t d_in = 0;
  std::uint64_t d_out = 0;
  std::uint64_t count = 1;  // layers carrying this module
};

struct LoraConfig {
  std::uint64_t rank = 512;
  double alpha = 1024.0;
  double dropout = 0.05;
  bool rslora = true;
  std::set<std::string> target_modules;

  // alpha defaults to 2 * rank
  static LoraConfig with_rank(std::uint64_t rank, bool rslora = true);
};

// Attention, MLP, and embedding projections.
const std::vector<std::string>& attention_modules();
const std::vector<std::string>& mlp_modules();
const std::vector<std::string>& embedding_modules();
std::set<std::string> full_targets();
std::set<std::string> attention_targets();

// Adapter scale alpha / r (standard) or alpha / sqrt(r) (rank-stabilised).
double adapter_scale(const LoraConfig& cfg);
double effective_lr(double lr, const LoraConfig& cfg);

// r * sum over targeted modules of count * (d_in + d_out). Throws
// Error{MissingModuleDims} when a target has no descriptor and
// Error{InvalidArgument} when rank is 0.
std::uint64_t trainable_params(const LoraConfig& cfg, const std::vector<ModuleDescriptor>& modules);

// Whole-model parameter count implied by the descriptors (d_in * d_out per
// module instance); ignores norms and biases.
std::uint64_t dense_params(const std::vector<ModuleDescriptor>& modules);

// Records `module_name d_in d_out layer_count`; '#' starts a comment.
std::vector<ModuleDescriptor> parse_architecture(std::istream& in);
std::vector<ModuleDescriptor> load_architecture(const std::filesystem::path& path);

enum class LrGroup { Main, Embedding };

// embed_tokens and lm_head go to Embedding, everything else to Main.
LrGroup group_of(const std::string& module_name);

struct TrainPlan {
  std::uint64_t per_device_batch = 4;
  std::uint64_t grad_accum = 8;
  std::uint64_t n_gpu = 8;
  std::uint64_t seq_len = 2048;
  double main_lr = 1.5e-5;
  double embed_lr_ratio = 0.5;
  double min_lr = 0.0;
  double warmup_frac = 0.10;
  std::uint64_t total_steps = 16440;
  double max_grad_norm = 5.0;
  std::uint64_t seed = 3407;

  void validate() const;
  double warmup_steps() const { return warmup_frac * static_cast<double>(total_steps); }
};

struct StepTokens {
  std::uint64_t tokens_per_step = 0;
  std::uint64_t effective_batch = 0;
};

StepTokens tokens_per_step(const TrainPlan& plan);

// Linear warmup to the peak over warmup_frac * T steps, then half-cosine down
// to min_lr at T. The Embedding group runs the same curve scaled by
// embed_lr_ratio. Throws Error{InvalidArgument} for t outside [0, T].
double lr_at(double step, const TrainPlan& plan, LrGroup group = LrGroup::Main);

// lr_ref * sqrt(r_ref / r_target)
double max_stable_lr(double r_target, double r_ref, double lr_ref);

// ---- sweep grids -----------------------------------------------------------

using Axis = std::pair<std::string, std::vector<std::string>>;
using Configuration = std::vector<std::pair<std::string, std::string>>;

// A configuration is excluded when it matches every (axis, level) pair of an
// exclusion. Levels compare numerically when both sides parse as numbers.
using Exclusion = std::vector<std::pair<std::string, std::string>>;

bool level_equal(const std::string& a, const std::string& b);

// Cartesian product in axis order, the last axis varying fastest.
std::vector<Configuration> factorial_grid(const std::vector<Axis>& axes,
                                          const std::vector<Exclusion>& exclusions = {});

// ---- report ------------------------------------------------------------------

struct PlanReport {
  LoraConfig lora;
  TrainPlan plan;
  StepTokens step;
  double scale = 0.0;
  double main_effective_lr = 0.0;
  double embed_lr = 0.0;
  std::uint64_t trainable = 0;
  std::uint64_t dense = 0;
  double warmup_steps = 0.0;
  std::uint64_t total_tokens = 0;
};

PlanReport make_report(const LoraConfig& lora, const TrainPlan& plan,
                       const std::vector<ModuleDescriptor>& modules);

}  // namespace forge::plan
