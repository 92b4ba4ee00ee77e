#include "forge/hp_plan.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "forge/error.hpp"

namespace forge::plan {

LoraConfig LoraConfig::with_rank(std::uint64_t rank, bool rslora) {
  LoraConfig cfg;
  cfg.rank = rank;
  cfg.alpha = 2.0 * static_cast<double>(rank);
  cfg.rslora = rslora;
  cfg.target_modules = full_targets();
  return cfg;
}

const std::vector<std::string>& attention_modules() {
  static const std::vector<std::string> names{"q_proj", "k_proj", "v_proj", "o_proj"};
  return names;
}

const std::vector<std::string>& mlp_modules() {
  static const std::vector<std::string> names{"gate_proj", "up_proj", "down_proj"};
  return names;
}

const std::vector<std::string>& embedding_modules() {
  static const std::vector<std::string> names{"embed_tokens", "lm_head"};
  return names;
}

std::set<std::string> full_targets() {
  std::set<std::string> out(attention_modules().begin(), attention_modules().end());
  out.insert(mlp_modules().begin(), mlp_modules().end());
  out.insert(embedding_modules().begin(), embedding_modules().end());
  return out;
}

std::set<std::string> attention_targets() {
  return {attention_modules().begin(), attention_modules().end()};
}

double adapter_scale(const LoraConfig& cfg) {
  if (cfg.rank == 0) throw Error(ErrorKind::InvalidArgument, "LoRA rank must be >= 1");
  const auto r = static_cast<double>(cfg.rank);
  return cfg.rslora ? cfg.alpha / std::sqrt(r) : cfg.alpha / r;
}

double effective_lr(double lr, const LoraConfig& cfg) { return lr * adapter_scale(cfg); }

std::uint64_t trainable_params(const LoraConfig& cfg, const std::vector<ModuleDescriptor>& modules) {
  if (cfg.rank == 0) throw Error(ErrorKind::InvalidArgument, "LoRA rank must be >= 1");
  std::uint64_t per_rank = 0;
  for (const std::string& target : cfg.target_modules) {
    bool found = false;
    for (const ModuleDescriptor& m : modules) {
      if (m.name != target) continue;
      per_rank += m.count * (m.d_in + m.d_out);
      found = true;
    }
    if (!found) {
      throw Error(ErrorKind::MissingModuleDims, "no dimensions for target module '" + target + "'");
    }
  }
  return cfg.rank * per_rank;
}

std::uint64_t dense_params(const std::vector<ModuleDescriptor>& modules) {
  std::uint64_t total = 0;
  for (const ModuleDescriptor& m : modules) total += m.count * m.d_in * m.d_out;
  return total;
}

std::vector<ModuleDescriptor> parse_architecture(std::istream& in) {
  std::vector<ModuleDescriptor> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    ModuleDescriptor m;
    if (!(fields >> m.name)) continue;
    std::string extra;
    if (!(fields >> m.d_in >> m.d_out >> m.count) || (fields >> extra) || m.d_in == 0 ||
        m.d_out == 0 || m.count == 0) {
      throw Error(ErrorKind::MalformedRecord,
                  "architecture line " + std::to_string(lineno) +
                      ": expected `module_name d_in d_out layer_count` with positive integers");
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ModuleDescriptor> load_architecture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open architecture file " + path.string());
  return parse_architecture(in);
}

LrGroup group_of(const std::string& module_name) {
  for (const std::string& e : embedding_modules()) {
    if (module_name == e) return LrGroup::Embedding;
  }
  return LrGroup::Main;
}

void TrainPlan::validate() const {
  if (per_device_batch == 0 || grad_accum == 0 || n_gpu == 0 || seq_len == 0 || total_steps == 0) {
    throw Error(ErrorKind::InvalidArgument, "batch, accumulation, GPU, sequence and step counts must be positive");
  }
  if (!(warmup_frac > 0.0 && warmup_frac < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "warmup_frac must be in (0, 1)");
  }
  if (!(main_lr > 0.0) || min_lr < 0.0 || min_lr > main_lr || !(embed_lr_ratio > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "learning rates must satisfy 0 <= min_lr <= main_lr");
  }
}

StepTokens tokens_per_step(const TrainPlan& plan) {
  plan.validate();
  StepTokens out;
  out.effective_batch = plan.per_device_batch * plan.grad_accum * plan.n_gpu;
  out.tokens_per_step = out.effective_batch * plan.seq_len;
  return out;
}

double lr_at(double step, const TrainPlan& plan, LrGroup group) {
  plan.validate();
  const auto total = static_cast<double>(plan.total_steps);
  if (step < 0.0 || step > total) {
    throw Error(ErrorKind::InvalidArgument, "step outside [0, total_steps]");
  }
  const double scale = group == LrGroup::Embedding ? plan.embed_lr_ratio : 1.0;
  const double peak = plan.main_lr * scale;
  const double floor = plan.min_lr * scale;
  const double warmup = plan.warmup_steps();
  if (step <= warmup) return peak * step / warmup;
  const double progress = (step - warmup) / (total - warmup);
  return floor + 0.5 * (peak - floor) * (1.0 + std::cos(progress * std::numbers::pi));
}

double max_stable_lr(double r_target, double r_ref, double lr_ref) {
  if (!(r_target > 0.0) || !(r_ref > 0.0) || !(lr_ref > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "ranks and reference LR must be positive");
  }
  return lr_ref * std::sqrt(r_ref / r_target);
}

bool level_equal(const std::string& a, const std::string& b) {
  if (a == b) return true;
  try {
    std::size_t ua = 0;
    std::size_t ub = 0;
    const double x = std::stod(a, &ua);
    const double y = std::stod(b, &ub);
    return ua == a.size() && ub == b.size() && x == y;
  } catch (const std::logic_error&) {
    return false;
  }
}

std::vector<Configuration> factorial_grid(const std::vector<Axis>& axes,
                                          const std::vector<Exclusion>& exclusions) {
  for (const Axis& axis : axes) {
    if (axis.second.empty()) {
      throw Error(ErrorKind::InvalidArgument, "axis '" + axis.first + "' has no levels");
    }
  }
  std::vector<Configuration> out;
  if (axes.empty()) return out;
  std::vector<std::size_t> odometer(axes.size(), 0);
  while (true) {
    Configuration cfg;
    cfg.reserve(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) cfg.emplace_back(axes[a].first, axes[a].second[odometer[a]]);
    bool excluded = false;
    for (const Exclusion& ex : exclusions) {
      bool all = !ex.empty();
      for (const auto& [axis, level] : ex) {
        bool hit = false;
        for (const auto& [name, value] : cfg) {
          if (name == axis && level_equal(value, level)) hit = true;
        }
        all = all && hit;
      }
      excluded = excluded || all;
    }
    if (!excluded) out.push_back(std::move(cfg));
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++odometer[a] < axes[a].second.size()) break;
      odometer[a] = 0;
      if (a == 0) return out;
    }
  }
}

PlanReport make_report(const LoraConfig& lora, const TrainPlan& plan,
                       const std::vector<ModuleDescriptor>& modules) {
  plan.validate();
  PlanReport r;
  r.lora = lora;
  r.plan = plan;
  r.step = tokens_per_step(plan);
  r.scale = adapter_scale(lora);
  r.main_effective_lr = effective_lr(plan.main_lr, lora);
  r.embed_lr = plan.main_lr * plan.embed_lr_ratio;
  if (!modules.empty()) {
    r.trainable = trainable_params(lora, modules);
    r.dense = dense_params(modules);
  }
  r.warmup_steps = plan.warmup_steps();
  r.total_tokens = r.step.tokens_per_step * plan.total_steps;
  return r;
}

}  // namespace forge::plan
