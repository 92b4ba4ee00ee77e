// plan, monitor, eval, sweep
#include <cmath>
#include <map>
#include <sstream>

#include "common.hpp"
#include "forge/error.hpp"
#include "forge/eval_metrics.hpp"
#include "forge/hp_plan.hpp"
#include "forge/run_monitor.hpp"
#include "forge/sweep_stats.hpp"

namespace forge::cli {

namespace {

std::string with_commas(std::uint64_t v) {
  std::string s = std::to_string(v);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

records::Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  try {
    return records::Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, path + ": " + e.what());
  }
}

}  // namespace

Action setup_plan(CLI::App& app) {
  struct Opts {
    CommonOpts common;
    std::uint64_t rank = 512;
    std::optional<double> alpha;
    bool standard = false;
    std::string targets = "full";
    std::string arch;
    plan::TrainPlan train;
    std::vector<double> at_steps;
    double ref_rank = 0;
    double ref_lr = 0;
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--rank,-r", o->rank, "Adapter rank");
  app.add_option("--alpha", o->alpha, "Adapter alpha (default 2 * rank)");
  app.add_flag("--standard", o->standard, "Standard alpha/r scaling instead of alpha/sqrt(r)");
  app.add_option("--targets", o->targets, "full, attn, or a comma list of module names");
  app.add_option("--arch", o->arch, "Architecture file: `module d_in d_out layers` per line");
  app.add_option("--bdev", o->train.per_device_batch, "Per-device batch size");
  app.add_option("--gacc", o->train.grad_accum, "Gradient accumulation steps");
  app.add_option("--gpus", o->train.n_gpu, "Number of GPUs");
  app.add_option("--seq", o->train.seq_len, "Sequence length");
  app.add_option("--lr", o->train.main_lr, "Peak learning rate");
  app.add_option("--embed-ratio", o->train.embed_lr_ratio, "Embedding LR as a fraction of the main LR");
  app.add_option("--min-lr", o->train.min_lr, "Final learning rate");
  app.add_option("--warmup", o->train.warmup_frac, "Warmup fraction of total steps");
  app.add_option("--steps", o->train.total_steps, "Total optimizer steps");
  app.add_option("--at", o->at_steps, "Print the schedule at these steps");
  app.add_option("--ref-rank", o->ref_rank, "Reference rank for the stable-LR estimate");
  app.add_option("--ref-lr", o->ref_lr, "Largest stable LR observed at --ref-rank");
  app.add_flag("--json", o->common.json, "Emit one JSON record instead of the text report");
  app.add_option("--out,-o", o->common.out, "Output file ('-' for stdout)");
  return [o](Io& io) {
    plan::LoraConfig lora = plan::LoraConfig::with_rank(o->rank, !o->standard);
    if (o->alpha) lora.alpha = *o->alpha;
    if (o->targets == "full") {
      lora.target_modules = plan::full_targets();
    } else if (o->targets == "attn") {
      lora.target_modules = plan::attention_targets();
    } else {
      lora.target_modules.clear();
      std::stringstream ss(o->targets);
      std::string m;
      while (std::getline(ss, m, ',')) {
        if (!m.empty()) lora.target_modules.insert(m);
      }
    }
    std::vector<plan::ModuleDescriptor> modules;
    if (!o->arch.empty()) modules = plan::load_architecture(o->arch);
    const plan::PlanReport r = plan::make_report(lora, o->train, modules);
    std::optional<double> stable;
    if (o->ref_rank > 0 && o->ref_lr > 0) {
      stable = plan::max_stable_lr(static_cast<double>(o->rank), o->ref_rank, o->ref_lr);
    }
    PipelineConfig cfg;
    Output out(o->common, cfg, io);
    if (o->common.json) {
      records::Json j;
      j["rank"] = lora.rank;
      j["alpha"] = lora.alpha;
      j["rslora"] = lora.rslora;
      j["adapter_scale"] = r.scale;
      j["effective_lr"] = r.main_effective_lr;
      j["embedding_lr"] = r.embed_lr;
      j["effective_batch"] = r.step.effective_batch;
      j["tokens_per_step"] = r.step.tokens_per_step;
      j["total_tokens"] = r.total_tokens;
      j["warmup_steps"] = r.warmup_steps;
      if (!modules.empty()) {
        j["trainable_params"] = r.trainable;
        j["dense_params"] = r.dense;
      }
      if (stable) j["max_stable_lr"] = *stable;
      for (double s : o->at_steps) {
        j["schedule"].push_back({{"step", s},
                                 {"main_lr", plan::lr_at(s, o->train, plan::LrGroup::Main)},
                                 {"embedding_lr", plan::lr_at(s, o->train, plan::LrGroup::Embedding)}});
      }
      out.sink().write(j);
    } else {
      std::ostream& t = out.text();
      t << "Adapter\n";
      t << "  rank / alpha            " << lora.rank << " / " << lora.alpha << '\n';
      t << "  scaling                 " << (lora.rslora ? "alpha/sqrt(r)" : "alpha/r") << " = "
        << fixed(r.scale, 4) << '\n';
      t << "  effective LR            " << sci(r.main_effective_lr) << " (peak " << sci(o->train.main_lr)
        << ")\n";
      t << "  embedding LR            " << sci(r.embed_lr) << '\n';
      if (!modules.empty()) {
        t << "  trainable parameters    " << with_commas(r.trainable) << '\n';
        t << "  dense parameters        " << with_commas(r.dense) << '\n';
      }
      if (stable) t << "  max stable LR           " << sci(*stable) << '\n';
      t << "Batch\n";
      t << "  effective batch         " << r.step.effective_batch << '\n';
      t << "  tokens per step         " << with_commas(r.step.tokens_per_step) << '\n';
      t << "  total steps             " << with_commas(o->train.total_steps) << '\n';
      t << "  total tokens            " << with_commas(r.total_tokens) << '\n';
      t << "Schedule\n";
      t << "  warmup steps            " << fixed(r.warmup_steps, 1) << '\n';
      for (double s : o->at_steps) {
        t << "  step " << s << ": main " << sci(plan::lr_at(s, o->train, plan::LrGroup::Main)) << ", embedding "
          << sci(plan::lr_at(s, o->train, plan::LrGroup::Embedding)) << '\n';
      }
    }
    out.close();
    return kExitOk;
  };
}

Action setup_monitor(CLI::App& app) {
  struct Opts {
    CommonOpts common;
    std::string summary;
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--summary", o->summary, "Write the end-of-run summary record to this file");
  add_input(app, o->common);
  add_output(app, o->common);
  return [o](Io& io) {
    Input input(o->common.in, io);
    std::vector<monitor::RunEvent> events =
        records::read_jsonl<monitor::RunEvent>(input.stream(), input.name(), records::event_from_json);
    std::vector<monitor::Finding> findings;
    const monitor::RunSummary s = monitor::summarize(events, &findings);
    monitor::MonitorState tail;
    for (const auto& e : events) monitor::observe(tail, e);
    PipelineConfig cfg;
    Output out(o->common, cfg, io);
    for (const monitor::Finding& f : findings) out.sink().write(records::to_json(f));
    out.close();
    records::Json js = records::to_json(s);
    js["throughput_tokens_per_s"] = monitor::throughput(tail);
    if (!o->summary.empty()) {
      std::ofstream sf(o->summary, std::ios::binary | std::ios::trunc);
      if (!sf) throw Error(ErrorKind::IoError, "cannot write " + o->summary);
      records::write_line(sf, js);
    }
    io.err << "monitor: " << s.steps << " events, " << findings.size() << " findings, nan " << s.nan_count
           << ", loss " << fixed(s.init_loss, 3) << " -> " << fixed(s.final_loss, 3) << " ("
           << fixed(s.reduction_pct, 1) << "%), throughput " << fixed(monitor::throughput(tail), 0)
           << " tok/s" << (s.emergency ? ", EMERGENCY SAVE" : "") << '\n';
    return s.emergency ? kExitEmergency : kExitOk;
  };
}

Action setup_eval(CLI::App& app) {
  struct Opts {
    CommonOpts common;
    std::string tokens;
    std::string base_tokens;
    std::string gen;
    std::string matrix;
    std::vector<double> delta;
    bool smooth = false;
    double split_frac = 0.75;
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--tokens", o->tokens, "Per-token records for the adapted model");
  app.add_option("--base-tokens", o->base_tokens, "Per-token records for the base model");
  app.add_option("--gen", o->gen, "Generation pairs (reference vs generated tokens)");
  app.add_option("--matrix", o->matrix, "Score matrix JSON (model -> category -> score) for a winner table");
  app.add_option("--delta", o->delta, "Two perplexities: base adapted")->expected(2);
  app.add_flag("--smooth", o->smooth, "Add-one smoothing for BLEU orders 2-4");
  app.add_flag("--json", o->common.json, "Emit JSON records instead of text tables");
  app.add_option("--out,-o", o->common.out, "Output file ('-' for stdout)");
  return [o](Io& io) {
    if (o->tokens.empty() && o->gen.empty() && o->matrix.empty() && o->delta.empty()) {
      throw Error(ErrorKind::InvalidArgument, "give at least one of --tokens, --gen, --matrix, --delta");
    }
    PipelineConfig cfg;
    Output out(o->common, cfg, io);
    const bool json = o->common.json;
    auto emit = [&](const records::Json& j) { out.sink().write(j); };

    if (o->delta.size() == 2) {
      const double d = eval::delta_ppl(o->delta[0], o->delta[1]);
      if (json) {
        emit({{"kind", "delta_ppl"}, {"base", o->delta[0]}, {"adapted", o->delta[1]}, {"delta_pct", d}});
      } else {
        out.text() << "Delta PPL " << fixed(o->delta[0], 2) << " -> " << fixed(o->delta[1], 2) << ": "
                   << fixed(d, 1) << "%\n";
      }
    }

    auto load_tokens = [](const std::string& path) {
      return records::read_jsonl_file<eval::TokenRecord>(path, records::token_record_from_json);
    };
    if (!o->tokens.empty()) {
      const auto recs = load_tokens(o->tokens);
      const auto reports = eval::category_reports(recs);
      std::map<std::string, eval::CategoryReport> base;
      double base_overall = 0;
      if (!o->base_tokens.empty()) {
        const auto brecs = load_tokens(o->base_tokens);
        for (const auto& r : eval::category_reports(brecs)) base[r.category] = r;
        base_overall = eval::perplexity(brecs);
      }
      std::vector<std::pair<double, std::uint64_t>> weights;
      for (const auto& r : reports) weights.emplace_back(r.ppl, r.token_count);
      const double overall_arith = eval::weighted_ppl(weights, eval::PplPooling::WeightedArithmetic);
      const double overall_pooled = eval::weighted_ppl(weights, eval::PplPooling::PooledNll);
      if (json) {
        for (const auto& r : reports) {
          records::Json j{{"kind", "category"}, {"category", r.category}, {"tokens", r.token_count},
                          {"ppl", r.ppl}, {"mean_loss", r.mean_loss}, {"top1", r.top1}, {"top5", r.top5}};
          if (base.contains(r.category)) {
            j["base_ppl"] = base[r.category].ppl;
            j["base_top1"] = base[r.category].top1;
            j["delta_ppl_pct"] = eval::delta_ppl(base[r.category].ppl, r.ppl);
          }
          emit(j);
        }
        records::Json j{{"kind", "overall"}, {"ppl_weighted_arithmetic", overall_arith},
                        {"ppl_pooled_nll", overall_pooled}};
        if (!base.empty()) j["base_ppl_pooled_nll"] = base_overall;
        emit(j);
      } else {
        std::ostream& t = out.text();
        t << "category              tokens      ppl   top1   top5";
        if (!base.empty()) t << "  base_ppl  delta%";
        t << '\n';
        for (const auto& r : reports) {
          std::string name = r.category;
          name.resize(std::max<std::size_t>(name.size(), 20), ' ');
          t << name << ' ' << std::string(std::to_string(r.token_count).size() < 8 ? 8 - std::to_string(r.token_count).size() : 0, ' ')
            << r.token_count << "  " << fixed(r.ppl, 3) << "  " << fixed(r.top1, 3) << "  " << fixed(r.top5, 3);
          if (base.contains(r.category)) {
            t << "  " << fixed(base[r.category].ppl, 3) << "  " << fixed(eval::delta_ppl(base[r.category].ppl, r.ppl), 1);
          }
          t << '\n';
        }
        t << "overall (token-weighted arithmetic) " << fixed(overall_arith, 3) << '\n';
        t << "overall (pooled NLL)                " << fixed(overall_pooled, 3) << '\n';
      }
    }

    std::optional<eval::ScoreMatrix> matrix;
    if (!o->gen.empty()) {
      const auto pairs = records::read_jsonl_file<eval::GenPair>(o->gen, records::gen_pair_from_json);
      const auto smoothing = o->smooth ? eval::BleuSmoothing::AddOne : eval::BleuSmoothing::None;
      std::map<std::pair<std::string, std::string>, std::tuple<double, double, std::size_t>> acc;
      for (const eval::GenPair& p : pairs) {
        auto& [a, b, n] = acc[{p.model.empty() ? "model" : p.model, p.category}];
        a += eval::gen_token_accuracy(p);
        b += p.generated_tokens.empty() ? 0.0 : eval::bleu4(p.generated_tokens, p.reference_tokens, smoothing);
        ++n;
      }
      eval::ScoreMatrix m;
      for (const auto& [key, v] : acc) {
        const auto& [a, b, n] = v;
        const double acc_mean = a / static_cast<double>(n);
        const double bleu_mean = b / static_cast<double>(n);
        m[key.first][key.second] = acc_mean;
        if (json) {
          emit({{"kind", "generation"}, {"model", key.first}, {"category", key.second}, {"pairs", n},
                {"token_accuracy", acc_mean}, {"bleu4", bleu_mean}});
        } else {
          out.text() << key.first << " / " << key.second << ": " << n << " pairs, token accuracy "
                     << fixed(acc_mean, 3) << ", BLEU-4 " << fixed(bleu_mean, 3) << '\n';
        }
      }
      matrix = m;
    }
    if (!o->matrix.empty()) matrix = records::score_matrix_from_json(read_json_file(o->matrix));
    if (matrix) {
      const auto table = eval::winner_table(*matrix);
      std::map<std::string, std::size_t> wins;
      for (const auto& row : table) {
        for (const auto& w : row.winners) ++wins[w];
      }
      if (json) {
        for (const auto& row : table) {
          emit({{"kind", "winner"}, {"category", row.category}, {"winners", row.winners}, {"best", row.best}});
        }
        emit({{"kind", "wins"}, {"wins", wins}, {"categories", table.size()}});
      } else {
        std::ostream& t = out.text();
        for (const auto& row : table) {
          std::string name = row.category;
          name.resize(std::max<std::size_t>(name.size(), 20), ' ');
          t << name << ' ' << fixed(row.best, 3) << "  ";
          for (std::size_t i = 0; i < row.winners.size(); ++i) t << (i ? " / " : "") << row.winners[i];
          t << '\n';
        }
        for (const auto& [model, n] : wins) t << model << " wins " << n << " of " << table.size() << '\n';
      }
    }
    out.close();
    return kExitOk;
  };
}

Action setup_sweep(CLI::App& app) {
  struct Opts {
    CommonOpts common;
    std::string runs;
    std::string grad;
    std::vector<std::string> axes;
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--runs", o->runs, "Run summaries (JSONL with config, init/final/min loss)")->required();
  app.add_option("--axis", o->axes, "Axis for marginal effects (repeatable; default: every config axis)");
  app.add_option("--grad", o->grad, "Gradient-norm table (default: the runs file)");
  app.add_flag("--json", o->common.json, "Emit JSON records instead of text tables");
  app.add_option("--out,-o", o->common.out, "Output file ('-' for stdout)");
  return [o](Io& io) {
    const auto runs = records::read_jsonl_file<sweep::SweepRun>(o->runs, records::sweep_run_from_json);
    if (runs.empty()) throw Error(ErrorKind::InvalidArgument, o->runs + ": no runs");
    std::vector<std::string> axes = o->axes;
    if (axes.empty()) {
      for (const auto& [axis, _] : runs.front().config) axes.push_back(axis);
    }
    const auto grad_runs =
        o->grad.empty() ? runs : records::read_jsonl_file<sweep::SweepRun>(o->grad, records::sweep_run_from_json);
    PipelineConfig cfg;
    Output out(o->common, cfg, io);
    const bool json = o->common.json;
    std::ostream* t = json ? nullptr : &out.text();

    if (t) *t << "Run reductions\n";
    for (const auto& r : runs) {
      const double red = sweep::reduction(r);
      if (json) {
        out.sink().write({{"kind", "run"}, {"name", r.name}, {"init_loss", r.init_loss}, {"final_loss", r.final_loss},
                          {"min_loss", r.min_loss}, {"reduction_pct", red}});
      } else {
        *t << "  " << r.name << "  " << fixed(r.init_loss, 3) << " -> " << fixed(r.final_loss, 3) << "  min "
           << fixed(r.min_loss, 3) << "  " << fixed(red, 1) << "%\n";
      }
    }
    if (t) *t << "Marginal effects on final loss\n";
    for (const std::string& axis : axes) {
      const sweep::MarginalEffect me = sweep::marginal_effects(runs, axis);
      if (json) {
        records::Json levels = records::Json::array();
        for (const auto& l : me.levels) {
          levels.push_back({{"level", l.level}, {"runs", l.runs}, {"mean", l.mean}, {"mean_3dp", l.mean_rounded}});
        }
        out.sink().write({{"kind", "marginal"}, {"axis", axis}, {"levels", levels}, {"delta", me.delta},
                          {"delta_signed", me.delta_signed}, {"delta_raw", me.delta_raw}});
      } else {
        *t << "  " << axis << '\n';
        for (const auto& l : me.levels) {
          *t << "    " << l.level << "  " << fixed(l.mean_rounded, 3) << "  (" << l.runs << " runs, raw "
             << fixed(l.mean, 6) << ")\n";
        }
        *t << "    delta " << fixed(me.delta, 3) << " (" << me.levels.front().level << " -> "
           << me.levels.back().level << ")\n";
      }
    }
    if (t) *t << "Gradient norms (peak descending)\n";
    for (const auto& g : sweep::grad_stats(grad_runs)) {
      if (json) {
        out.sink().write({{"kind", "grad"}, {"name", g.name}, {"peak", g.peak}, {"mean", g.mean},
                          {"duplicate", g.duplicate_name}});
      } else {
        *t << "  " << g.name << "  peak " << fixed(g.peak, 2) << "  mean " << fixed(g.mean, 2)
           << (g.duplicate_name ? "  [duplicate configuration]" : "") << '\n';
      }
    }
    const double hours = sweep::total_gpu_hours(runs);
    if (json) {
      out.sink().write({{"kind", "cost"}, {"runs", runs.size()}, {"gpu_hours", hours}});
    } else {
      *t << "Total GPU-hours " << fixed(hours, 1) << " over " << runs.size() << " runs\n";
    }
    out.close();
    return kExitOk;
  };
}

}  // namespace forge::cli
