#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "fanc/checkpoint.hpp"
#include "fanc/data.hpp"
#include "fanc/errors.hpp"
#include "fanc/evaluation.hpp"
#include "fanc/gradcheck.hpp"
#include "fanc/kernels.hpp"
#include "fanc/synthetic.hpp"
#include "fanc/training.hpp"
#include "run_config.hpp"

namespace fanc::cli {
namespace fs = std::filesystem;
namespace {

struct Prepared {
  ItemCatalog catalog;
  DatasetSplit split;
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

template <class F>
auto with_file_context(const fs::path& path, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<BehaviourSequence> read_split_file(const fs::path& path, std::size_t n_items) {
  auto in = open_input(path);
  return with_file_context(path, [&] { return read_sequences_csv(in, n_items); });
}

Prepared load_prepared(const RunConfig& c) {
  const fs::path dir = c.data_dir;
  Prepared p;
  {
    const auto path = dir / "catalog.csv";
    auto in = open_input(path);
    p.catalog = with_file_context(path, [&] { return read_catalog_csv(in); });
  }
  const auto n = p.catalog.size();
  p.split.train = read_split_file(dir / "train.csv", n);
  p.split.valid = read_split_file(dir / "valid.csv", n);
  p.split.test = read_split_file(dir / "test.csv", n);
  p.split.seed = c.train.seed;
  return p;
}

const std::vector<BehaviourSequence>& choose_split(const Prepared& p, const std::string& name) {
  if (name == "train") return p.split.train;
  if (name == "valid") return p.split.valid;
  if (name == "test") return p.split.test;
  throw UsageError("key 'split': expected train, valid or test, got '" + name + "'");
}

ModelParameters load_model(const RunConfig& c, const Prepared& p) {
  auto ckpt = load_checkpoint(c.checkpoint_path());
  if (ckpt.model.dims.n_items != p.catalog.size())
    throw DataError("checkpoint has " + std::to_string(ckpt.model.dims.n_items) +
                    " items but the catalog has " + std::to_string(p.catalog.size()));
  return std::move(ckpt.model);
}

void print_metrics(std::ostream& out, const std::string& label, const MetricsTable& t) {
  for (const auto& r : t.rows)
    out << std::left << std::setw(6) << label << std::right << " k=" << std::setw(3) << r.k
        << "  recall " << std::fixed << std::setprecision(4) << r.recall << "  ndcg " << r.ndcg
        << std::defaultfloat << std::setprecision(6) << '\n';
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  const auto ds = generate_synthetic(c.n_items, c.n_sequences, c.train.max_len, c.train.seed);
  const fs::path path = fs::path(c.out_dir) / "interactions.csv";
  auto file = open_output(path);
  write_interactions_csv(file, ds.catalog, ds.sequences, c.seconds_per_unit);
  out << "wrote " << ds.sequences.size() << " sequences over " << ds.catalog.size()
      << " items to " << path.string() << '\n';
  return kOk;
}

int cmd_prep(const RunConfig& c, std::ostream& out) {
  auto ingested = with_file_context(c.data, [&] {
    return ingest_csv(fs::path(c.data), c.seconds_per_unit, c.train.max_len);
  });
  const auto& r = ingested.report;
  out << "rows: " << r.rows << '\n'
      << "sequences_read: " << r.sequences_read << '\n'
      << "dropped_duplicate_timestamps: " << r.dropped_duplicate_timestamps << '\n'
      << "dropped_too_short: " << r.dropped_too_short << '\n';
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';

  std::vector<BehaviourSequence> clamped;
  for (const auto& s : ingested.sequences) clamped.push_back(clamp_intervals(s, c.train.pad));
  const auto parts = split(std::move(clamped), {c.train_ratio, c.valid_ratio, c.test_ratio}, c.train.seed);

  const fs::path dir = c.out_dir;
  {
    auto f = open_output(dir / "catalog.csv");
    write_catalog_csv(f, ingested.catalog);
  }
  const std::pair<const char*, const std::vector<BehaviourSequence>*> files[] = {
      {"train.csv", &parts.train}, {"valid.csv", &parts.valid}, {"test.csv", &parts.test}};
  for (const auto& [name, seqs] : files) {
    auto f = open_output(dir / name);
    write_sequences_csv(f, *seqs);
  }
  out << "items: " << ingested.catalog.size() << '\n'
      << "split: train " << parts.train.size() << ", valid " << parts.valid.size() << ", test "
      << parts.test.size() << '\n';
  return kOk;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  const auto p = load_prepared(c);
  TrainConfig config = c.train;
  config.dims.n_items = p.catalog.size();
  const auto initial = ModelParameters::initialize(config.dims, config.seed);
  const auto result = train(initial, p.split, config, [&](const EpochRecord& r) {
    out << "epoch " << r.epoch << "  lr " << format_number(r.learning_rate) << "  train "
        << std::fixed << std::setprecision(6) << r.train_loss << "  valid " << r.valid_loss
        << std::defaultfloat << '\n';
  });

  Checkpoint ckpt{result.model, result.moments, result.history.size(), {}};
  for (const auto& r : result.history) ckpt.validation_history.push_back(r.valid_loss);
  const auto ckpt_path = c.checkpoint_path();
  if (ckpt_path.has_parent_path()) fs::create_directories(ckpt_path.parent_path());
  save_checkpoint(ckpt_path, ckpt);

  auto history = open_output(fs::path(c.out_dir) / "history.csv");
  history << "epoch,learning_rate,train_loss,valid_loss\n";
  for (const auto& r : result.history)
    history << r.epoch << ',' << format_number(r.learning_rate) << ',' << format_number(r.train_loss)
            << ',' << format_number(r.valid_loss) << '\n';
  out << "best epoch " << result.best_epoch << " of " << result.history.size() << "; checkpoint "
      << ckpt_path.string() << '\n';
  return kOk;
}

void baseline_tables(const RunConfig& c, const Prepared& p,
                     const std::vector<BehaviourSequence>& target,
                     std::vector<std::pair<std::string, MetricsTable>>& tables) {
  const auto n = p.catalog.size();
  const auto pop = popularity_baseline(p.split.train, n);
  tables.emplace_back("pop", evaluate_ranker([&](const BehaviourSequence&, std::size_t) { return pop; },
                                             target, c.train.k_list, n));
  const auto fmc = fmc_baseline(p.split.train, n, c.fmc_alpha);
  tables.emplace_back(
      "fmc", evaluate_ranker([&](const BehaviourSequence& s, std::size_t j) { return fmc.rank(s.steps[j].item); },
                             target, c.train.k_list, n));
}

int write_tables(const RunConfig& c, const std::string& file,
                 const std::vector<std::pair<std::string, MetricsTable>>& tables, std::ostream& out) {
  auto f = open_output(fs::path(c.out_dir) / file);
  bool header = true;
  for (const auto& [label, table] : tables) {
    write_metrics_csv(f, label, table, header);
    header = false;
    print_metrics(out, label, table);
  }
  return kOk;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const auto p = load_prepared(c);
  const auto model = load_model(c, p);
  const auto& target = choose_split(p, c.split);
  std::vector<std::pair<std::string, MetricsTable>> tables;
  tables.emplace_back(c.train.ablate_conscious_only ? "ablated" : "fanc",
                      evaluate(model, target, c.train.k_list, c.train.forward_options(), c.train.threads));
  if (c.with_baselines) baseline_tables(c, p, target, tables);
  return write_tables(c, "metrics.csv", tables, out);
}

int cmd_baseline(const RunConfig& c, std::ostream& out) {
  const auto p = load_prepared(c);
  std::vector<std::pair<std::string, MetricsTable>> tables;
  baseline_tables(c, p, choose_split(p, c.split), tables);
  return write_tables(c, "baseline_metrics.csv", tables, out);
}

int cmd_whatif(const RunConfig& c, std::ostream& out) {
  const auto p = load_prepared(c);
  const auto model = load_model(c, p);
  const auto& seqs = choose_split(p, c.split);
  if (seqs.empty()) throw DataError("split '" + c.split + "' is empty");
  const BehaviourSequence* chosen = &seqs.front();
  if (!c.sequence_id.empty()) {
    chosen = nullptr;
    for (const auto& s : seqs)
      if (s.id == c.sequence_id) chosen = &s;
    if (!chosen) throw DataError("no sequence '" + c.sequence_id + "' in split '" + c.split + "'");
  }
  for (double dt : c.delta_t)
    if (!(dt > 0.0 && dt <= c.train.pad))
      throw UsageError("key 'delta_t': " + format_number(dt) + " outside (0, " +
                       format_number(c.train.pad) + "]");
  const auto rows = whatif_sweep(model, *chosen, c.delta_t, c.top_k, c.train.forward_options(), c.train.pad);
  {
    auto f = open_output(fs::path(c.out_dir) / "whatif.csv");
    write_whatif_csv(f, p.catalog, rows);
  }
  std::ostringstream text;
  write_whatif_text(text, p.catalog, rows);
  {
    auto f = open_output(fs::path(c.out_dir) / "whatif.txt");
    f << text.str();
  }
  out << "sequence " << chosen->id << '\n' << text.str();
  return kOk;
}

int cmd_analyze(const RunConfig& c, std::ostream& out) {
  const auto p = load_prepared(c);
  const auto model = load_model(c, p);
  const auto rows = pleasure_reality_report(model, choose_split(p, c.split), c.train.forward_options());
  auto f = open_output(fs::path(c.out_dir) / "pleasure_reality.csv");
  write_pleasure_reality_csv(f, rows);
  out << "wrote " << rows.size() << " rows to " << (fs::path(c.out_dir) / "pleasure_reality.csv").string()
      << '\n';
  return kOk;
}

int cmd_gradcheck(const RunConfig& c, std::ostream& out) {
  GradcheckInstanceConfig ic;
  ic.seed = c.train.seed;
  const auto instance = make_gradcheck_instance(ic);
  const auto report = check_model_gradients(instance, c.fd_step, c.tolerance);
  for (const auto& g : report.groups)
    out << std::left << std::setw(24) << g.name << std::right << std::scientific
        << std::setprecision(3) << g.max_relative_error << std::defaultfloat << '\n';
  if (report.failure) {
    out << "FAIL: " << *report.failure << '\n';
    return kNumericError;
  }
  out << (report.passed ? "PASS" : "FAIL") << ": max relative error " << std::scientific
      << std::setprecision(3) << report.max_relative_error() << " (tolerance "
      << report.tolerance << ")" << std::defaultfloat << '\n';
  return report.passed ? kOk : kNumericError;
}

void select_kernels(const std::string& name) {
  if (name == "auto") return;
  if (name == "scalar") return kernels::select_backend(kernels::Backend::Scalar);
  if (name == "avx2") {
    if (!kernels::available(kernels::Backend::Avx2))
      throw UsageError("key 'kernels': avx2 is not available on this build or CPU");
    return kernels::select_backend(kernels::Backend::Avx2);
  }
  throw UsageError("key 'kernels': expected auto, scalar or avx2, got '" + name + "'");
}

struct Command {
  const char* name;
  const char* description;
  int (*handler)(const RunConfig&, std::ostream&);
};

constexpr Command kCommands[] = {
    {"synth", "write a synthetic interactions CSV from a planted model", cmd_synth},
    {"prep", "ingest, filter, clamp and split an interactions CSV", cmd_prep},
    {"train", "train a model; writes a checkpoint and history.csv", cmd_train},
    {"eval", "ranking metrics for a checkpoint (and baselines)", cmd_eval},
    {"baseline", "ranking metrics for the POP and FMC baselines", cmd_baseline},
    {"whatif", "top-k recommendations as a function of the next interval", cmd_whatif},
    {"analyze", "per-sequence unconscious displacement and decision gate", cmd_analyze},
    {"gradcheck", "compare analytic gradients with central differences", cmd_gradcheck},
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const RunConfig defaults;
  CLI::App app("Conscious/unconscious sequential recommender", "fanc");
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  std::string config_file;
  std::map<std::string, std::string> overrides;
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& cmd : kCommands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.description);
    sub->add_option("--config", config_file, "key = value configuration file");
    for (const auto& spec : key_specs()) {
      sub->add_option_function<std::string>(
             "--" + spec.name, [&overrides, name = spec.name](const std::string& v) { overrides[name] = v; },
             spec.help)
          ->default_str(spec.get(defaults))
          ->type_name("");
    }
    subs.emplace_back(sub, &cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  const Command* chosen = nullptr;
  for (const auto& [sub, cmd] : subs)
    if (sub->parsed()) chosen = cmd;

  try {
    RunConfig config;
    if (!config_file.empty()) apply_config_file(config, config_file);
    for (const auto& [key, value] : overrides) apply_key(config, key, value);
    select_kernels(config.kernels);
    return chosen->handler(config, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ContractViolation& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace fanc::cli
