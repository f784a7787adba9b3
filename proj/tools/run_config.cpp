#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fanc::cli {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty())
    throw UsageError("key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty())
    throw UsageError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw UsageError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& values, F&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format(values[i]);
  return out;
}

KeySpec number(std::string name, std::string help, double RunConfig::*member) {
  return {name, std::move(help),
          [name, member](RunConfig& c, const std::string& v) { c.*member = parse_double(name, v); },
          [member](const RunConfig& c) { return format_number(c.*member); }};
}

KeySpec train_number(std::string name, std::string help, double TrainConfig::*member) {
  return {name, std::move(help),
          [name, member](RunConfig& c, const std::string& v) { c.train.*member = parse_double(name, v); },
          [member](const RunConfig& c) { return format_number(c.train.*member); }};
}

KeySpec count(std::string name, std::string help, std::size_t RunConfig::*member) {
  return {name, std::move(help),
          [name, member](RunConfig& c, const std::string& v) { c.*member = parse_size(name, v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

KeySpec train_count(std::string name, std::string help, std::size_t TrainConfig::*member) {
  return {name, std::move(help),
          [name, member](RunConfig& c, const std::string& v) { c.train.*member = parse_size(name, v); },
          [member](const RunConfig& c) { return std::to_string(c.train.*member); }};
}

KeySpec dim(std::string name, std::string help, std::size_t ModelDims::*member) {
  return {name, std::move(help),
          [name, member](RunConfig& c, const std::string& v) { c.train.dims.*member = parse_size(name, v); },
          [member](const RunConfig& c) { return std::to_string(c.train.dims.*member); }};
}

KeySpec text(std::string name, std::string help, std::string RunConfig::*member) {
  return {name, std::move(help), [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

KeySpec flag(std::string name, std::string help, bool RunConfig::*member) {
  return {name, std::move(help),
          [name, member](RunConfig& c, const std::string& v) { c.*member = parse_bool(name, v); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

KeySpec train_flag(std::string name, std::string help, bool TrainConfig::*member) {
  return {name, std::move(help),
          [name, member](RunConfig& c, const std::string& v) { c.train.*member = parse_bool(name, v); },
          [member](const RunConfig& c) { return std::string(c.train.*member ? "true" : "false"); }};
}

std::vector<KeySpec> build_specs() {
  std::vector<KeySpec> s;
  // Data and files.
  s.push_back(text("data", "raw interactions CSV (sequence_id,item_id,timestamp) for prep", &RunConfig::data));
  s.push_back(text("data_dir", "directory holding prep output (catalog.csv, train/valid/test.csv)", &RunConfig::data_dir));
  s.push_back(text("out_dir", "directory for command output", &RunConfig::out_dir));
  s.push_back(text("checkpoint", "checkpoint path (default <out_dir>/checkpoint.fanc)", &RunConfig::checkpoint));
  s.push_back(number("seconds_per_unit", "seconds per model time unit (604800 = week, 7889400 = quarter)", &RunConfig::seconds_per_unit));
  s.push_back(number("train_ratio", "fraction of sequences for training", &RunConfig::train_ratio));
  s.push_back(number("valid_ratio", "fraction of sequences for validation", &RunConfig::valid_ratio));
  s.push_back(number("test_ratio", "fraction of sequences for testing", &RunConfig::test_ratio));
  s.push_back(train_count("max_len", "sequence length L (L inputs + 1 target kept per sequence)", &TrainConfig::max_len));
  s.push_back(count("n_items", "synth: catalog size", &RunConfig::n_items));
  s.push_back(count("n_sequences", "synth: number of sequences", &RunConfig::n_sequences));
  // Model.
  s.push_back(dim("d_u", "item embedding and unconscious dimension", &ModelDims::d_u));
  s.push_back(dim("d_c", "conscious dimension", &ModelDims::d_c));
  s.push_back(train_number("epsilon", "gravity softening length", &TrainConfig::epsilon));
  s.push_back(train_number("a_max", "acceleration norm cap", &TrainConfig::a_max));
  s.push_back(train_flag("clamp", "apply the acceleration cap", &TrainConfig::clamp));
  s.push_back(train_number("steps_per_unit", "RK4 steps per time unit", &TrainConfig::steps_per_unit));
  s.push_back(train_number("pad", "maximum interval and float horizon", &TrainConfig::pad));
  s.push_back(train_flag("ablate", "conscious-only model (decision gate fixed to 1)", &TrainConfig::ablate_conscious_only));
  // Optimisation.
  s.push_back(train_number("learning_rate", "Adam learning rate", &TrainConfig::learning_rate));
  s.push_back(train_count("batch_size", "sequences per mini-batch", &TrainConfig::batch_size));
  s.push_back(train_count("max_epochs", "epoch limit", &TrainConfig::max_epochs));
  s.push_back(train_count("patience", "early-stopping patience in epochs", &TrainConfig::patience));
  s.push_back(train_count("warmup_epochs", "epochs of linear learning-rate warm-up", &TrainConfig::warmup_epochs));
  s.push_back(train_number("warmup_start_fraction", "warm-up starting fraction of learning_rate", &TrainConfig::warmup_start_fraction));
  s.push_back(train_number("adam_beta1", "Adam first-moment decay", &TrainConfig::adam_beta1));
  s.push_back(train_number("adam_beta2", "Adam second-moment decay", &TrainConfig::adam_beta2));
  s.push_back(train_number("adam_epsilon", "Adam denominator offset", &TrainConfig::adam_epsilon));
  s.push_back({"seed", "seed for synthesis, splitting, initialisation and shuffling",
               [](RunConfig& c, const std::string& v) { c.train.seed = parse_size("seed", v); },
               [](const RunConfig& c) { return std::to_string(c.train.seed); }});
  s.push_back(train_count("threads", "worker threads for batch gradients and evaluation", &TrainConfig::threads));
  s.push_back(text("kernels", "inner-loop kernels: auto, scalar or avx2", &RunConfig::kernels));
  // Evaluation and analysis.
  s.push_back({"k_list", "comma-separated cutoffs for Recall@k and nDCG@k",
               [](RunConfig& c, const std::string& v) {
                 std::vector<std::size_t> ks;
                 for (const auto& item : split_list(v)) ks.push_back(parse_size("k_list", item));
                 if (ks.empty()) throw UsageError("key 'k_list': empty list");
                 c.train.k_list = std::move(ks);
               },
               [](const RunConfig& c) {
                 return join(c.train.k_list, [](std::size_t k) { return std::to_string(k); });
               }});
  s.push_back(text("split", "split used by eval, whatif and analyze: train, valid or test", &RunConfig::split));
  s.push_back(flag("with_baselines", "eval: also report POP and FMC", &RunConfig::with_baselines));
  s.push_back(number("fmc_alpha", "FMC additive smoothing", &RunConfig::fmc_alpha));
  s.push_back(text("sequence_id", "whatif: sequence to analyse (default: first in split)", &RunConfig::sequence_id));
  s.push_back({"delta_t", "whatif: comma-separated intervals in (0, pad]",
               [](RunConfig& c, const std::string& v) {
                 std::vector<double> ts;
                 for (const auto& item : split_list(v)) ts.push_back(parse_double("delta_t", item));
                 if (ts.empty()) throw UsageError("key 'delta_t': empty list");
                 c.delta_t = std::move(ts);
               },
               [](const RunConfig& c) { return join(c.delta_t, format_number); }});
  s.push_back(count("top_k", "whatif: list length", &RunConfig::top_k));
  s.push_back(number("fd_step", "gradcheck: central-difference step", &RunConfig::fd_step));
  s.push_back(number("tolerance", "gradcheck: maximum relative error", &RunConfig::tolerance));
  return s;
}

}  // namespace

std::filesystem::path RunConfig::checkpoint_path() const {
  if (!checkpoint.empty()) return checkpoint;
  return std::filesystem::path(out_dir) / "checkpoint.fanc";
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = build_specs();
  return specs;
}

void apply_key(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& spec : key_specs())
    if (spec.name == key) {
      spec.set(config, value);
      return;
    }
  throw UsageError("unknown configuration key '" + key + "'");
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path.string() + ":" + std::to_string(number) + ": expected 'key = value'");
    try {
      apply_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

}  // namespace fanc::cli
