#include "fanc/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "fanc/errors.hpp"
#include "parallel.hpp"

namespace fanc {

std::size_t TrainConfig::steps_for_pad() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(pad * steps_per_unit)));
}

ForwardOptions TrainConfig::forward_options() const {
  return ForwardOptions{GravityOptions{epsilon, a_max, clamp}, steps_per_unit, ablate_conscious_only};
}

void TrainConfig::validate() const {
  FANC_REQUIRE(learning_rate > 0.0, "learning_rate must be positive");
  FANC_REQUIRE(batch_size >= 1, "batch_size must be positive");
  FANC_REQUIRE(max_epochs >= 1, "max_epochs must be positive");
  FANC_REQUIRE(patience >= 1, "patience must be positive");
  FANC_REQUIRE(warmup_start_fraction > 0.0 && warmup_start_fraction <= 1.0,
               "warmup_start_fraction must be in (0, 1]");
  FANC_REQUIRE(max_len >= 1, "max_len must be positive");
  FANC_REQUIRE(steps_per_unit > 0.0, "steps_per_unit must be positive");
  FANC_REQUIRE(pad > 0.0, "pad must be positive");
  FANC_REQUIRE(epsilon >= 0.0, "epsilon must be nonnegative");
  FANC_REQUIRE(a_max > 0.0, "a_max must be positive");
  FANC_REQUIRE(dims.d_u >= 1 && dims.d_c >= 1, "d_u and d_c must be positive");
  FANC_REQUIRE(threads >= 1, "threads must be positive");
  for (auto k : k_list) FANC_REQUIRE(k >= 1, "k_list entries must be positive");
}

std::vector<RecommendationDistribution> SequenceTrace::distributions() const {
  std::vector<RecommendationDistribution> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.distribution);
  return out;
}

std::vector<std::size_t> SequenceTrace::targets() const {
  std::vector<std::size_t> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.target);
  return out;
}

SequenceTrace forward_sequence(const ModelParameters& model, const BehaviourSequence& sequence,
                               const ForwardOptions& options) {
  sequence.validate(model.dims.n_items);
  const auto& w = model.weights;
  const std::size_t d = model.dims.d_u;
  const auto field = gravity_field(w, options.gravity);
  Array c = Array::zeros(model.dims.d_c);
  Array h = Array::zeros(2 * d);

  SequenceTrace trace;
  trace.steps.reserve(sequence.size() - 1);
  for (std::size_t j = 0; j + 1 < sequence.size(); ++j) {
    const double dt = sequence.interval(j);
    auto s = cell_step(w, field, c, h, sequence.steps[j].item,
                       per_interval_plan(dt, options.steps_per_unit), options.ablate_conscious_only);
    StepTrace t;
    t.consumed = sequence.steps[j].item;
    t.target = sequence.steps[j + 1].item;
    t.interval = dt;
    t.distribution = score_items(s.decision, w.embeddings);
    t.displacement = std::sqrt(squared_norm(slice(s.floated, 0, d) - slice(s.shifted, 0, d)));
    c = s.conscious;
    h = s.floated;
    t.conscious = std::move(s.conscious);
    t.shifted = std::move(s.shifted);
    t.floated = std::move(s.floated);
    t.decision = std::move(s.decision);
    t.decision_gate = std::move(s.decision_gate);
    t.shift_gate = std::move(s.shift_gate);
    trace.steps.push_back(std::move(t));
  }
  return trace;
}

double sequence_loss(const std::vector<RecommendationDistribution>& distributions,
                     const std::vector<std::size_t>& targets) {
  FANC_REQUIRE(distributions.size() == targets.size(),
               "sequence_loss: " + std::to_string(distributions.size()) + " distributions vs " +
                   std::to_string(targets.size()) + " targets");
  double loss = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j) loss += distributions[j].neg_log_prob(targets[j]);
  return loss;
}

std::vector<FloatPlan> per_interval_plans(const BehaviourSequence& sequence, double steps_per_unit) {
  std::vector<FloatPlan> plans;
  for (std::size_t j = 0; j + 1 < sequence.size(); ++j)
    plans.push_back(per_interval_plan(sequence.interval(j), steps_per_unit));
  return plans;
}

Var taped_sequence_loss(Tape& tape, const Weights<Var>& weights, const BehaviourSequence& sequence,
                        const ForwardOptions& options, std::span<const FloatPlan> plans) {
  const std::size_t n_items = weights.embeddings.value().rows();
  const std::size_t d_u = weights.embeddings.value().cols();
  const std::size_t d_c = weights.conscious.update_recurrent.value().rows();
  sequence.validate(n_items);
  FANC_REQUIRE(plans.size() + 1 == sequence.size(), "taped_sequence_loss: one plan per interval");

  const auto field = gravity_field(weights, options.gravity);
  Var c = tape.constant(Array::zeros(d_c));
  Var h = tape.constant(Array::zeros(2 * d_u));
  Var loss;
  for (std::size_t j = 0; j + 1 < sequence.size(); ++j) {
    auto s = cell_step(weights, field, c, h, sequence.steps[j].item, plans[j],
                       options.ablate_conscious_only);
    Var step_loss = distance_nll(s.decision, weights.embeddings, sequence.steps[j + 1].item);
    loss = j == 0 ? step_loss : loss + step_loss;
    c = s.conscious;
    h = s.floated;
  }
  return loss;
}

LossAndGradient loss_and_gradient(const ModelParameters& model,
                                  const std::vector<BehaviourSequence>& sequences,
                                  const ForwardOptions& options) {
  LossAndGradient out{0.0, zeros_like(model.weights)};
  for (const auto& s : sequences) {
    Tape tape;
    const auto bound = bind_parameters(tape, model.weights);
    const auto plans = per_interval_plans(s, options.steps_per_unit);
    const Var loss = taped_sequence_loss(tape, bound, s, options, plans);
    out.loss += loss.value().item();
    accumulate(out.gradient, collect_gradients(tape.reverse_gradients(loss), bound));
  }
  return out;
}

double total_loss(const ModelParameters& model, const std::vector<BehaviourSequence>& sequences,
                  const ForwardOptions& options) {
  double loss = 0.0;
  for (const auto& s : sequences) {
    const auto trace = forward_sequence(model, s, options);
    loss += sequence_loss(trace.distributions(), trace.targets());
  }
  return loss;
}

double mean_loss(const ModelParameters& model, const std::vector<BehaviourSequence>& sequences,
                 const ForwardOptions& options) {
  std::size_t steps = 0;
  for (const auto& s : sequences) steps += s.size() - 1;
  FANC_REQUIRE(steps > 0, "mean_loss: no prediction steps");
  return total_loss(model, sequences, options) / static_cast<double>(steps);
}

double warmup_lr(std::size_t epoch, const TrainConfig& config) {
  if (epoch >= config.warmup_epochs) return config.learning_rate;
  const double progress = static_cast<double>(epoch) / static_cast<double>(config.warmup_epochs);
  const double start = config.warmup_start_fraction;
  return config.learning_rate * (start + (1.0 - start) * progress);
}

AdamState AdamState::zeros_for(const ModelParameters& model) {
  return AdamState{zeros_like(model.weights), zeros_like(model.weights), 0};
}

void adam_step(ModelParameters& model, const Weights<Array>& gradient, AdamState& state,
               double lr, const TrainConfig& config) {
  std::array<const Array*, 14> grads{};
  std::size_t k = 0;
  gradient.visit([&](std::string_view name, const Array& g) {
    if (!g.all_finite()) throw NumericError("non-finite gradient for " + std::string(name));
    grads[k++] = &g;
  });

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);

  std::array<Array*, 14> first{}, second{};
  k = 0;
  state.first.visit([&](std::string_view, Array& a) { first[k++] = &a; });
  k = 0;
  state.second.visit([&](std::string_view, Array& a) { second[k++] = &a; });
  k = 0;
  model.weights.visit([&](std::string_view name, Array& p) {
    const Array& g = *grads[k];
    Array& m = *first[k];
    Array& v = *second[k];
    FANC_REQUIRE(g.shape() == p.shape() && m.shape() == p.shape() && v.shape() == p.shape(),
                 "adam_step: shape mismatch for " + std::string(name));
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.adam_epsilon);
    }
    ++k;
  });
}

bool EarlyStopping::update(double loss) {
  if (!any_ || loss < best_) {
    any_ = true;
    best_ = loss;
    stale_ = 0;
    improved_ = true;
  } else {
    ++stale_;
    improved_ = false;
  }
  return stale_ >= patience_;
}

BehaviourSequence prepare_sequence(const BehaviourSequence& sequence, const TrainConfig& config) {
  return quantize_intervals(clamp_intervals(sequence, config.pad),
                            config.pad / static_cast<double>(config.steps_for_pad()));
}

std::vector<BehaviourSequence> prepare_sequences(const std::vector<BehaviourSequence>& sequences,
                                                 const TrainConfig& config) {
  std::vector<BehaviourSequence> out;
  out.reserve(sequences.size());
  for (const auto& s : sequences) out.push_back(prepare_sequence(s, config));
  return out;
}

namespace {

struct MemberResult {
  double loss = 0.0;
  std::size_t predictions = 0;
  Weights<Array> gradient;
};

MemberResult batch_member(const ModelParameters& model, const BehaviourSequence& sequence,
                          const TrainConfig& config, const ForwardOptions& options) {
  std::vector<FloatPlan> plans;
  const std::size_t grid = config.steps_for_pad();
  for (std::size_t j = 0; j + 1 < sequence.size(); ++j)
    plans.push_back(grid_plan(sequence.interval(j), config.pad, grid));
  Tape tape;
  const auto bound = bind_parameters(tape, model.weights);
  const Var loss = taped_sequence_loss(tape, bound, sequence, options, plans);
  return {loss.value().item(), sequence.size() - 1,
          collect_gradients(tape.reverse_gradients(loss), bound)};
}

}  // namespace

TrainResult train(const ModelParameters& initial, const DatasetSplit& split,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (split.train.empty()) throw DataError("train: empty training set");
  if (split.valid.empty()) throw DataError("train: empty validation set");
  initial.validate();

  const auto train_set = prepare_sequences(split.train, config);
  const auto valid_set = prepare_sequences(split.valid, config);
  for (const auto& s : train_set) s.validate(initial.dims.n_items);
  for (const auto& s : valid_set) s.validate(initial.dims.n_items);
  const auto options = config.forward_options();

  TrainResult result{initial, AdamState::zeros_for(initial), {}, 0};
  ModelParameters model = initial;
  EarlyStopping stopper(config.patience);
  double best_loss = std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double lr = warmup_lr(epoch, config);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_predictions = 0;

    for (std::size_t start = 0, batch = 0; start < order.size(); start += config.batch_size, ++batch) {
      const std::size_t size = std::min(config.batch_size, order.size() - start);
      std::vector<MemberResult> members(size);
      detail::parallel_for(size, config.threads, [&](std::size_t i) {
        members[i] = batch_member(model, train_set[order[start + i]], config, options);
      });
      double batch_loss = 0.0;
      Weights<Array> gradient = zeros_like(model.weights);
      for (const auto& m : members) {
        batch_loss += m.loss;
        epoch_predictions += m.predictions;
        accumulate(gradient, m.gradient);
      }
      if (!std::isfinite(batch_loss))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                           std::to_string(batch));
      adam_step(model, gradient, result.moments, lr, config);
      epoch_loss += batch_loss;
    }

    const double valid_loss = mean_loss(model, valid_set, options);
    if (!std::isfinite(valid_loss))
      throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch + 1));
    const EpochRecord record{epoch + 1, lr, epoch_loss / static_cast<double>(epoch_predictions),
                             valid_loss};
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);

    if (valid_loss < best_loss) {
      best_loss = valid_loss;
      result.model = model;
      result.best_epoch = epoch + 1;
    }
    if (stopper.update(valid_loss)) break;
  }
  return result;
}

}  // namespace fanc
