#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fanc/cell.hpp"
#include "fanc/data.hpp"
#include "fanc/decision.hpp"
#include "fanc/model.hpp"
#include "fanc/tape.hpp"

namespace fanc {

struct TrainConfig {
  ModelDims dims;  // n_items filled from the data
  double learning_rate = 1e-4;
  std::size_t batch_size = 4;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::size_t warmup_epochs = 5;
  double warmup_start_fraction = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t max_len = 5;  // L
  double steps_per_unit = 10.0;
  double pad = 1.5;
  double epsilon = 0.5;
  double a_max = 100.0;
  bool clamp = true;
  bool ablate_conscious_only = false;
  std::uint64_t seed = 1;
  std::vector<std::size_t> k_list{1, 5, 10, 20};
  std::size_t threads = 1;

  /// Number of RK4 steps on the shared pad grid.
  std::size_t steps_for_pad() const;
  ForwardOptions forward_options() const;
  void validate() const;
};

struct StepTrace {
  std::size_t consumed = 0;
  std::size_t target = 0;
  double interval = 0.0;
  Array conscious;
  Array shifted;
  Array floated;
  Array decision;
  Array decision_gate;
  Array shift_gate;
  RecommendationDistribution distribution;
  double displacement = 0.0;  // |u after float - u after shift|
};

struct SequenceTrace {
  std::vector<StepTrace> steps;
  std::vector<RecommendationDistribution> distributions() const;
  std::vector<std::size_t> targets() const;
};

/// One-step-ahead pass: consume s_j, float to t_{j+1}, predict s_{j+1}.
SequenceTrace forward_sequence(const ModelParameters& model, const BehaviourSequence& sequence,
                               const ForwardOptions& options);

/// -sum_j log p_j[target_j]
double sequence_loss(const std::vector<RecommendationDistribution>& distributions,
                     const std::vector<std::size_t>& targets);

/// Per-step float schedules for a sequence.
std::vector<FloatPlan> per_interval_plans(const BehaviourSequence& sequence, double steps_per_unit);

/// The same loss recorded on a tape, floating each interval with `plans`.
Var taped_sequence_loss(Tape& tape, const Weights<Var>& weights, const BehaviourSequence& sequence,
                        const ForwardOptions& options, std::span<const FloatPlan> plans);

/// Loss and exact gradient of the per-interval forward pass summed over sequences.
struct LossAndGradient {
  double loss = 0.0;
  Weights<Array> gradient;
};
LossAndGradient loss_and_gradient(const ModelParameters& model,
                                  const std::vector<BehaviourSequence>& sequences,
                                  const ForwardOptions& options);

double total_loss(const ModelParameters& model, const std::vector<BehaviourSequence>& sequences,
                  const ForwardOptions& options);
/// Loss per prediction step.
double mean_loss(const ModelParameters& model, const std::vector<BehaviourSequence>& sequences,
                 const ForwardOptions& options);

/// Linear ramp from lr * warmup_start_fraction at epoch 0 to lr at warmup_epochs.
double warmup_lr(std::size_t epoch, const TrainConfig& config);

struct AdamState {
  Weights<Array> first;
  Weights<Array> second;
  std::uint64_t step = 0;
  static AdamState zeros_for(const ModelParameters& model);
};

void adam_step(ModelParameters& model, const Weights<Array>& gradient, AdamState& state,
               double lr, const TrainConfig& config);

/// Stops once the monitored loss has not improved for `patience` consecutive epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}
  /// Returns true when training should stop after this epoch.
  bool update(double loss);
  bool improved() const noexcept { return improved_; }
  double best() const noexcept { return best_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  bool improved_ = false;
  double best_ = 0.0;
  bool any_ = false;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double learning_rate = 0.0;
  double train_loss = 0.0;  // mean per prediction step
  double valid_loss = 0.0;
};

struct TrainResult {
  ModelParameters model;  // parameters of the best validation epoch
  AdamState moments;      // optimizer state after the last epoch run
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

/// Clamp to pad, then snap intervals onto the shared float grid.
BehaviourSequence prepare_sequence(const BehaviourSequence& sequence, const TrainConfig& config);
std::vector<BehaviourSequence> prepare_sequences(const std::vector<BehaviourSequence>& sequences,
                                                 const TrainConfig& config);

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const ModelParameters& initial, const DatasetSplit& split,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace fanc
