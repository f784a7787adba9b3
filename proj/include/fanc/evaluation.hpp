#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fanc/cell.hpp"
#include "fanc/data.hpp"
#include "fanc/model.hpp"

namespace fanc {

/// 1 if target is among the first k entries of ranked.
double recall_at_k(std::span<const std::size_t> ranked, std::size_t target, std::size_t k);
/// Binary relevance: 1/log2(1 + rank) when rank <= k, else 0.
double ndcg_at_k(std::span<const std::size_t> ranked, std::size_t target, std::size_t k);

struct MetricsRow {
  std::size_t k = 0;
  double recall = 0.0;
  double ndcg = 0.0;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;  // one per k, ascending
  std::size_t predictions = 0;

  const MetricsRow& at(std::size_t k) const;
};

/// Pools prediction steps in insertion order.
class MetricsAccumulator {
 public:
  MetricsAccumulator(std::vector<std::size_t> k_list, std::size_t n_items);
  void add(std::span<const std::size_t> ranked, std::size_t target);
  MetricsTable table() const;

 private:
  std::vector<std::size_t> k_list_;
  std::vector<double> recall_sum_, ndcg_sum_;
  std::size_t count_ = 0;
};

/// Ranking of all items for predicting sequence.steps[step + 1] from the
/// history up to and including step.
using Ranker = std::function<std::vector<std::size_t>(const BehaviourSequence&, std::size_t step)>;

MetricsTable evaluate_ranker(const Ranker& ranker, const std::vector<BehaviourSequence>& sequences,
                             const std::vector<std::size_t>& k_list, std::size_t n_items);

/// Full-catalog ranking of every prediction step of every sequence.
MetricsTable evaluate(const ModelParameters& model, const std::vector<BehaviourSequence>& sequences,
                      const std::vector<std::size_t>& k_list, const ForwardOptions& options,
                      std::size_t threads = 1);

/// Items by descending interaction count over train, ties by ascending index.
std::vector<std::size_t> popularity_baseline(const std::vector<BehaviourSequence>& train,
                                             std::size_t n_items);

/// First-order Markov chain over consecutive train pairs with additive smoothing.
class TransitionModel {
 public:
  TransitionModel(const std::vector<BehaviourSequence>& train, std::size_t n_items, double alpha);
  /// P(next | last)
  std::vector<double> probabilities(std::size_t last) const;
  /// Descending probability, ties by ascending index.
  std::vector<std::size_t> rank(std::size_t last) const;
  double count(std::size_t from, std::size_t to) const { return counts_[from * n_ + to]; }

 private:
  std::size_t n_;
  double alpha_;
  std::vector<double> counts_;
};

inline constexpr double kDefaultFmcSmoothing = 0.01;

TransitionModel fmc_baseline(const std::vector<BehaviourSequence>& train, std::size_t n_items,
                             double alpha = kDefaultFmcSmoothing);

struct WhatIfRow {
  double delta_t = 0.0;
  std::vector<std::size_t> top_k;
};

/// Runs the sequence up to its last consumed item (steps[n-2]), then floats
/// the final shifted state for each delta_t and ranks. The conscious state is
/// shared by all rows.
std::vector<WhatIfRow> whatif_sweep(const ModelParameters& model, const BehaviourSequence& sequence,
                                    const std::vector<double>& delta_ts, std::size_t k,
                                    const ForwardOptions& options, double pad);

struct PleasureRealityRow {
  std::string sequence_id;
  double mean_displacement = 0.0;  // |u after float - u after shift|, per step
  double mean_gate = 0.0;          // decision gate over components and steps
};

std::vector<PleasureRealityRow> pleasure_reality_report(
    const ModelParameters& model, const std::vector<BehaviourSequence>& sequences,
    const ForwardOptions& options);

void write_metrics_csv(std::ostream& out, const std::string& label, const MetricsTable& table,
                       bool header = true);
void write_whatif_csv(std::ostream& out, const ItemCatalog& catalog,
                      const std::vector<WhatIfRow>& rows);
void write_whatif_text(std::ostream& out, const ItemCatalog& catalog,
                       const std::vector<WhatIfRow>& rows);
void write_pleasure_reality_csv(std::ostream& out, const std::vector<PleasureRealityRow>& rows);

}  // namespace fanc
