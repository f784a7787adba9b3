#include "fanc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fanc/decision.hpp"
#include "fanc/errors.hpp"
#include "fanc/training.hpp"
#include "parallel.hpp"

namespace fanc {
namespace {

void check_k(std::span<const std::size_t> ranked, std::size_t k) {
  FANC_REQUIRE(k >= 1 && k <= ranked.size(),
               "k = " + std::to_string(k) + " outside [1, " + std::to_string(ranked.size()) + "]");
}

/// 1-based position of target, or 0 when absent from the first k.
std::size_t rank_within(std::span<const std::size_t> ranked, std::size_t target, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i)
    if (ranked[i] == target) return i + 1;
  return 0;
}

std::vector<std::size_t> order_by_descending(const std::vector<double>& score) {
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return order;
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

double recall_at_k(std::span<const std::size_t> ranked, std::size_t target, std::size_t k) {
  check_k(ranked, k);
  return rank_within(ranked, target, k) > 0 ? 1.0 : 0.0;
}

double ndcg_at_k(std::span<const std::size_t> ranked, std::size_t target, std::size_t k) {
  check_k(ranked, k);
  const std::size_t rank = rank_within(ranked, target, k);
  return rank > 0 ? 1.0 / std::log2(1.0 + static_cast<double>(rank)) : 0.0;
}

const MetricsRow& MetricsTable::at(std::size_t k) const {
  for (const auto& r : rows)
    if (r.k == k) return r;
  throw ContractViolation("metrics table has no row for k = " + std::to_string(k));
}

MetricsAccumulator::MetricsAccumulator(std::vector<std::size_t> k_list, std::size_t n_items)
    : k_list_(std::move(k_list)) {
  FANC_REQUIRE(!k_list_.empty(), "metrics: empty k list");
  std::sort(k_list_.begin(), k_list_.end());
  k_list_.erase(std::unique(k_list_.begin(), k_list_.end()), k_list_.end());
  FANC_REQUIRE(k_list_.front() >= 1 && k_list_.back() <= n_items,
               "metrics: every k must lie in [1, " + std::to_string(n_items) + "]");
  recall_sum_.assign(k_list_.size(), 0.0);
  ndcg_sum_.assign(k_list_.size(), 0.0);
}

void MetricsAccumulator::add(std::span<const std::size_t> ranked, std::size_t target) {
  for (std::size_t i = 0; i < k_list_.size(); ++i) {
    recall_sum_[i] += recall_at_k(ranked, target, k_list_[i]);
    ndcg_sum_[i] += ndcg_at_k(ranked, target, k_list_[i]);
  }
  ++count_;
}

MetricsTable MetricsAccumulator::table() const {
  MetricsTable t;
  t.predictions = count_;
  const double n = count_ > 0 ? static_cast<double>(count_) : 1.0;
  for (std::size_t i = 0; i < k_list_.size(); ++i)
    t.rows.push_back({k_list_[i], recall_sum_[i] / n, ndcg_sum_[i] / n});
  return t;
}

MetricsTable evaluate_ranker(const Ranker& ranker, const std::vector<BehaviourSequence>& sequences,
                             const std::vector<std::size_t>& k_list, std::size_t n_items) {
  FANC_REQUIRE(!sequences.empty(), "evaluate: no sequences");
  MetricsAccumulator acc(k_list, n_items);
  for (const auto& s : sequences) {
    s.validate(n_items);
    for (std::size_t j = 0; j + 1 < s.size(); ++j) {
      const auto ranked = ranker(s, j);
      FANC_REQUIRE(ranked.size() == n_items, "evaluate: ranker must rank the full catalog");
      acc.add(ranked, s.steps[j + 1].item);
    }
  }
  return acc.table();
}

MetricsTable evaluate(const ModelParameters& model, const std::vector<BehaviourSequence>& sequences,
                      const std::vector<std::size_t>& k_list, const ForwardOptions& options,
                      std::size_t threads) {
  FANC_REQUIRE(!sequences.empty(), "evaluate: no sequences");
  std::vector<SequenceTrace> traces(sequences.size());
  detail::parallel_for(sequences.size(), threads, [&](std::size_t i) {
    traces[i] = forward_sequence(model, sequences[i], options);
  });
  MetricsAccumulator acc(k_list, model.dims.n_items);
  for (const auto& trace : traces)
    for (const auto& step : trace.steps) acc.add(step.distribution.ranked, step.target);
  return acc.table();
}

std::vector<std::size_t> popularity_baseline(const std::vector<BehaviourSequence>& train,
                                             std::size_t n_items) {
  FANC_REQUIRE(!train.empty(), "popularity_baseline: empty training set");
  std::vector<double> counts(n_items, 0.0);
  for (const auto& s : train)
    for (const auto& step : s.steps) {
      FANC_REQUIRE(step.item < n_items, "popularity_baseline: item index out of range");
      counts[step.item] += 1.0;
    }
  return order_by_descending(counts);
}

TransitionModel::TransitionModel(const std::vector<BehaviourSequence>& train, std::size_t n_items,
                                 double alpha)
    : n_(n_items), alpha_(alpha), counts_(n_items * n_items, 0.0) {
  FANC_REQUIRE(alpha >= 0.0, "fmc_baseline: smoothing must be non-negative");
  FANC_REQUIRE(n_items >= 1, "fmc_baseline: empty catalog");
  for (const auto& s : train)
    for (std::size_t j = 0; j + 1 < s.size(); ++j) {
      const auto from = s.steps[j].item, to = s.steps[j + 1].item;
      FANC_REQUIRE(from < n_ && to < n_, "fmc_baseline: item index out of range");
      counts_[from * n_ + to] += 1.0;
    }
}

std::vector<double> TransitionModel::probabilities(std::size_t last) const {
  FANC_REQUIRE(last < n_, "fmc_baseline: item index out of range");
  const double* row = counts_.data() + last * n_;
  const double denom = std::accumulate(row, row + n_, 0.0) + alpha_ * static_cast<double>(n_);
  std::vector<double> p(n_);
  if (denom == 0.0) {
    // Unseen item without smoothing: no information, treat as uniform.
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n_));
    return p;
  }
  for (std::size_t b = 0; b < n_; ++b) p[b] = (row[b] + alpha_) / denom;
  return p;
}

std::vector<std::size_t> TransitionModel::rank(std::size_t last) const {
  return order_by_descending(probabilities(last));
}

TransitionModel fmc_baseline(const std::vector<BehaviourSequence>& train, std::size_t n_items,
                             double alpha) {
  return TransitionModel(train, n_items, alpha);
}

std::vector<WhatIfRow> whatif_sweep(const ModelParameters& model, const BehaviourSequence& sequence,
                                    const std::vector<double>& delta_ts, std::size_t k,
                                    const ForwardOptions& options, double pad) {
  FANC_REQUIRE(k >= 1 && k <= model.dims.n_items, "whatif: k outside [1, N]");
  for (double dt : delta_ts)
    FANC_REQUIRE(dt > 0.0 && dt <= pad,
                 "whatif: delta_t " + format_double(dt) + " outside (0, " + format_double(pad) + "]");
  const auto trace = forward_sequence(model, sequence, options);
  const auto& last = trace.steps.back();
  const auto& w = model.weights;
  const auto field = gravity_field(w, options.gravity);
  const std::size_t d = model.dims.d_u;

  std::vector<WhatIfRow> rows;
  for (double dt : delta_ts) {
    const Array floated = float_state(field, last.shifted, dt, options.steps_per_unit);
    const auto decided =
        decision_state(w.decision, last.conscious, slice(floated, 0, d), options.ablate_conscious_only);
    rows.push_back({dt, recommend_top_k(decided.state, w.embeddings, k)});
  }
  return rows;
}

std::vector<PleasureRealityRow> pleasure_reality_report(
    const ModelParameters& model, const std::vector<BehaviourSequence>& sequences,
    const ForwardOptions& options) {
  FANC_REQUIRE(!sequences.empty(), "pleasure_reality_report: no sequences");
  std::vector<PleasureRealityRow> rows;
  for (const auto& s : sequences) {
    const auto trace = forward_sequence(model, s, options);
    double displacement = 0.0, gate = 0.0;
    std::size_t components = 0;
    for (const auto& step : trace.steps) {
      displacement += step.displacement;
      for (double g : step.decision_gate.values()) gate += g;
      components += step.decision_gate.size();
    }
    rows.push_back({s.id, displacement / static_cast<double>(trace.steps.size()),
                    gate / static_cast<double>(components)});
  }
  return rows;
}

void write_metrics_csv(std::ostream& out, const std::string& label, const MetricsTable& table,
                       bool header) {
  if (header) out << "model,k,recall,ndcg,predictions\n";
  for (const auto& r : table.rows)
    out << label << ',' << r.k << ',' << format_double(r.recall) << ',' << format_double(r.ndcg)
        << ',' << table.predictions << '\n';
}

void write_whatif_csv(std::ostream& out, const ItemCatalog& catalog,
                      const std::vector<WhatIfRow>& rows) {
  out << "delta_t,rank,item_id\n";
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.top_k.size(); ++i)
      out << format_double(r.delta_t) << ',' << i + 1 << ',' << catalog.id(r.top_k[i]) << '\n';
}

void write_whatif_text(std::ostream& out, const ItemCatalog& catalog,
                       const std::vector<WhatIfRow>& rows) {
  std::vector<std::string> labels;
  std::size_t label_width = std::string("delta_t").size();
  std::size_t item_width = 1;
  std::size_t k = 0;
  for (const auto& r : rows) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << r.delta_t;
    labels.push_back(s.str());
    label_width = std::max(label_width, labels.back().size());
    k = std::max(k, r.top_k.size());
    for (auto i : r.top_k) item_width = std::max(item_width, catalog.id(i).size());
  }
  for (std::size_t i = 1; i <= k; ++i)
    item_width = std::max(item_width, ("#" + std::to_string(i)).size());

  out << std::left << std::setw(static_cast<int>(label_width)) << "delta_t";
  for (std::size_t i = 1; i <= k; ++i)
    out << "  " << std::setw(static_cast<int>(item_width)) << ("#" + std::to_string(i));
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << std::setw(static_cast<int>(label_width)) << labels[r];
    for (auto i : rows[r].top_k) out << "  " << std::setw(static_cast<int>(item_width)) << catalog.id(i);
    out << '\n';
  }
  out << std::right;
}

void write_pleasure_reality_csv(std::ostream& out, const std::vector<PleasureRealityRow>& rows) {
  out << "sequence_id,mean_displacement,mean_decision_gate\n";
  for (const auto& r : rows)
    out << r.sequence_id << ',' << format_double(r.mean_displacement) << ','
        << format_double(r.mean_gate) << '\n';
}

}  // namespace fanc
