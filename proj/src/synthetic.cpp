#include "fanc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fanc/decision.hpp"
#include "fanc/errors.hpp"

namespace fanc {
namespace {

// Planted generator. Items sit on the orbit of a finite-order rotation in
// four dimensions, and the conscious path maps each consumed item roughly onto
// its rotated image, so every item is reachable and the next item is sharp but
// still depends on history and on the floating unconscious state.
constexpr std::size_t kPlantedDim = 4;
constexpr double kOrbitRadius = 6.0;
constexpr double kInputScale = 0.2;      // small enough that tanh stays near linear
constexpr double kProjectionGain = 4.0;
constexpr double kLogMassSpread = 0.5;
constexpr double kSecondPlaneTurns = 3.0;
constexpr double kMaxInterval = 1.5;

Array block_rotation(double first, double second) {
  Array r = Array::zeros(kPlantedDim, kPlantedDim);
  const double angle[2] = {first, second};
  for (std::size_t b = 0; b < 2; ++b) {
    const std::size_t o = 2 * b;
    r(o, o) = std::cos(angle[b]);
    r(o, o + 1) = -std::sin(angle[b]);
    r(o + 1, o) = std::sin(angle[b]);
    r(o + 1, o + 1) = std::cos(angle[b]);
  }
  return r;
}

ModelParameters planted_model(std::size_t n_items, std::mt19937_64& rng) {
  const ModelDims dims{n_items, kPlantedDim, kPlantedDim};
  auto model = ModelParameters::zeros(dims);
  auto& w = model.weights;

  const double n = static_cast<double>(n_items);
  const double first = 2.0 * std::numbers::pi / n;
  const double second = 2.0 * std::numbers::pi * kSecondPlaneTurns / n;
  std::vector<std::size_t> label(n_items);
  std::iota(label.begin(), label.end(), std::size_t{0});
  std::shuffle(label.begin(), label.end(), rng);
  const double r = kOrbitRadius / std::numbers::sqrt2;
  for (std::size_t k = 0; k < n_items; ++k) {
    const double kk = static_cast<double>(k);
    w.embeddings(label[k], 0) = r * std::cos(kk * first);
    w.embeddings(label[k], 1) = r * std::sin(kk * first);
    w.embeddings(label[k], 2) = r * std::cos(kk * second);
    w.embeddings(label[k], 3) = r * std::sin(kk * second);
  }
  std::uniform_real_distribution<double> mass(-kLogMassSpread, kLogMassSpread);
  for (double& v : w.log_mass.values()) v += mass(rng);

  const Array rotation = block_rotation(first, second);
  for (std::size_t i = 0; i < kPlantedDim; ++i) {
    w.conscious.candidate_input(i, i) = kInputScale;
    for (std::size_t j = 0; j < kPlantedDim; ++j)
      w.decision.projection(i, j) = kProjectionGain * rotation(i, j) / kInputScale;
  }
  return model;
}

}  // namespace

std::size_t sample_categorical(const Array& probs, std::mt19937_64& rng) {
  FANC_REQUIRE(probs.size() > 0, "sample_categorical: empty distribution");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double total = 0.0;
  for (double p : probs.values()) total += p;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i] / total;
    if (u < cumulative) return i;
  }
  // Rounding left a sliver above the last cumulative sum.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

SyntheticDataset generate_synthetic(std::size_t n_items, std::size_t n_sequences, std::size_t L,
                                    std::uint64_t seed) {
  FANC_REQUIRE(n_items >= 2, "generate_synthetic: need at least 2 items");
  FANC_REQUIRE(L >= 1, "generate_synthetic: L must be at least 1");
  std::mt19937_64 rng(seed);

  SyntheticDataset out;
  out.catalog = ItemCatalog::numbered(n_items);
  out.planted = planted_model(n_items, rng);
  const ModelDims dims = out.planted.dims;
  out.options = ForwardOptions{};

  const auto& w = out.planted.weights;
  const auto field = gravity_field(w, out.options.gravity);
  std::uniform_int_distribution<std::size_t> first_item(0, n_items - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  out.sequences.reserve(n_sequences);
  for (std::size_t s = 0; s < n_sequences; ++s) {
    BehaviourSequence seq;
    seq.id = std::to_string(s);
    seq.steps.push_back({first_item(rng), 0.0});
    Array c = Array::zeros(dims.d_c);
    Array h = Array::zeros(2 * dims.d_u);
    for (std::size_t j = 0; j < L; ++j) {
      const double dt = kMaxInterval * (1.0 - unit(rng));  // (0, 1.5]
      auto step = cell_step(w, field, c, h, seq.steps.back().item,
                            per_interval_plan(dt, out.options.steps_per_unit),
                            out.options.ablate_conscious_only);
      const auto dist = score_items(step.decision, w.embeddings);
      seq.steps.push_back({sample_categorical(dist.probs, rng), seq.steps.back().time + dt});
      c = std::move(step.conscious);
      h = std::move(step.floated);
    }
    out.sequences.push_back(std::move(seq));
  }
  return out;
}

}  // namespace fanc
