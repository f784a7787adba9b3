#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "fanc/cell.hpp"
#include "fanc/data.hpp"
#include "fanc/model.hpp"

namespace fanc {

struct SyntheticDataset {
  ItemCatalog catalog;
  std::vector<BehaviourSequence> sequences;  // each of length L + 1
  ModelParameters planted;                   // ground truth that generated them
  ForwardOptions options;                    // how the planted model was run
};

/// Draws sequences from a planted model: the unconscious state floats
/// between consumptions and each next item is sampled from the planted
/// distance softmax. Intervals are uniform in (0, 1.5].
SyntheticDataset generate_synthetic(std::size_t n_items, std::size_t n_sequences, std::size_t L,
                                    std::uint64_t seed);

std::size_t sample_categorical(const Array& probs, std::mt19937_64& rng);

}  // namespace fanc
