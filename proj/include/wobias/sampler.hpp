#pragma once

#include <cstdint>

#include "wobias/corpus.hpp"
#include "wobias/overlap.hpp"

namespace wobias {

// Exactly k instances per label, drawn uniformly without replacement.
// Deterministic per seed; output keeps dataset order. A label with fewer
// than k instances is fatal and named.
Dataset fewshot_sample(const Dataset& dataset, int k_per_label, LabelSpace space,
                       std::uint64_t seed);

// k per label split evenly across the scheme's overlap categories
// (k/categories per cell). k not divisible by the category count is an
// error, as is a cell with too few eligible instances.
Dataset balanced_sample(const Dataset& dataset, int k_per_label, const BinScheme& scheme,
                        LabelSpace space, std::uint64_t seed);

}  // namespace wobias
