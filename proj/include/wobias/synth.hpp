#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wobias/corpus.hpp"
#include "wobias/overlap.hpp"

namespace wobias {

// Designated content tokens: every premise carries one cue from a two-class
// premise family, every hypothesis one cue from a two-class hypothesis
// family, and the gold label is entailment exactly when the two classes
// agree. Reading both cues classifies every instance perfectly, while either
// side alone is label-independent, so no bag-of-sentence shortcut over the
// cues exists and the overlap feature stays the only cheap signal.
std::string synth_premise_cue(int cue_class, int variant);
std::string synth_hypothesis_cue(int cue_class, int variant);

// The Bayes-optimal content-token rule: agreement of the two cue classes.
CollapsedLabel synth_content_rule(const RawInstance& instance);

struct SynthConfig {
    int vocab_size = 500;
    int premise_len_min = 8;  // filler tokens per premise
    int premise_len_max = 12;
    int hyp_len_min = 8;  // total hypothesis tokens, cue included
    int hyp_len_max = 12;
    int cue_variants = 3;  // tokens per (side, class) cue family
    BinScheme scheme;
    // Target instance counts per (scheme bin, collapsed label).
    std::vector<std::array<std::size_t, 2>> cells;
    std::uint64_t seed = 0;
};

// Cell table interpolating between the uniform table (rho=0) and the fully
// confounded one (rho=1: entailment mass uniform over bins with midpoint
// above 1/2, non-entailment below; a midpoint exactly at 1/2 gets none).
// Per label: count_i = floor(row_total * w_i) with w_i = (1-rho)/B + rho*c_i,
// remainder going one each to the earliest bins with positive weight.
// `total` must be even (split equally between the labels).
std::vector<std::array<std::size_t, 2>> auto_fill_cells(const BinScheme& scheme,
                                                        std::size_t total, double rho);

// Builds each hypothesis from n_shared distinct premise tokens plus fresh
// tokens so its overlap lands in the target bin by construction (re-verified
// through word_overlap/assign_bin before emission). Gold three-way labels
// alternate neutral/contradiction inside non-entailment cells. Byte-identical
// output for a fixed seed. Unsatisfiable cells are fatal and named.
Dataset generate(const SynthConfig& config);

}  // namespace wobias
