#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wobias/corpus.hpp"
#include "wobias/model.hpp"
#include "wobias/overlap.hpp"

namespace wobias {

struct ForgettableStats {
    std::optional<int> first_learned;  // checkpoint index, nullopt = never
    int forgetting_events = 0;         // correct at t, incorrect at t+1
    bool forgettable = false;
};

struct ForgettableSet {
    std::vector<std::string> ids;  // members, in trace order
    std::vector<std::pair<std::string, ForgettableStats>> stats;  // all trace ids
};

// An example is forgettable when it was never classified correctly at any
// checkpoint, or was correct at some checkpoint and incorrect at a later
// adjacent one (>= 1 forgetting event).
ForgettableSet find_forgettables(const LearningTrace& trace);

void write_forgettable_stats_csv(const ForgettableSet& set, std::ostream& out);

// Continues training from the given params on the subset only; the
// vocabulary stays fixed (subset tokens unseen at init are OOV). Zero epochs
// return the params unchanged.
ModelParams finetune_on_subset(const ModelParams& params, const Dataset& subset,
                               const TrainConfig& config);

// Overlap-range x collapsed-label predicate used to carve subsets out of a
// forgettable set. Ranges written with both printed endpoints are closed on
// both ("[0.8, 1.0]" includes exact full overlap).
struct EliminationFilter {
    Rational lo{0, 1}, hi{1, 1};
    bool lo_closed = true, hi_closed = true;
    CollapsedLabel label = CollapsedLabel::non_entailment;

    static EliminationFilter from_range(Rational lo, Rational hi, CollapsedLabel label);
    // Resolves a named bin of the scheme to its exact interval.
    static EliminationFilter from_bin(std::string_view bin_label, const BinScheme& scheme,
                                      CollapsedLabel label);
    bool matches(const OverlapRatio& ratio, CollapsedLabel gold) const;
    std::string describe() const;
};

struct EliminationResult {
    Dataset remaining;
    std::size_t removed = 0;
};

// Removes instances matching both the overlap predicate and the label
// predicate; everything else passes through in order.
EliminationResult eliminate(const Dataset& subset, const EliminationFilter& filter);

// Training preset with many epochs (default 20).
TrainResult long_tune(const Dataset& dataset, TrainConfig base, LabelSpace space,
                      int preset_epochs = 20);

// y = softmax(log p_w + log p_m); entries clamped at 1e-12 before the log.
// Equals the renormalized elementwise product.
std::vector<double> poe_combine(const std::vector<double>& p_w,
                                const std::vector<double>& p_m);

// Trains the main model with cross-entropy on the combined distribution; the
// weak learner stays frozen and the returned params are the main model only.
ModelParams poe_train(const Dataset& dataset, const ModelParams& weak_params,
                      const TrainConfig& config);

// Reduced-capacity preset of the plain trainer (the shortcut absorber).
TrainResult train_weak(const Dataset& dataset, TrainConfig base, LabelSpace space,
                       int weak_dim = 8);

}  // namespace wobias
