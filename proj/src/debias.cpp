#include "wobias/debias.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "wobias/errors.hpp"

namespace wobias {

ForgettableSet find_forgettables(const LearningTrace& trace) {
    if (trace.entries.empty()) throw DataError("find_forgettables: empty trace");
    ForgettableSet set;
    for (const auto& [id, bits] : trace.entries) {
        ForgettableStats st;
        bool ever_correct = false;
        for (std::size_t t = 0; t < bits.size(); ++t) {
            if (bits[t]) {
                ever_correct = true;
                if (!st.first_learned) st.first_learned = static_cast<int>(t);
                if (t + 1 < bits.size() && !bits[t + 1]) ++st.forgetting_events;
            }
        }
        st.forgettable = !ever_correct || st.forgetting_events >= 1;
        if (st.forgettable) set.ids.push_back(id);
        set.stats.emplace_back(id, st);
    }
    return set;
}

void write_forgettable_stats_csv(const ForgettableSet& set, std::ostream& out) {
    out << "id,first_learned,forgetting_events,forgettable\n";
    for (const auto& [id, st] : set.stats) {
        out << "\"" << id << "\",";
        if (st.first_learned) out << *st.first_learned;
        out << "," << st.forgetting_events << "," << (st.forgettable ? 1 : 0) << "\n";
    }
}

ModelParams finetune_on_subset(const ModelParams& params, const Dataset& subset,
                               const TrainConfig& config) {
    if (subset.empty()) throw DataError("finetune: subset is empty");
    return train_from(subset, config, params).params;
}

EliminationFilter EliminationFilter::from_range(Rational lo, Rational hi,
                                                CollapsedLabel label) {
    if (hi < lo) throw DataError("elimination range: lower > upper");
    EliminationFilter f;
    f.lo = lo;
    f.hi = hi;
    f.label = label;
    return f;
}

EliminationFilter EliminationFilter::from_bin(std::string_view bin_label,
                                              const BinScheme& scheme,
                                              CollapsedLabel label) {
    int i = scheme.index_of(bin_label);
    if (i < 0)
        throw DataError("elimination filter: scheme " + scheme.name + " has no bin \"" +
                        std::string(bin_label) + "\"");
    const BinId& bin = scheme.bins[i];
    EliminationFilter f;
    f.lo = bin.lo;
    f.hi = bin.hi;
    f.lo_closed = bin.lo_closed;
    f.hi_closed = bin.hi_closed;
    f.label = label;
    return f;
}

bool EliminationFilter::matches(const OverlapRatio& ratio, CollapsedLabel gold) const {
    if (gold != label) return false;
    Rational v = ratio.ratio();
    if (lo_closed ? v < lo : v <= lo) return false;
    if (hi_closed ? hi < v : hi <= v) return false;
    return true;
}

std::string EliminationFilter::describe() const {
    auto point = [](const Rational& r) {
        return std::to_string(r.num) + "/" + std::to_string(r.den);
    };
    std::string s = lo_closed ? "[" : "(";
    s += point(lo) + "," + point(hi);
    s += hi_closed ? "]" : ")";
    s += " x ";
    s += to_string(label);
    return s;
}

EliminationResult eliminate(const Dataset& subset, const EliminationFilter& filter) {
    EliminationResult result;
    result.remaining.provenance = subset.provenance;
    for (const auto& inst : subset.instances) {
        auto ratio = word_overlap(tokenize(inst.premise), tokenize(inst.hypothesis));
        if (filter.matches(ratio, collapse_label(inst.gold)))
            ++result.removed;
        else
            result.remaining.instances.push_back(inst);
    }
    return result;
}

TrainResult long_tune(const Dataset& dataset, TrainConfig base, LabelSpace space,
                      int preset_epochs) {
    base.epochs = preset_epochs;
    base.preset = "long-tune-" + std::to_string(preset_epochs);
    return train(dataset, base, space);
}

std::vector<double> poe_combine(const std::vector<double>& p_w,
                                const std::vector<double>& p_m) {
    if (p_w.size() != p_m.size())
        throw DataError("poe_combine: distributions have different dimensions (" +
                        std::to_string(p_w.size()) + " vs " + std::to_string(p_m.size()) +
                        ")");
    if (p_w.empty()) throw DataError("poe_combine: empty distributions");
    std::vector<double> z(p_w.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = std::log(std::max(p_w[i], 1e-12)) + std::log(std::max(p_m[i], 1e-12));
    double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - m);
        s += v;
    }
    for (double& v : z) v /= s;
    return z;
}

ModelParams poe_train(const Dataset& dataset, const ModelParams& weak_params,
                      const TrainConfig& config) {
    ModelParams init = init_params(dataset, config, weak_params.space);
    return train_from(dataset, config, std::move(init), &weak_params).params;
}

TrainResult train_weak(const Dataset& dataset, TrainConfig base, LabelSpace space,
                       int weak_dim) {
    base.dim = weak_dim;
    base.preset = "weak-d" + std::to_string(weak_dim);
    return train(dataset, base, space);
}

}  // namespace wobias
