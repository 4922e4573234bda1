#include "wobias/synth.hpp"

#include <cmath>
#include <cstdio>

#include "wobias/errors.hpp"
#include "wobias/rng.hpp"

namespace wobias {

std::string synth_premise_cue(int cue_class, int variant) {
    return "pcue" + std::to_string(cue_class) + "v" + std::to_string(variant);
}

std::string synth_hypothesis_cue(int cue_class, int variant) {
    return "hcue" + std::to_string(cue_class) + "v" + std::to_string(variant);
}

namespace {

// cue class of the first token with the given side prefix, -1 if absent
int cue_class_of(const TokenSeq& tokens, char side) {
    std::string prefix{side, 'c', 'u', 'e'};
    for (const auto& t : tokens)
        if (t.rfind(prefix, 0) == 0 && t.size() > 4) return t[4] - '0';
    return -1;
}

}  // namespace

CollapsedLabel synth_content_rule(const RawInstance& instance) {
    int p = cue_class_of(tokenize(instance.premise), 'p');
    int h = cue_class_of(tokenize(instance.hypothesis), 'h');
    if (p < 0 || h < 0) throw DataError("instance " + instance.id + " carries no cue pair");
    return p == h ? CollapsedLabel::entailment : CollapsedLabel::non_entailment;
}

std::vector<std::array<std::size_t, 2>> auto_fill_cells(const BinScheme& scheme,
                                                        std::size_t total, double rho) {
    if (total % 2 != 0)
        throw DataError("auto_fill_cells: total must be even (split across two labels)");
    if (!(rho >= 0.0 && rho <= 1.0))
        throw DataError("auto_fill_cells: rho must lie in [0,1]");
    const std::size_t n_bins = scheme.bins.size();
    const std::size_t row_total = total / 2;

    // Confounded weights from bin midpoints, in scheme order.
    std::array<std::vector<double>, 2> confounded;
    confounded[0].assign(n_bins, 0.0);
    confounded[1].assign(n_bins, 0.0);
    std::array<int, 2> sides{0, 0};
    std::vector<int> side(n_bins, -1);
    const Rational half{1, 2};
    for (std::size_t i = 0; i < n_bins; ++i) {
        // midpoint (lo+hi)/2
        const Rational& lo = scheme.bins[i].lo;
        const Rational& hi = scheme.bins[i].hi;
        Rational mid{lo.num * hi.den + hi.num * lo.den, 2 * lo.den * hi.den};
        if (half < mid) side[i] = static_cast<int>(CollapsedLabel::entailment);
        else if (mid < half) side[i] = static_cast<int>(CollapsedLabel::non_entailment);
        if (side[i] >= 0) ++sides[side[i]];
    }
    for (int l = 0; l < 2; ++l) {
        if (sides[l] == 0 && rho > 0.0)
            throw DataError("auto_fill_cells: scheme " + scheme.name +
                            " has no bins on the " +
                            std::string(to_string(static_cast<CollapsedLabel>(l))) + " side");
        for (std::size_t i = 0; i < n_bins; ++i)
            if (side[i] == l) confounded[l][i] = 1.0 / sides[l];
    }

    std::vector<std::array<std::size_t, 2>> cells(n_bins, {0, 0});
    for (int l = 0; l < 2; ++l) {
        std::vector<double> w(n_bins);
        std::size_t assigned = 0;
        for (std::size_t i = 0; i < n_bins; ++i) {
            w[i] = (1.0 - rho) / static_cast<double>(n_bins) + rho * confounded[l][i];
            cells[i][l] = static_cast<std::size_t>(
                std::floor(static_cast<double>(row_total) * w[i] + 1e-9));
            assigned += cells[i][l];
        }
        std::size_t remainder = row_total - assigned;
        while (remainder > 0) {
            for (std::size_t i = 0; i < n_bins && remainder > 0; ++i) {
                if (w[i] > 0.0) {
                    cells[i][l] += 1;
                    --remainder;
                }
            }
        }
    }
    return cells;
}

namespace {

struct BuildPlan {
    int premise_len;     // filler tokens
    int hyp_len;         // total hypothesis tokens, cue included
    int shared;          // hypothesis occurrences whose type is in the premise
    bool cue_in_premise; // cue counts toward `shared` when true
};

std::vector<BuildPlan> feasible_plans(const SynthConfig& cfg, const BinId& bin) {
    std::vector<BuildPlan> plans;
    for (int L = cfg.premise_len_min; L <= cfg.premise_len_max; ++L) {
        for (int h = cfg.hyp_len_min; h <= cfg.hyp_len_max; ++h) {
            for (int s = 0; s <= h; ++s) {
                if (!bin.contains(Rational{s, h})) continue;
                // cue shared: premise carries the cue; s-1 shared fillers
                if (s >= 1 && s - 1 <= L && (h - s) <= cfg.vocab_size - L)
                    plans.push_back({L, h, s, true});
                // cue novel: all s shared tokens are premise fillers
                if (s <= L && s < h && (h - 1 - s) <= cfg.vocab_size - L)
                    plans.push_back({L, h, s, false});
            }
        }
    }
    return plans;
}

std::string filler_token(int index) {
    return "w" + std::to_string(index);
}

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace

Dataset generate(const SynthConfig& cfg) {
    if (cfg.premise_len_min < 1 || cfg.premise_len_max < cfg.premise_len_min)
        throw DataError("synth: bad premise length range");
    if (cfg.hyp_len_min < 1 || cfg.hyp_len_max < cfg.hyp_len_min)
        throw DataError("synth: bad hypothesis length range");
    if (cfg.vocab_size < cfg.premise_len_max + cfg.hyp_len_max)
        throw DataError("synth: vocab_size too small for the length ranges");
    if (cfg.cells.size() != cfg.scheme.bins.size())
        throw DataError("synth: cell table does not match the scheme's bin count");
    if (cfg.cue_variants < 1) throw DataError("synth: cue_variants must be >= 1");
    cfg.scheme.validate();

    // Every requested cell must be constructible before any work starts.
    std::vector<std::vector<BuildPlan>> plans(cfg.scheme.bins.size());
    for (std::size_t b = 0; b < cfg.scheme.bins.size(); ++b) {
        if (cfg.cells[b][0] + cfg.cells[b][1] == 0) continue;
        plans[b] = feasible_plans(cfg, cfg.scheme.bins[b]);
        if (plans[b].empty())
            throw DataError("synth: cell " + cfg.scheme.bins[b].label +
                            " is unsatisfiable under the configured length ranges");
    }

    Rng rng = Rng::derive(cfg.seed, "synth");
    Dataset out;
    out.provenance = "synth seed=" + std::to_string(cfg.seed);
    std::size_t ordinal = 0;
    std::vector<std::string> prem_tokens, hyp_tokens;

    for (std::size_t b = 0; b < cfg.scheme.bins.size(); ++b) {
        for (int l = 0; l < 2; ++l) {
            const auto label = static_cast<CollapsedLabel>(l);
            for (std::size_t n = 0; n < cfg.cells[b][l]; ++n) {
                const BuildPlan& plan = plans[b][rng.below(plans[b].size())];
                int p_class = static_cast<int>(rng.below(2));
                int h_class = label == CollapsedLabel::entailment ? p_class : 1 - p_class;
                std::string p_cue =
                    synth_premise_cue(p_class, static_cast<int>(rng.below(cfg.cue_variants)));
                std::string cue = synth_hypothesis_cue(
                    h_class, static_cast<int>(rng.below(cfg.cue_variants)));

                auto prem_fillers = rng.sample_indices(cfg.vocab_size, plan.premise_len);
                prem_tokens.clear();
                for (std::size_t idx : prem_fillers) prem_tokens.push_back(filler_token(idx));
                prem_tokens.push_back(p_cue);
                if (plan.cue_in_premise) prem_tokens.push_back(cue);
                rng.shuffle(prem_tokens);

                int shared_fillers = plan.shared - (plan.cue_in_premise ? 1 : 0);
                int novel_fillers = plan.hyp_len - plan.shared - (plan.cue_in_premise ? 0 : 1);
                hyp_tokens.clear();
                for (std::size_t pick :
                     rng.sample_indices(prem_fillers.size(), shared_fillers))
                    hyp_tokens.push_back(filler_token(prem_fillers[pick]));
                // fresh types: indices outside the premise fillers
                std::vector<int> pool;
                pool.reserve(cfg.vocab_size - prem_fillers.size());
                std::size_t next_used = 0;
                for (int idx = 0; idx < cfg.vocab_size; ++idx) {
                    if (next_used < prem_fillers.size() &&
                        static_cast<std::size_t>(idx) == prem_fillers[next_used]) {
                        ++next_used;
                        continue;
                    }
                    pool.push_back(idx);
                }
                for (std::size_t pick : rng.sample_indices(pool.size(), novel_fillers))
                    hyp_tokens.push_back(filler_token(pool[pick]));
                hyp_tokens.push_back(cue);
                rng.shuffle(hyp_tokens);

                RawInstance inst;
                char idbuf[24];
                std::snprintf(idbuf, sizeof(idbuf), "synth-%05zu", ordinal);
                inst.id = idbuf;
                inst.premise = join(prem_tokens);
                inst.hypothesis = join(hyp_tokens);
                inst.gold = label == CollapsedLabel::entailment
                                ? ThreeWayLabel::entailment
                                : (n % 2 == 0 ? ThreeWayLabel::neutral
                                              : ThreeWayLabel::contradiction);

                auto realized = word_overlap(tokenize(inst.premise), tokenize(inst.hypothesis));
                const BinId& got = assign_bin(realized, cfg.scheme);
                if (got.label != cfg.scheme.bins[b].label)
                    throw DataError("synth: constructed instance for cell " +
                                    cfg.scheme.bins[b].label + " landed in " + got.label);

                out.instances.push_back(std::move(inst));
                ++ordinal;
            }
        }
    }
    return out;
}

}  // namespace wobias
