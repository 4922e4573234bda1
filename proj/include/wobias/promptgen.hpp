#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "wobias/audit.hpp"
#include "wobias/corpus.hpp"

namespace wobias {

// Mask-slot token -> label mapping for prompt-based scoring.
struct Verbalizer {
    std::vector<std::pair<std::string, ThreeWayLabel>> mapping;

    // yes/maybe/no -> entailment/neutral/contradiction.
    static Verbalizer standard();
    void validate() const;  // injective tokens covering all three labels
    const std::string& token_for(ThreeWayLabel label) const;
};

// "{premise} ? [MASK], {hypothesis}" with both sentences verbatim (original
// casing and punctuation); single spaces around "?" and after ",". The one
// canonical byte form external scorers must consume.
std::string to_prompt(const RawInstance& instance);

void write_prompts(const Dataset& dataset, std::ostream& out);

struct MaskScores {
    std::string id;
    std::map<std::string, double> scores;  // verbalizer token -> raw score
};

// JSON-lines {"id":.., "scores": {"yes":f,"maybe":f,"no":f}}.
std::vector<MaskScores> read_mask_scores(std::istream& in);

// Softmax over the verbalizer-token scores in label order -> 3-way probs;
// optionally collapsed to 2-way. A record missing a verbalizer token is
// fatal and names the id and token.
PredictionFile score_mask(const std::vector<MaskScores>& records,
                          const Verbalizer& verbalizer, bool collapse);

}  // namespace wobias
