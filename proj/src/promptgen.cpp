#include "wobias/promptgen.hpp"

#include <array>
#include <cmath>
#include <istream>
#include <ostream>

#include "wobias/errors.hpp"

#include <json.hpp>

namespace wobias {

namespace {
using ordered_json = nlohmann::ordered_json;
}

Verbalizer Verbalizer::standard() {
    Verbalizer v;
    v.mapping = {{"yes", ThreeWayLabel::entailment},
                 {"maybe", ThreeWayLabel::neutral},
                 {"no", ThreeWayLabel::contradiction}};
    return v;
}

void Verbalizer::validate() const {
    std::array<int, 3> covered{0, 0, 0};
    for (std::size_t i = 0; i < mapping.size(); ++i) {
        covered[static_cast<int>(mapping[i].second)] += 1;
        for (std::size_t j = i + 1; j < mapping.size(); ++j)
            if (mapping[i].first == mapping[j].first)
                throw DataError("verbalizer: token \"" + mapping[i].first + "\" mapped twice");
    }
    for (int c : covered)
        if (c != 1) throw DataError("verbalizer must map exactly one token per label");
}

const std::string& Verbalizer::token_for(ThreeWayLabel label) const {
    for (const auto& [tok, l] : mapping)
        if (l == label) return tok;
    throw DataError("verbalizer does not cover label " + std::string(to_string(label)));
}

std::string to_prompt(const RawInstance& instance) {
    return instance.premise + " ? [MASK], " + instance.hypothesis;
}

void write_prompts(const Dataset& dataset, std::ostream& out) {
    for (const auto& inst : dataset.instances) {
        ordered_json j;
        j["id"] = inst.id;
        j["prompt"] = to_prompt(inst);
        out << j.dump() << '\n';
    }
}

std::vector<MaskScores> read_mask_scores(std::istream& in) {
    std::vector<MaskScores> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ordered_json rec = ordered_json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.contains("id") || !rec["id"].is_string() ||
            !rec.contains("scores") || !rec["scores"].is_object())
            throw DataError("scores line " + std::to_string(lineno) +
                            ": expected {\"id\":.., \"scores\":{..}}");
        MaskScores ms;
        ms.id = rec["id"].get<std::string>();
        for (const auto& [tok, val] : rec["scores"].items()) {
            if (!val.is_number())
                throw DataError("scores line " + std::to_string(lineno) + ": score for \"" +
                                tok + "\" is not a number");
            ms.scores[tok] = val.get<double>();
        }
        records.push_back(std::move(ms));
    }
    return records;
}

PredictionFile score_mask(const std::vector<MaskScores>& records,
                          const Verbalizer& verbalizer, bool collapse) {
    verbalizer.validate();
    PredictionFile preds;
    preds.space = collapse ? LabelSpace::collapsed : LabelSpace::three_way;
    for (const auto& rec : records) {
        std::array<double, 3> z;
        for (int l = 0; l < 3; ++l) {
            const std::string& tok = verbalizer.token_for(static_cast<ThreeWayLabel>(l));
            auto it = rec.scores.find(tok);
            if (it == rec.scores.end())
                throw DataError("record " + rec.id + " is missing a score for verbalizer token \"" +
                                tok + "\"");
            z[l] = it->second;
        }
        double m = std::max({z[0], z[1], z[2]});
        double s = 0.0;
        for (double& v : z) {
            v = std::exp(v - m);
            s += v;
        }
        for (double& v : z) v /= s;
        PredictionRecord p;
        p.id = rec.id;
        if (collapse)
            p.probs = {z[0], z[1] + z[2]};
        else
            p.probs = {z[0], z[1], z[2]};
        preds.records.push_back(std::move(p));
    }
    return preds;
}

}  // namespace wobias
