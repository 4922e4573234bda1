#include "wobias/corpus.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "wobias/errors.hpp"

#include <json.hpp>

namespace wobias {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kPunctuation = ".,;:!?'\"()[]-";

bool is_punctuation(char32_t cp) {
    return cp < 0x80 && kPunctuation.find(static_cast<char>(cp)) != std::string_view::npos;
}

bool is_space(char32_t cp) {
    switch (cp) {
        case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
        case 0x0020: case 0x0085: case 0x00A0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes one UTF-8 code point starting at `i`; advances `i` past it.
// Invalid sequences are passed through byte-wise (parse precondition says
// valid UTF-8, so this is only a safety net).
char32_t next_codepoint(std::string_view s, std::size_t& i, std::size_t& len) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t n = 1;
    char32_t cp = c;
    if (c >= 0xF0) n = 4;
    else if (c >= 0xE0) n = 3;
    else if (c >= 0xC0) n = 2;
    if (n > 1) {
        if (i + n > s.size()) n = 1;
        else {
            cp = c & (0xFF >> (n + 1));
            for (std::size_t k = 1; k < n; ++k) {
                unsigned char cc = static_cast<unsigned char>(s[i + k]);
                if ((cc & 0xC0) != 0x80) { n = 1; cp = c; break; }
                cp = (cp << 6) | (cc & 0x3F);
            }
        }
    }
    len = n;
    i += n;
    return cp;
}

}  // namespace

CollapsedLabel collapse_label(ThreeWayLabel gold) {
    return gold == ThreeWayLabel::entailment ? CollapsedLabel::entailment
                                             : CollapsedLabel::non_entailment;
}

std::string_view to_string(ThreeWayLabel l) {
    switch (l) {
        case ThreeWayLabel::entailment: return "entailment";
        case ThreeWayLabel::neutral: return "neutral";
        case ThreeWayLabel::contradiction: return "contradiction";
    }
    return "?";
}

std::string_view to_string(CollapsedLabel l) {
    return l == CollapsedLabel::entailment ? "entailment" : "non-entailment";
}

std::optional<ThreeWayLabel> three_way_label_from(std::string_view s) {
    if (s == "entailment") return ThreeWayLabel::entailment;
    if (s == "neutral") return ThreeWayLabel::neutral;
    if (s == "contradiction") return ThreeWayLabel::contradiction;
    return std::nullopt;
}

std::optional<CollapsedLabel> collapsed_label_from(std::string_view s) {
    if (s == "entailment") return CollapsedLabel::entailment;
    if (s == "non-entailment") return CollapsedLabel::non_entailment;
    return std::nullopt;
}

int label_count(LabelSpace space) {
    return space == LabelSpace::three_way ? 3 : 2;
}

std::vector<std::string> label_names(LabelSpace space) {
    if (space == LabelSpace::three_way)
        return {"entailment", "neutral", "contradiction"};
    return {"entailment", "non-entailment"};
}

int gold_index(ThreeWayLabel gold, LabelSpace space) {
    if (space == LabelSpace::three_way) return static_cast<int>(gold);
    return static_cast<int>(collapse_label(gold));
}

TokenSeq tokenize(std::string_view text) {
    TokenSeq tokens;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = i, len = 0;
        char32_t cp = next_codepoint(text, i, len);
        if (is_space(cp)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else if (is_punctuation(cp)) {
            // stripped
        } else if (cp < 0x80) {
            char c = static_cast<char>(cp);
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            current.push_back(c);
        } else {
            current.append(text.substr(start, len));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

namespace {

struct RecordIngest {
    Dataset& dataset;
    ParseDiagnostics& diags;
    std::unordered_set<std::string> seen_ids;

    void reject(std::size_t lineno, const std::string& reason) {
        ++diags.rejected;
        diags.reasons.push_back("line " + std::to_string(lineno) + ": " + reason);
    }

    // Validates and appends. `ordinal` is the zero-based record index used
    // when no id is supplied.
    void add(std::size_t lineno, std::size_t ordinal, std::optional<std::string> id,
             std::string premise, std::string hypothesis,
             const std::string& label, std::string split) {
        auto gold = three_way_label_from(label);
        if (!gold) {
            reject(lineno, "unknown label \"" + label + "\"");
            return;
        }
        if (tokenize(premise).empty()) {
            reject(lineno, "empty premise after normalization");
            return;
        }
        if (tokenize(hypothesis).empty()) {
            reject(lineno, "empty hypothesis after normalization");
            return;
        }
        std::string rid = id ? *id : std::to_string(ordinal);
        if (!seen_ids.insert(rid).second) {
            reject(lineno, "duplicate id \"" + rid + "\"");
            return;
        }
        dataset.instances.push_back(
            {std::move(rid), std::move(premise), std::move(hypothesis), *gold, std::move(split)});
    }
};

void parse_json_lines(std::istream& in, RecordIngest& ingest) {
    std::string line;
    std::size_t lineno = 0;
    std::size_t ordinal = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ordered_json rec = ordered_json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            if (ordinal == 0 && ingest.diags.rejected == 0)
                throw DataError("line " + std::to_string(lineno) +
                                ": first record is not valid JSON");
            ingest.reject(lineno, "malformed JSON record");
            ++ordinal;
            continue;
        }
        std::optional<std::string> id;
        if (rec.contains("id")) {
            if (!rec["id"].is_string()) {
                ingest.reject(lineno, "id is not a string");
                ++ordinal;
                continue;
            }
            id = rec["id"].get<std::string>();
        }
        if (!rec.contains("premise") || !rec["premise"].is_string() ||
            !rec.contains("hypothesis") || !rec["hypothesis"].is_string() ||
            !rec.contains("label") || !rec["label"].is_string()) {
            ingest.reject(lineno, "missing premise/hypothesis/label string field");
            ++ordinal;
            continue;
        }
        std::string split;
        if (rec.contains("split") && rec["split"].is_string())
            split = rec["split"].get<std::string>();
        ingest.add(lineno, ordinal, std::move(id), rec["premise"].get<std::string>(),
                   rec["hypothesis"].get<std::string>(), rec["label"].get<std::string>(),
                   std::move(split));
        ++ordinal;
    }
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

void parse_tsv(std::istream& in, RecordIngest& ingest) {
    std::string line;
    if (!std::getline(in, line)) return;  // empty stream: empty dataset
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "id\tpremise\thypothesis\tlabel")
        throw DataError("bad TSV header; expected id\\tpremise\\thypothesis\\tlabel");
    std::size_t lineno = 1;
    std::size_t ordinal = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 4) {
            ingest.reject(lineno, "expected 4 tab-separated fields, got " +
                                      std::to_string(fields.size()));
            ++ordinal;
            continue;
        }
        std::optional<std::string> id;
        if (!fields[0].empty()) id = fields[0];
        ingest.add(lineno, ordinal, std::move(id), std::move(fields[1]),
                   std::move(fields[2]), fields[3], "");
        ++ordinal;
    }
}

}  // namespace

ParseResult parse_dataset(std::istream& in, DatasetFormat format, std::string provenance) {
    ParseResult result;
    result.dataset.provenance = std::move(provenance);
    RecordIngest ingest{result.dataset, result.diagnostics, {}};
    if (format == DatasetFormat::json_lines)
        parse_json_lines(in, ingest);
    else
        parse_tsv(in, ingest);
    return result;
}

void serialize_dataset(const Dataset& dataset, std::ostream& out) {
    for (const auto& inst : dataset.instances) {
        ordered_json rec;
        rec["id"] = inst.id;
        rec["premise"] = inst.premise;
        rec["hypothesis"] = inst.hypothesis;
        rec["label"] = std::string(to_string(inst.gold));
        if (!inst.split.empty()) rec["split"] = inst.split;
        out << rec.dump() << '\n';
    }
}

Dataset merge_splits(const std::vector<Dataset>& parts) {
    Dataset merged;
    std::unordered_set<std::string> seen;
    for (const auto& part : parts) {
        for (const auto& inst : part.instances) {
            if (!seen.insert(inst.id).second)
                throw DataError("duplicate id " + inst.id + " across merged parts");
            merged.instances.push_back(inst);
        }
        if (!merged.provenance.empty() && !part.provenance.empty())
            merged.provenance += "+";
        merged.provenance += part.provenance;
    }
    return merged;
}

Dataset subset_by_ids(const Dataset& dataset, const std::vector<std::string>& ids) {
    std::unordered_set<std::string> wanted(ids.begin(), ids.end());
    Dataset subset;
    subset.provenance = dataset.provenance + " subset";
    for (const auto& inst : dataset.instances) {
        if (wanted.count(inst.id)) {
            subset.instances.push_back(inst);
            wanted.erase(inst.id);
        }
    }
    if (!wanted.empty()) {
        std::string missing;
        for (const auto& id : wanted) {
            if (!missing.empty()) missing += ", ";
            missing += id;
            if (missing.size() > 120) { missing += ", ..."; break; }
        }
        throw DataError("ids not present in dataset: " + missing);
    }
    return subset;
}

}  // namespace wobias
