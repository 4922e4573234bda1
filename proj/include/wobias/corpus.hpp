#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wobias {

enum class ThreeWayLabel { entailment, neutral, contradiction };

// Neutral and contradiction merge into non-entailment.
enum class CollapsedLabel { entailment, non_entailment };

CollapsedLabel collapse_label(ThreeWayLabel gold);

std::string_view to_string(ThreeWayLabel l);
std::string_view to_string(CollapsedLabel l);
std::optional<ThreeWayLabel> three_way_label_from(std::string_view s);
std::optional<CollapsedLabel> collapsed_label_from(std::string_view s);

// Which label set a model / prediction file speaks.
enum class LabelSpace { three_way, collapsed };

int label_count(LabelSpace space);
std::vector<std::string> label_names(LabelSpace space);
int gold_index(ThreeWayLabel gold, LabelSpace space);

using TokenSeq = std::vector<std::string>;

// Lowercase, strip the ASCII punctuation set .,;:!?'"()[]- and split on
// Unicode whitespace. Deterministic; empty text yields an empty sequence.
TokenSeq tokenize(std::string_view text);

struct RawInstance {
    std::string id;
    std::string premise;
    std::string hypothesis;
    ThreeWayLabel gold = ThreeWayLabel::entailment;
    std::string split;  // empty when absent
};

struct Dataset {
    std::vector<RawInstance> instances;
    std::string provenance;

    std::size_t size() const { return instances.size(); }
    bool empty() const { return instances.empty(); }
};

enum class DatasetFormat { json_lines, tsv };

struct ParseDiagnostics {
    std::size_t rejected = 0;
    std::vector<std::string> reasons;  // one entry per rejected record
};

struct ParseResult {
    Dataset dataset;
    ParseDiagnostics diagnostics;
};

// Streaming single-pass parse. Record-level problems (unknown label, empty
// sentence, duplicate id, missing field) reject that record with a counted
// diagnostic; an unparseable header/first line is fatal (DataError).
// Records without an id get their zero-based input ordinal as id.
ParseResult parse_dataset(std::istream& in, DatasetFormat format,
                          std::string provenance = {});

// JSON-lines form; parse_dataset of the output reproduces the dataset
// field-for-field.
void serialize_dataset(const Dataset& dataset, std::ostream& out);

// Concatenation preserving part order then in-part order. Duplicate ids
// across parts are fatal.
Dataset merge_splits(const std::vector<Dataset>& parts);

// Instances whose id is in `ids`, preserving dataset order. Unknown ids are
// fatal.
Dataset subset_by_ids(const Dataset& dataset, const std::vector<std::string>& ids);

}  // namespace wobias
