#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wobias/corpus.hpp"
#include "wobias/overlap.hpp"

namespace wobias {

struct PredictionRecord {
    std::string id;
    std::vector<double> probs;  // over the file's declared label space
};

struct PredictionFile {
    LabelSpace space = LabelSpace::collapsed;
    std::vector<PredictionRecord> records;
};

// JSON-lines with a mandatory header line {"label_space": [...]}, then one
// {"id":.., "probs":[..]} per line. Probs must be non-negative and sum to 1
// within 1e-6.
PredictionFile read_predictions(std::istream& in);
void write_predictions(const PredictionFile& preds, std::ostream& out);

// 3-way probs collapse by summing neutral+contradiction mass; 2-way pass
// through. Returns {p_entailment, p_non_entailment}.
std::array<double, 2> collapse_probs(const std::vector<double>& probs, LabelSpace space);

// Argmax over collapsed probs; exact ties resolve to non-entailment.
CollapsedLabel predicted_label(const std::array<double, 2>& collapsed);

struct BinCell {
    std::size_t n = 0;
    std::size_t correct = 0;
    double conf_sum = 0.0;  // summed probability on the gold collapsed label

    bool empty() const { return n == 0; }
    double accuracy() const { return n ? static_cast<double>(correct) / n : 0.0; }
    double mean_confidence() const { return n ? conf_sum / n : 0.0; }
};

struct BinReport {
    std::string scheme;
    std::vector<std::string> bins;               // scheme order
    std::vector<std::array<BinCell, 2>> cells;   // [bin][CollapsedLabel]
    std::size_t total = 0;
    std::size_t total_correct = 0;

    double overall_accuracy() const {
        return total ? static_cast<double>(total_correct) / total : 0.0;
    }
    const BinCell* find(std::string_view bin, CollapsedLabel label) const;
    // Pooled accuracy over a set of (bin, label) cells; nullopt when empty.
    std::optional<double> pooled_accuracy(
        const std::vector<std::pair<std::string, CollapsedLabel>>& keys) const;
};

// Joins predictions with overlap bins. Every dataset id must have exactly one
// prediction and vice versa; violations are fatal and name the ids.
BinReport evaluate(const Dataset& dataset, const PredictionFile& preds,
                   const BinScheme& scheme);

// report CSV: bin,label,n,accuracy,mean_confidence (empty cells keep the
// numeric fields blank). The JSON summary carries exact counts so figures can
// be re-derived without re-running.
void write_bin_report_csv(const BinReport& report, std::ostream& out);
void write_bin_report_summary(const BinReport& report, std::ostream& out);
BinReport read_bin_report_csv(std::istream& in);

struct ProfileCell {
    std::size_t n = 0;
    double ent_sum = 0.0;  // summed probability mass on entailment
    double non_sum = 0.0;

    double mean_ent() const { return n ? ent_sum / n : 0.0; }
    double mean_non() const { return n ? non_sum / n : 0.0; }
};

// Mean probability mass per bin, split by gold label and aggregated; row
// index 0/1 follow CollapsedLabel, 2 is the all-golds aggregate.
struct ProfileReport {
    std::string scheme;
    std::vector<std::string> bins;
    std::vector<std::array<ProfileCell, 3>> cells;
};

ProfileReport confidence_profile(const Dataset& dataset, const PredictionFile& preds,
                                 const BinScheme& scheme);
void write_profile_csv(const ProfileReport& profile, std::ostream& out);

struct CellDelta {
    bool available = false;  // both sides non-empty
    double d_accuracy = 0.0;
    double d_mean_confidence = 0.0;
};

struct ReportComparison {
    std::string scheme;
    std::vector<std::string> bins;
    std::vector<std::array<CellDelta, 2>> cells;  // b minus a
    double overall_delta = 0.0;
    std::optional<double> full_nonent_delta;  // gap on "Full" x non-entailment
    std::optional<double> low_ent_delta;      // pooled "(0.0,0.2)" + "None" x entailment
};

// Cell structure of both reports must match exactly.
ReportComparison compare(const BinReport& a, const BinReport& b);
void write_comparison_csv(const ReportComparison& cmp, std::ostream& out);
void write_comparison_summary(const ReportComparison& cmp, std::ostream& out);

}  // namespace wobias
