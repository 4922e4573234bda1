#include "wobias/audit.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "wobias/errors.hpp"

#include <json.hpp>

namespace wobias {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void check_probs(const PredictionRecord& rec, int expected) {
    if (static_cast<int>(rec.probs.size()) != expected)
        throw DataError("prediction " + rec.id + ": expected " + std::to_string(expected) +
                        " probabilities, got " + std::to_string(rec.probs.size()));
    double sum = 0.0;
    for (double p : rec.probs) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw DataError("prediction " + rec.id + ": negative or non-finite probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw DataError("prediction " + rec.id + ": probabilities sum to " + fmt(sum));
}

}  // namespace

PredictionFile read_predictions(std::istream& in) {
    PredictionFile preds;
    std::string line;
    bool header_seen = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ordered_json rec = ordered_json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object())
            throw DataError("predictions line " + std::to_string(lineno) + ": malformed JSON");
        if (!header_seen) {
            if (!rec.contains("label_space") || !rec["label_space"].is_array())
                throw DataError("predictions: first line must declare {\"label_space\": [...]}");
            auto names = rec["label_space"].get<std::vector<std::string>>();
            if (names == label_names(LabelSpace::three_way))
                preds.space = LabelSpace::three_way;
            else if (names == label_names(LabelSpace::collapsed))
                preds.space = LabelSpace::collapsed;
            else
                throw DataError("predictions: unrecognized label_space");
            header_seen = true;
            continue;
        }
        if (!rec.contains("id") || !rec["id"].is_string() || !rec.contains("probs") ||
            !rec["probs"].is_array())
            throw DataError("predictions line " + std::to_string(lineno) +
                            ": expected {\"id\":.., \"probs\":[..]}");
        PredictionRecord p;
        p.id = rec["id"].get<std::string>();
        p.probs = rec["probs"].get<std::vector<double>>();
        check_probs(p, label_count(preds.space));
        preds.records.push_back(std::move(p));
    }
    if (!header_seen && !preds.records.empty())
        throw DataError("predictions: missing label_space header");
    return preds;
}

void write_predictions(const PredictionFile& preds, std::ostream& out) {
    ordered_json header;
    header["label_space"] = label_names(preds.space);
    out << header.dump() << '\n';
    for (const auto& rec : preds.records) {
        ordered_json j;
        j["id"] = rec.id;
        j["probs"] = rec.probs;
        out << j.dump() << '\n';
    }
}

std::array<double, 2> collapse_probs(const std::vector<double>& probs, LabelSpace space) {
    if (space == LabelSpace::collapsed) return {probs[0], probs[1]};
    return {probs[0], probs[1] + probs[2]};
}

CollapsedLabel predicted_label(const std::array<double, 2>& collapsed) {
    // Tie goes to non-entailment so reports are deterministic.
    return collapsed[0] > collapsed[1] ? CollapsedLabel::entailment
                                       : CollapsedLabel::non_entailment;
}

const BinCell* BinReport::find(std::string_view bin, CollapsedLabel label) const {
    for (std::size_t i = 0; i < bins.size(); ++i)
        if (bins[i] == bin) return &cells[i][static_cast<int>(label)];
    return nullptr;
}

std::optional<double> BinReport::pooled_accuracy(
    const std::vector<std::pair<std::string, CollapsedLabel>>& keys) const {
    std::size_t n = 0, correct = 0;
    for (const auto& [bin, label] : keys) {
        const BinCell* cell = find(bin, label);
        if (!cell) continue;
        n += cell->n;
        correct += cell->correct;
    }
    if (n == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(n);
}

namespace {

// id -> record index; duplicates and mismatches against the dataset are fatal.
std::unordered_map<std::string, std::size_t> index_predictions(
    const Dataset& dataset, const PredictionFile& preds) {
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < preds.records.size(); ++i) {
        if (!by_id.emplace(preds.records[i].id, i).second)
            throw DataError("duplicate prediction for id " + preds.records[i].id);
    }
    std::string missing;
    for (const auto& inst : dataset.instances) {
        if (!by_id.count(inst.id)) {
            if (!missing.empty()) missing += ", ";
            missing += inst.id;
            if (missing.size() > 120) { missing += ", ..."; break; }
        }
    }
    if (!missing.empty()) throw DataError("missing predictions for ids: " + missing);
    if (preds.records.size() != dataset.size()) {
        std::unordered_map<std::string, bool> in_data;
        for (const auto& inst : dataset.instances) in_data[inst.id] = true;
        std::string extra;
        for (const auto& rec : preds.records) {
            if (!in_data.count(rec.id)) {
                if (!extra.empty()) extra += ", ";
                extra += rec.id;
                if (extra.size() > 120) { extra += ", ..."; break; }
            }
        }
        throw DataError("predictions for unknown ids: " + extra);
    }
    return by_id;
}

}  // namespace

BinReport evaluate(const Dataset& dataset, const PredictionFile& preds,
                   const BinScheme& scheme) {
    auto by_id = index_predictions(dataset, preds);
    BinReport report;
    report.scheme = scheme.name;
    for (const auto& b : scheme.bins) report.bins.push_back(b.label);
    report.cells.assign(scheme.bins.size(), {});
    for (const auto& inst : dataset.instances) {
        const auto& rec = preds.records[by_id.at(inst.id)];
        auto collapsed = collapse_probs(rec.probs, preds.space);
        CollapsedLabel gold = collapse_label(inst.gold);
        CollapsedLabel pred = predicted_label(collapsed);
        auto ratio = word_overlap(tokenize(inst.premise), tokenize(inst.hypothesis));
        int bi = scheme.index_of(assign_bin(ratio, scheme).label);
        BinCell& cell = report.cells[bi][static_cast<int>(gold)];
        cell.n += 1;
        cell.conf_sum += collapsed[static_cast<int>(gold)];
        if (pred == gold) {
            cell.correct += 1;
            report.total_correct += 1;
        }
        report.total += 1;
    }
    return report;
}

void write_bin_report_csv(const BinReport& report, std::ostream& out) {
    out << "bin,label,n,accuracy,mean_confidence\n";
    for (std::size_t i = 0; i < report.bins.size(); ++i) {
        for (int l = 0; l < 2; ++l) {
            const BinCell& cell = report.cells[i][l];
            out << "\"" << report.bins[i] << "\","
                << to_string(static_cast<CollapsedLabel>(l)) << "," << cell.n << ",";
            if (cell.empty())
                out << ",";  // empty, not 0.0
            else
                out << fmt(cell.accuracy()) << "," << fmt(cell.mean_confidence());
            out << "\n";
        }
    }
}

void write_bin_report_summary(const BinReport& report, std::ostream& out) {
    ordered_json j;
    j["scheme"] = report.scheme;
    j["n"] = report.total;
    j["correct"] = report.total_correct;
    j["overall_accuracy"] = report.overall_accuracy();
    j["argmax_tie_rule"] = "non-entailment";
    ordered_json cells = ordered_json::array();
    for (std::size_t i = 0; i < report.bins.size(); ++i) {
        for (int l = 0; l < 2; ++l) {
            const BinCell& cell = report.cells[i][l];
            ordered_json c;
            c["bin"] = report.bins[i];
            c["label"] = std::string(to_string(static_cast<CollapsedLabel>(l)));
            c["n"] = cell.n;
            c["correct"] = cell.correct;
            c["conf_sum"] = cell.conf_sum;
            cells.push_back(std::move(c));
        }
    }
    j["cells"] = std::move(cells);
    out << j.dump(2) << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (quoted) {
            if (c == '"') quoted = false;
            else cur.push_back(c);
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

BinReport read_bin_report_csv(std::istream& in) {
    BinReport report;
    std::string line;
    if (!std::getline(in, line)) throw DataError("report CSV: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "bin,label,n,accuracy,mean_confidence")
        throw DataError("report CSV: unexpected header \"" + line + "\"");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 5)
            throw DataError("report CSV line " + std::to_string(lineno) + ": bad field count");
        auto label = collapsed_label_from(f[1]);
        if (!label)
            throw DataError("report CSV line " + std::to_string(lineno) + ": bad label " + f[1]);
        int bi = -1;
        for (std::size_t i = 0; i < report.bins.size(); ++i)
            if (report.bins[i] == f[0]) bi = static_cast<int>(i);
        if (bi < 0) {
            report.bins.push_back(f[0]);
            report.cells.push_back({});
            bi = static_cast<int>(report.bins.size()) - 1;
        }
        BinCell& cell = report.cells[bi][static_cast<int>(*label)];
        cell.n = std::stoull(f[2]);
        if (!f[3].empty()) {
            // accuracy * n is an integer count by construction
            cell.correct = static_cast<std::size_t>(std::llround(std::stod(f[3]) * cell.n));
            cell.conf_sum = std::stod(f[4]) * static_cast<double>(cell.n);
        }
        report.total += cell.n;
        report.total_correct += cell.correct;
    }
    return report;
}

ProfileReport confidence_profile(const Dataset& dataset, const PredictionFile& preds,
                                 const BinScheme& scheme) {
    auto by_id = index_predictions(dataset, preds);
    ProfileReport profile;
    profile.scheme = scheme.name;
    for (const auto& b : scheme.bins) profile.bins.push_back(b.label);
    profile.cells.assign(scheme.bins.size(), {});
    for (const auto& inst : dataset.instances) {
        const auto& rec = preds.records[by_id.at(inst.id)];
        auto collapsed = collapse_probs(rec.probs, preds.space);
        auto ratio = word_overlap(tokenize(inst.premise), tokenize(inst.hypothesis));
        int bi = scheme.index_of(assign_bin(ratio, scheme).label);
        int gold = static_cast<int>(collapse_label(inst.gold));
        for (int row : {gold, 2}) {
            ProfileCell& cell = profile.cells[bi][row];
            cell.n += 1;
            cell.ent_sum += collapsed[0];
            cell.non_sum += collapsed[1];
        }
    }
    return profile;
}

void write_profile_csv(const ProfileReport& profile, std::ostream& out) {
    out << "bin,gold,n,mean_p_entailment,mean_p_nonentailment\n";
    static const char* kRows[3] = {"entailment", "non-entailment", "all"};
    for (std::size_t i = 0; i < profile.bins.size(); ++i) {
        for (int r = 0; r < 3; ++r) {
            const ProfileCell& cell = profile.cells[i][r];
            out << "\"" << profile.bins[i] << "\"," << kRows[r] << "," << cell.n << ",";
            if (cell.n == 0)
                out << ",";
            else
                out << fmt(cell.mean_ent()) << "," << fmt(cell.mean_non());
            out << "\n";
        }
    }
}

ReportComparison compare(const BinReport& a, const BinReport& b) {
    if (a.scheme != b.scheme || a.bins != b.bins)
        throw DataError("compare: reports use different schemes (" + a.scheme + " vs " +
                        b.scheme + ")");
    ReportComparison cmp;
    cmp.scheme = a.scheme;
    cmp.bins = a.bins;
    cmp.cells.assign(a.bins.size(), {});
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        for (int l = 0; l < 2; ++l) {
            const BinCell& ca = a.cells[i][l];
            const BinCell& cb = b.cells[i][l];
            if (!ca.empty() && !cb.empty()) {
                cmp.cells[i][l].available = true;
                cmp.cells[i][l].d_accuracy = cb.accuracy() - ca.accuracy();
                cmp.cells[i][l].d_mean_confidence = cb.mean_confidence() - ca.mean_confidence();
            }
        }
    }
    cmp.overall_delta = b.overall_accuracy() - a.overall_accuracy();
    const BinCell* fa = a.find("Full", CollapsedLabel::non_entailment);
    const BinCell* fb = b.find("Full", CollapsedLabel::non_entailment);
    if (fa && fb && !fa->empty() && !fb->empty())
        cmp.full_nonent_delta = fb->accuracy() - fa->accuracy();
    std::vector<std::pair<std::string, CollapsedLabel>> low = {
        {"(0.0,0.2)", CollapsedLabel::entailment}, {"None", CollapsedLabel::entailment}};
    auto la = a.pooled_accuracy(low);
    auto lb = b.pooled_accuracy(low);
    if (la && lb) cmp.low_ent_delta = *lb - *la;
    return cmp;
}

void write_comparison_csv(const ReportComparison& cmp, std::ostream& out) {
    out << "bin,label,delta_accuracy,delta_mean_confidence\n";
    for (std::size_t i = 0; i < cmp.bins.size(); ++i) {
        for (int l = 0; l < 2; ++l) {
            const CellDelta& d = cmp.cells[i][l];
            out << "\"" << cmp.bins[i] << "\","
                << to_string(static_cast<CollapsedLabel>(l)) << ",";
            if (d.available)
                out << fmt(d.d_accuracy) << "," << fmt(d.d_mean_confidence);
            else
                out << "n/a,n/a";
            out << "\n";
        }
    }
}

void write_comparison_summary(const ReportComparison& cmp, std::ostream& out) {
    ordered_json j;
    j["scheme"] = cmp.scheme;
    j["overall_delta"] = cmp.overall_delta;
    if (cmp.full_nonent_delta)
        j["full_nonent_delta"] = *cmp.full_nonent_delta;
    else
        j["full_nonent_delta"] = nullptr;
    if (cmp.low_ent_delta)
        j["low_ent_delta"] = *cmp.low_ent_delta;
    else
        j["low_ent_delta"] = nullptr;
    out << j.dump(2) << '\n';
}

}  // namespace wobias
