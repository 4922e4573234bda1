#include "wobias/overlap.hpp"

#include <numeric>
#include <unordered_set>

#include "wobias/errors.hpp"

namespace wobias {

Rational rational_from_decimal(std::string_view text) {
    long long num = 0, den = 1;
    std::size_t i = 0;
    bool any_digit = false, seen_dot = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (seen_dot) throw DataError("bad decimal \"" + std::string(text) + "\"");
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            num = num * 10 + (c - '0');
            if (seen_dot) den *= 10;
            any_digit = true;
            if (den > 1000000000000000LL)
                throw DataError("decimal \"" + std::string(text) + "\" has too many digits");
        } else {
            throw DataError("bad decimal \"" + std::string(text) + "\"");
        }
    }
    if (!any_digit) throw DataError("bad decimal \"" + std::string(text) + "\"");
    long long g = std::gcd(num, den);
    return {num / g, den / g};
}

OverlapRatio word_overlap(const TokenSeq& premise, const TokenSeq& hypothesis) {
    if (hypothesis.empty())
        throw DataError("word overlap undefined: empty hypothesis");
    std::unordered_set<std::string_view> premise_types(premise.begin(), premise.end());
    long long shared = 0;
    for (const auto& tok : hypothesis)
        if (premise_types.count(tok)) ++shared;
    return {shared, static_cast<long long>(hypothesis.size())};
}

bool BinId::contains(const Rational& v) const {
    if (lo_closed ? v < lo : v <= lo) return false;
    if (hi_closed ? hi < v : hi <= v) return false;
    return true;
}

void BinScheme::validate() const {
    for (const auto& b : bins) {
        if (b.hi < b.lo)
            throw DataError("scheme " + name + ": bin " + b.label + " has lower > upper");
        if (b.is_point() && !(b.lo_closed && b.hi_closed))
            throw DataError("scheme " + name + ": point bin " + b.label + " must be closed");
    }
    for (long long h = 1; h <= 64; ++h) {
        for (long long s = 0; s <= h; ++s) {
            Rational v{s, h};
            int hits = 0;
            for (const auto& b : bins)
                if (b.contains(v)) ++hits;
            if (hits != 1)
                throw DataError("scheme " + name + ": value " + std::to_string(s) + "/" +
                                std::to_string(h) + " matched " + std::to_string(hits) +
                                " bins");
        }
    }
}

int BinScheme::index_of(std::string_view bin_label) const {
    for (std::size_t i = 0; i < bins.size(); ++i)
        if (bins[i].label == bin_label) return static_cast<int>(i);
    return -1;
}

BinScheme seven_bin_scheme() {
    BinScheme s;
    s.name = "seven";
    s.bins = {
        {"Full", {1, 1}, {1, 1}, true, true},
        {"[0.8,1.0)", {4, 5}, {1, 1}, true, false},
        {"[0.6,0.8)", {3, 5}, {4, 5}, true, false},
        {"[0.4,0.6)", {2, 5}, {3, 5}, true, false},
        {"[0.2,0.4)", {1, 5}, {2, 5}, true, false},
        {"(0.0,0.2)", {0, 1}, {1, 5}, false, false},
        {"None", {0, 1}, {0, 1}, true, true},
    };
    return s;
}

BinScheme four_category_scheme() {
    BinScheme s;
    s.name = "four";
    s.bins = {
        {"Full", {1, 1}, {1, 1}, true, true},
        {"[0.5,1.0)", {1, 2}, {1, 1}, true, false},
        {"(0.0,0.5)", {0, 1}, {1, 2}, false, false},
        {"None", {0, 1}, {0, 1}, true, true},
    };
    return s;
}

BinScheme scheme_by_name(std::string_view name) {
    if (name == "seven") return seven_bin_scheme();
    if (name == "four") return four_category_scheme();
    throw UsageError("unknown bin scheme \"" + std::string(name) +
                     "\" (expected \"seven\" or \"four\")");
}

const BinId& assign_bin(const OverlapRatio& ratio, const BinScheme& scheme) {
    Rational v = ratio.ratio();
    for (const auto& b : scheme.bins)
        if (b.contains(v)) return b;
    throw DataError("scheme " + scheme.name + " does not cover overlap " +
                    std::to_string(ratio.shared) + "/" + std::to_string(ratio.hyp_len));
}

std::size_t Histogram::count(std::string_view bin, CollapsedLabel label) const {
    for (std::size_t i = 0; i < bins.size(); ++i)
        if (bins[i] == bin) return counts[i][static_cast<int>(label)];
    return 0;
}

std::vector<std::array<double, 2>> Histogram::normalized() const {
    std::array<std::size_t, 2> totals{0, 0};
    for (const auto& row : counts) {
        totals[0] += row[0];
        totals[1] += row[1];
    }
    std::vector<std::array<double, 2>> out(counts.size(), {0.0, 0.0});
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (int l = 0; l < 2; ++l)
            if (totals[l] > 0)
                out[i][l] = static_cast<double>(counts[i][l]) / static_cast<double>(totals[l]);
    return out;
}

Histogram bin_histogram(const Dataset& dataset, const BinScheme& scheme) {
    Histogram h;
    h.scheme = scheme.name;
    for (const auto& b : scheme.bins) h.bins.push_back(b.label);
    h.counts.assign(scheme.bins.size(), {0, 0});
    for (const auto& inst : dataset.instances) {
        auto ratio = word_overlap(tokenize(inst.premise), tokenize(inst.hypothesis));
        const BinId& bin = assign_bin(ratio, scheme);
        int bi = scheme.index_of(bin.label);
        h.counts[bi][static_cast<int>(collapse_label(inst.gold))] += 1;
        ++h.total;
    }
    return h;
}

}  // namespace wobias
