#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wobias/corpus.hpp"

namespace wobias {

// Exact rational in [0,1] contexts; den > 0 always.
struct Rational {
    long long num = 0;
    long long den = 1;

    friend bool operator==(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) {
        return a < b || a == b;
    }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Exact parse of a non-negative decimal literal like "0.8" or "1".
Rational rational_from_decimal(std::string_view text);

// Word overlap of a premise/hypothesis pair: the numerator counts hypothesis
// token occurrences whose type appears anywhere in the premise (so "a ... a"
// contributes twice), the denominator is the hypothesis length. Kept as an
// exact rational so full (=1) and none (=0) never suffer float drift.
struct OverlapRatio {
    long long shared = 0;
    long long hyp_len = 1;

    Rational ratio() const { return {shared, hyp_len}; }
    double value() const { return static_cast<double>(shared) / static_cast<double>(hyp_len); }
};

// Throws DataError on an empty hypothesis (undefined ratio).
OverlapRatio word_overlap(const TokenSeq& premise, const TokenSeq& hypothesis);

struct BinId {
    std::string label;
    Rational lo, hi;
    bool lo_closed = true;
    bool hi_closed = false;

    bool is_point() const { return lo == hi; }
    bool contains(const Rational& v) const;
};

struct BinScheme {
    std::string name;
    std::vector<BinId> bins;  // ordered high-overlap first

    // Checks pairwise disjointness and cover of [0,1] on a dense grid of
    // exact rationals (all s/h with h <= 64). Throws DataError on violation.
    void validate() const;

    int index_of(std::string_view bin_label) const;  // -1 when absent
};

// Full(=1), [0.8,1.0), [0.6,0.8), [0.4,0.6), [0.2,0.4), (0.0,0.2), None(=0).
BinScheme seven_bin_scheme();

// Full(=1), [0.5,1.0), (0.0,0.5), None(=0).
BinScheme four_category_scheme();

// "seven" or "four". Throws UsageError otherwise.
BinScheme scheme_by_name(std::string_view name);

// The unique bin containing the ratio; exact-point bins are matched on the
// exact rational. Throws DataError if the scheme does not cover the value.
const BinId& assign_bin(const OverlapRatio& ratio, const BinScheme& scheme);

struct Histogram {
    std::string scheme;
    std::vector<std::string> bins;                   // scheme order
    std::vector<std::array<std::size_t, 2>> counts;  // [bin][CollapsedLabel]
    std::size_t total = 0;

    std::size_t count(std::string_view bin, CollapsedLabel label) const;
    // Per-label proportions; a label with zero instances yields all-zero.
    std::vector<std::array<double, 2>> normalized() const;
};

Histogram bin_histogram(const Dataset& dataset, const BinScheme& scheme);

}  // namespace wobias
