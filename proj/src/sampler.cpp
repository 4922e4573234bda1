#include "wobias/sampler.hpp"

#include <algorithm>
#include <vector>

#include "wobias/errors.hpp"
#include "wobias/rng.hpp"

namespace wobias {

namespace {

Dataset collect(const Dataset& dataset, std::vector<std::size_t> chosen,
                std::string provenance) {
    std::sort(chosen.begin(), chosen.end());
    Dataset out;
    out.provenance = std::move(provenance);
    for (std::size_t i : chosen) out.instances.push_back(dataset.instances[i]);
    return out;
}

}  // namespace

Dataset fewshot_sample(const Dataset& dataset, int k_per_label, LabelSpace space,
                       std::uint64_t seed) {
    if (k_per_label < 0) throw UsageError("fewshot_sample: k must be >= 0");
    auto names = label_names(space);
    std::vector<std::vector<std::size_t>> groups(names.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        groups[gold_index(dataset.instances[i].gold, space)].push_back(i);

    Rng rng = Rng::derive(seed, "sampler");
    std::vector<std::size_t> chosen;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].size() < static_cast<std::size_t>(k_per_label))
            throw DataError("label \"" + names[g] + "\" has " +
                            std::to_string(groups[g].size()) + " < " +
                            std::to_string(k_per_label) + " instances");
        for (std::size_t pick : rng.sample_indices(groups[g].size(), k_per_label))
            chosen.push_back(groups[g][pick]);
    }
    return collect(dataset, std::move(chosen),
                   dataset.provenance + " fewshot(k=" + std::to_string(k_per_label) + ")");
}

Dataset balanced_sample(const Dataset& dataset, int k_per_label, const BinScheme& scheme,
                        LabelSpace space, std::uint64_t seed) {
    if (k_per_label < 0) throw UsageError("balanced_sample: k must be >= 0");
    const int categories = static_cast<int>(scheme.bins.size());
    if (k_per_label % categories != 0)
        throw UsageError("balanced_sample: k=" + std::to_string(k_per_label) +
                         " is not divisible by the " + std::to_string(categories) +
                         " overlap categories; pick k divisible by " +
                         std::to_string(categories));
    const int per_cell = k_per_label / categories;

    auto names = label_names(space);
    // cells[bin][label] -> dataset indices
    std::vector<std::vector<std::vector<std::size_t>>> cells(
        categories, std::vector<std::vector<std::size_t>>(names.size()));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& inst = dataset.instances[i];
        auto ratio = word_overlap(tokenize(inst.premise), tokenize(inst.hypothesis));
        int bi = scheme.index_of(assign_bin(ratio, scheme).label);
        cells[bi][gold_index(inst.gold, space)].push_back(i);
    }

    Rng rng = Rng::derive(seed, "sampler");
    std::vector<std::size_t> chosen;
    for (int b = 0; b < categories; ++b) {
        for (std::size_t g = 0; g < names.size(); ++g) {
            const auto& cell = cells[b][g];
            if (cell.size() < static_cast<std::size_t>(per_cell))
                throw DataError("cell " + scheme.bins[b].label + "x" + names[g] + " has " +
                                std::to_string(cell.size()) + " < " +
                                std::to_string(per_cell) + " eligible instances");
            for (std::size_t pick : rng.sample_indices(cell.size(), per_cell))
                chosen.push_back(cell[pick]);
        }
    }
    return collect(dataset, std::move(chosen),
                   dataset.provenance + " balanced(k=" + std::to_string(k_per_label) + ")");
}

}  // namespace wobias
