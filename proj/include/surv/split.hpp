#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "surv/types.hpp"

namespace surv {

struct SplitIndices {
    std::vector<std::size_t> train, validation, test;
    std::uint64_t seed = 0;
    std::vector<std::string> merged_cells;  // stratification cells merged away
};

// Stratified allocation over (event indicator x time bin) cells. Each cell
// is dealt proportionally by the largest-remainder method with fractional
// carry across cells, so both the censored fraction and the per-bin event
// proportions of every split track the full dataset within one record per
// cell group. Cells smaller than one record per split are merged into the
// nearest time bin of the same event status. Deterministic given seed.
SplitIndices stratified_split(const std::vector<int>& time_bins,
                              const std::vector<std::uint8_t>& events,
                              const std::array<double, 3>& fractions, std::uint64_t seed);

SplitIndices stratified_split(const SurvivalDataset& ds, const std::array<double, 3>& fractions,
                              std::uint64_t seed);

}  // namespace surv
