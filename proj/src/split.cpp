#include "surv/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace surv {

namespace {

struct Cell {
    int bin;
    std::vector<std::size_t> members;
};

}  // namespace

SplitIndices stratified_split(const std::vector<int>& time_bins,
                              const std::vector<std::uint8_t>& events,
                              const std::array<double, 3>& fractions, std::uint64_t seed) {
    if (time_bins.size() != events.size())
        throw InvalidInput("stratified_split: bins/events length mismatch");
    const double total = fractions[0] + fractions[1] + fractions[2];
    for (double f : fractions)
        if (f <= 0.0) throw InvalidInput("stratified_split: fractions must be positive");
    if (std::abs(total - 1.0) > 1e-9)
        throw InvalidInput("stratified_split: fractions must sum to 1");

    SplitIndices out;
    out.seed = seed;
    auto rng = make_rng(seed, 0x57A7);

    for (int status = 1; status >= 0; --status) {
        // cells ascending by time bin for this event status
        std::map<int, std::vector<std::size_t>> by_bin;
        for (std::size_t i = 0; i < time_bins.size(); ++i)
            if (events[i] == status) by_bin[time_bins[i]].push_back(i);
        std::vector<Cell> cells;
        for (auto& [bin, members] : by_bin) cells.push_back({bin, std::move(members)});

        // merge undersized cells (< 1 record per split) into the nearest bin
        bool merged = true;
        while (merged && cells.size() > 1) {
            merged = false;
            for (std::size_t c = 0; c < cells.size(); ++c) {
                if (cells[c].members.size() >= 3) continue;
                std::size_t target = c;
                int best_dist = std::numeric_limits<int>::max();
                for (std::size_t o = 0; o < cells.size(); ++o) {
                    if (o == c) continue;
                    const int dist = std::abs(cells[o].bin - cells[c].bin);
                    if (dist < best_dist) {
                        best_dist = dist;
                        target = o;
                    }
                }
                if (target == c) continue;
                out.merged_cells.push_back(
                    "event=" + std::to_string(status) + " bin=" + std::to_string(cells[c].bin) +
                    " merged into bin=" + std::to_string(cells[target].bin));
                auto& dst = cells[target].members;
                dst.insert(dst.end(), cells[c].members.begin(), cells[c].members.end());
                cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(c));
                merged = true;
                break;
            }
        }

        // largest-remainder allocation per cell with carry across cells
        std::array<double, 3> carry = {0.0, 0.0, 0.0};
        for (auto& cell : cells) {
            std::sort(cell.members.begin(), cell.members.end());
            seeded_shuffle(cell.members, rng);
            const double n = static_cast<double>(cell.members.size());
            std::array<double, 3> ideal;
            std::array<std::size_t, 3> alloc;
            std::size_t used = 0;
            for (int s = 0; s < 3; ++s) {
                ideal[s] = fractions[s] * n + carry[s];
                alloc[s] = static_cast<std::size_t>(std::max(0.0, std::floor(ideal[s])));
                used += alloc[s];
            }
            // distribute leftovers by largest fractional remainder; tie-break
            // by split index order
            while (used < cell.members.size()) {
                int pick = 0;
                double best = -1.0;
                for (int s = 0; s < 3; ++s) {
                    const double rem = ideal[s] - static_cast<double>(alloc[s]);
                    if (rem > best + 1e-12) {
                        best = rem;
                        pick = s;
                    }
                }
                ++alloc[pick];
                ++used;
            }
            while (used > cell.members.size()) {  // guard against carry overshoot
                int pick = 0;
                double worst = 2.0;
                for (int s = 0; s < 3; ++s) {
                    const double rem = ideal[s] - static_cast<double>(alloc[s]);
                    if (alloc[s] > 0 && rem < worst) {
                        worst = rem;
                        pick = s;
                    }
                }
                --alloc[pick];
                --used;
            }
            for (int s = 0; s < 3; ++s) carry[s] = ideal[s] - static_cast<double>(alloc[s]);

            std::size_t cursor = 0;
            for (std::size_t k = 0; k < alloc[0]; ++k) out.train.push_back(cell.members[cursor++]);
            for (std::size_t k = 0; k < alloc[1]; ++k)
                out.validation.push_back(cell.members[cursor++]);
            for (std::size_t k = 0; k < alloc[2]; ++k) out.test.push_back(cell.members[cursor++]);
        }
    }

    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

SplitIndices stratified_split(const SurvivalDataset& ds, const std::array<double, 3>& fractions,
                              std::uint64_t seed) {
    std::vector<int> bins(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        bins[i] = discretize_time(ds.records[i].observed_time, ds.unit_length);
    return stratified_split(bins, ds.events(), fractions, seed);
}

}  // namespace surv
