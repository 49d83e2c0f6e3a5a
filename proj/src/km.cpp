#include "surv/km.hpp"

#include <algorithm>
#include <numeric>

namespace surv {

KMCurve kaplan_meier(const std::vector<double>& times, const std::vector<std::uint8_t>& events) {
    const std::size_t n = times.size();
    if (n == 0) throw InvalidInput("kaplan_meier: empty dataset");
    if (events.size() != n) throw InvalidInput("kaplan_meier: times/events length mismatch");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    KMCurve curve;
    double s = 1.0;
    std::size_t k = 0;
    long at_risk = static_cast<long>(n);
    while (k < n) {
        const double t = times[order[k]];
        long d = 0, group = 0;
        while (k < n && times[order[k]] == t) {
            if (events[order[k]]) ++d;
            ++group;
            ++k;
        }
        if (d > 0) {
            s *= (1.0 - static_cast<double>(d) / static_cast<double>(at_risk));
            curve.times.push_back(t);
            curve.survival.push_back(s);
            curve.at_risk.push_back(at_risk);
            curve.events.push_back(d);
        }
        at_risk -= group;
    }
    return curve;
}

KMCurve kaplan_meier(const SurvivalDataset& ds) {
    return kaplan_meier(ds.times(), ds.events());
}

}  // namespace surv
