#pragma once

#include <string>
#include <utility>
#include <vector>

namespace surv {

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

// Minimal deterministic line-plot emitter; every plot is reproducible from
// its CSV alone, the SVG is a convenience view.
void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series);

}  // namespace surv
