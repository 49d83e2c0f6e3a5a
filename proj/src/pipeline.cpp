#include "surv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace surv {

namespace {

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool cell_missing(const std::string& cell, const std::string& token) {
    return cell.empty() || cell == token;
}

// event cells match either as exact strings or numerically ("1" == "1.0")
bool event_matches(const std::string& cell, const std::string& event_value) {
    if (cell == event_value) return true;
    double a, b;
    if (parse_double(cell, a) && parse_double(event_value, b)) return a == b;
    return false;
}

}  // namespace

FeatureTable load_csv(const DatasetSpec& spec, const RawTable& raw) {
    validate_spec(spec);
    const std::size_t time_col = raw.col_index(spec.time_column);
    const std::size_t event_col = raw.col_index(spec.event_column);
    std::optional<std::size_t> origin_col;
    if (spec.time_origin_column) origin_col = raw.col_index(*spec.time_origin_column);
    std::optional<std::size_t> filter_col;
    if (spec.filter) filter_col = raw.col_index(spec.filter->first);

    std::vector<std::size_t> feature_cols;
    for (const auto& f : spec.features) feature_cols.push_back(raw.col_index(f.name));

    FeatureTable table;
    table.features = spec.features;

    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        const auto& row = raw.rows[r];
        if (filter_col && !event_matches(row[*filter_col], spec.filter->second)) continue;

        const auto row_loc = [&](const std::string& col) {
            return spec.path + " row " + std::to_string(r + 2) + " column '" + col + "'";
        };

        double t;
        if (cell_missing(row[time_col], spec.missing_token) ||
            !parse_double(row[time_col], t))
            throw ParseError("unparseable time cell at " + row_loc(spec.time_column));
        if (origin_col) {
            double o;
            if (cell_missing(row[*origin_col], spec.missing_token) ||
                !parse_double(row[*origin_col], o))
                throw ParseError("unparseable time-origin cell at " +
                                 row_loc(*spec.time_origin_column));
            t -= o;
        }
        if (t < 0.0) throw ParseError("negative observed time at " + row_loc(spec.time_column));
        if (cell_missing(row[event_col], spec.missing_token))
            throw ParseError("missing event cell at " + row_loc(spec.event_column));

        table.times.push_back(t);
        table.events.push_back(event_matches(row[event_col], spec.event_value) ? 1 : 0);

        std::vector<std::string> cells(spec.features.size());
        for (std::size_t f = 0; f < spec.features.size(); ++f) {
            const std::string& cell = row[feature_cols[f]];
            const bool missing = cell_missing(cell, spec.missing_token);
            table.missing.push_back(missing ? 1 : 0);
            if (!missing && spec.features[f].kind == FeatureKind::Continuous) {
                double v;
                if (!parse_double(cell, v))
                    throw ParseError("unparseable numeric cell at " +
                                     row_loc(spec.features[f].name));
            }
            cells[f] = missing ? std::string() : cell;
        }
        table.cells.push_back(std::move(cells));
    }
    return table;
}

FeatureTable load_csv(const DatasetSpec& spec, const std::string& resolved_path) {
    DatasetSpec local = spec;
    local.path = resolved_path;
    return load_csv(local, read_csv(resolved_path));
}

FeatureTable drop_sparse_features(const FeatureTable& table, double threshold,
                                  std::vector<DroppedFeature>* dropped) {
    if (threshold <= 0.0 || threshold > 1.0)
        throw InvalidInput("drop_sparse_features: threshold must lie in (0,1]");
    const std::size_t n = table.rows(), p = table.features.size();
    std::vector<std::size_t> keep;
    for (std::size_t f = 0; f < p; ++f) {
        std::size_t miss = 0;
        for (std::size_t r = 0; r < n; ++r) miss += table.is_missing(r, f);
        const double frac = n == 0 ? 0.0 : static_cast<double>(miss) / static_cast<double>(n);
        if (frac > threshold) {  // strictly more than the threshold is removed
            if (dropped) dropped->push_back({table.features[f].name, frac});
        } else {
            keep.push_back(f);
        }
    }

    FeatureTable out;
    out.times = table.times;
    out.events = table.events;
    for (std::size_t f : keep) out.features.push_back(table.features[f]);
    out.cells.reserve(n);
    out.missing.reserve(n * keep.size());
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<std::string> cells;
        cells.reserve(keep.size());
        for (std::size_t f : keep) {
            cells.push_back(table.cells[r][f]);
            out.missing.push_back(table.is_missing(r, f) ? 1 : 0);
        }
        out.cells.push_back(std::move(cells));
    }
    return out;
}

ImputeModel fit_impute(const FeatureTable& table, const std::vector<std::size_t>& fit_rows) {
    const std::size_t p = table.features.size();
    ImputeModel model;
    model.medians.assign(p, std::numeric_limits<double>::quiet_NaN());
    model.modes.assign(p, "");

    for (std::size_t f = 0; f < p; ++f) {
        if (table.features[f].kind == FeatureKind::Continuous) {
            std::vector<double> vals;
            for (std::size_t r : fit_rows) {
                if (table.is_missing(r, f)) continue;
                double v;
                parse_double(table.cell(r, f), v);
                vals.push_back(v);
            }
            if (vals.empty())
                throw InvalidInput("impute: feature '" + table.features[f].name +
                                   "' has no observed value (should have been dropped)");
            std::sort(vals.begin(), vals.end());
            const std::size_t mid = vals.size() / 2;
            model.medians[f] =
                vals.size() % 2 == 1 ? vals[mid] : 0.5 * (vals[mid - 1] + vals[mid]);
        } else {
            std::map<std::string, std::size_t> counts;
            for (std::size_t r : fit_rows)
                if (!table.is_missing(r, f)) ++counts[table.cell(r, f)];
            if (counts.empty())
                throw InvalidInput("impute: feature '" + table.features[f].name +
                                   "' has no observed value (should have been dropped)");
            // most common occurrence; ties resolve to the lexicographically
            // first level (counts is ordered)
            std::size_t best = 0;
            for (const auto& [value, count] : counts) {
                if (count > best) {
                    best = count;
                    model.modes[f] = value;
                }
            }
        }
    }
    return model;
}

FeatureTable impute(const FeatureTable& table, const ImputeModel& model) {
    FeatureTable out = table;
    const std::size_t p = table.features.size();
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t f = 0; f < p; ++f) {
            if (!table.is_missing(r, f)) continue;
            if (table.features[f].kind == FeatureKind::Continuous) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.17g", model.medians[f]);
                out.cells[r][f] = buf;
            } else {
                out.cells[r][f] = model.modes[f];
            }
            out.missing[r * p + f] = 0;
        }
    }
    return out;
}

EncodeModel fit_encode(const FeatureTable& table, const std::vector<std::size_t>& fit_rows) {
    const std::size_t p = table.features.size();
    EncodeModel model;
    model.source = table.features;
    model.mins.assign(p, 0.0);
    model.maxs.assign(p, 0.0);
    model.categories.resize(p);

    for (std::size_t f = 0; f < p; ++f) {
        const auto& spec = table.features[f];
        if (spec.kind == FeatureKind::Continuous) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (std::size_t r : fit_rows) {
                if (table.is_missing(r, f))
                    throw InvalidInput("encode: missing cell in feature '" + spec.name +
                                       "' (impute first)");
                double v;
                parse_double(table.cell(r, f), v);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            model.mins[f] = lo;
            model.maxs[f] = hi;
            if (hi == lo)
                model.warnings.push_back("feature '" + spec.name +
                                         "' is constant on the fit rows; encoded as zeros");
            model.encoded_names.push_back(spec.name);
            model.encoded_is_indicator.push_back(0);
        } else {
            std::map<std::string, bool> levels;
            for (std::size_t r : fit_rows) {
                if (table.is_missing(r, f))
                    throw InvalidInput("encode: missing cell in feature '" + spec.name +
                                       "' (impute first)");
                levels[table.cell(r, f)] = true;
            }
            for (const auto& [level, _] : levels) {
                model.categories[f].push_back(level);
                model.encoded_names.push_back(spec.name + "=" + level);
                model.encoded_is_indicator.push_back(1);
            }
        }
    }
    return model;
}

Eigen::MatrixXd encode(const FeatureTable& table, const EncodeModel& model,
                       const std::vector<std::size_t>& rows) {
    std::size_t width = 0;
    for (std::size_t f = 0; f < model.source.size(); ++f)
        width += model.source[f].kind == FeatureKind::Continuous ? 1 : model.categories[f].size();

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(rows.size(), width);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t r = rows[k];
        std::size_t col = 0;
        for (std::size_t f = 0; f < model.source.size(); ++f) {
            if (model.source[f].kind == FeatureKind::Continuous) {
                double v;
                parse_double(table.cell(r, f), v);
                const double range = model.maxs[f] - model.mins[f];
                double scaled = range > 0.0 ? (v - model.mins[f]) / range : 0.0;
                X(k, col++) = std::clamp(scaled, 0.0, 1.0);
            } else {
                const auto& levels = model.categories[f];
                const std::string& cell = table.cell(r, f);
                // unseen levels leave the whole block at zero
                for (std::size_t c = 0; c < levels.size(); ++c)
                    if (levels[c] == cell) X(k, col + c) = 1.0;
                col += levels.size();
            }
        }
    }
    return X;
}

}  // namespace surv
