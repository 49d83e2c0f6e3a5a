#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "surv/common.hpp"

namespace surv {

// Header + rows of raw cell text. Quoted fields (RFC-4180 style, embedded
// commas/quotes/newlines) are unescaped on read.
struct RawTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t col_index(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

RawTable read_csv(const std::string& path);

// One CSV line; minimal quoting (fields containing separators are quoted).
std::string csv_escape(const std::string& field);

}  // namespace surv
