#include "surv/csv.hpp"

#include <fstream>
#include <sstream>

namespace surv {

std::size_t RawTable::col_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw SchemaError("missing column '" + name + "'");
}

bool RawTable::has_column(const std::string& name) const {
    for (const auto& c : columns)
        if (c == name) return true;
    return false;
}

namespace {

// Splits one logical CSV record; the caller feeds additional lines while
// a quoted field is open.
bool parse_record(const std::string& line, std::vector<std::string>& out, bool& in_quotes,
                  std::string& pending) {
    std::string field = std::move(pending);
    pending.clear();
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (ch == '\r') {
            // tolerate CRLF
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes) {
        field.push_back('\n');
        pending = std::move(field);
        return false;
    }
    out.push_back(std::move(field));
    return true;
}

}  // namespace

RawTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open file: " + path);

    RawTable table;
    std::string line, pending;
    bool in_quotes = false;
    std::vector<std::string> record;
    bool have_header = false;
    std::size_t lineno = 0;

    while (std::getline(in, line)) {
        ++lineno;
        if (!parse_record(line, record, in_quotes, pending)) continue;
        if (!have_header) {
            table.columns = std::move(record);
            if (table.columns.empty())
                throw SchemaError(path + ": empty header row");
            have_header = true;
        } else {
            if (record.size() != table.columns.size())
                throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(table.columns.size()) + " cells, found " +
                                 std::to_string(record.size()));
            table.rows.push_back(std::move(record));
        }
        record.clear();
    }
    if (in_quotes) throw ParseError(path + ": unterminated quoted field");
    if (!have_header) throw SchemaError(path + ": missing header row");
    return table;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace surv
