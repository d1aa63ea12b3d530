#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "deimos/errors.hpp"

namespace deimos {

/// Split one CSV record into fields. Double-quoted fields may contain
/// commas and doubled quotes; embedded newlines are not supported (a
/// record is one line). Returns false on unbalanced quotes.
inline bool split_csv_fields(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t i = 0;
    const std::size_t n = line.size();
    while (true) {
        if (i < n && line[i] == '"') {
            // Quoted field: scan to the closing quote, treating "" as an
            // escaped quote. The view keeps the quotes; unquote_field
            // materializes the content when needed.
            const std::size_t start = i;
            ++i;
            while (i < n) {
                if (line[i] == '"') {
                    if (i + 1 < n && line[i + 1] == '"') {
                        i += 2;
                        continue;
                    }
                    break;
                }
                ++i;
            }
            if (i >= n) return false; // no closing quote
            ++i; // past closing quote
            out.push_back(line.substr(start, i - start));
        } else {
            const std::size_t start = i;
            while (i < n && line[i] != ',') ++i;
            out.push_back(line.substr(start, i - start));
        }
        if (i >= n) break;
        if (line[i] != ',') return false; // garbage after closing quote
        ++i;
        if (i == n) { // trailing comma: final empty field
            out.push_back(line.substr(i, 0));
            break;
        }
    }
    return true;
}

/// Materialize a field view produced by split_csv_fields, stripping the
/// surrounding quotes and collapsing doubled quotes.
inline std::string unquote_field(std::string_view field) {
    if (field.size() < 2 || field.front() != '"') return std::string(field);
    std::string out;
    out.reserve(field.size() - 2);
    for (std::size_t i = 1; i + 1 < field.size(); ++i) {
        out.push_back(field[i]);
        if (field[i] == '"' && i + 1 < field.size() && field[i + 1] == '"') ++i;
    }
    return out;
}

/// Strip surrounding quotes only when the field carries none of the
/// characters that needed quoting; fast path for numeric fields.
inline std::string_view strip_quotes(std::string_view field) {
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"' &&
        field.find('"', 1) == field.size() - 1)
        return field.substr(1, field.size() - 2);
    return field;
}

/// Line-oriented CSV reader over an input stream. The first row is the
/// header. Field views returned by next_row stay valid until the next
/// call.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {
        std::string line;
        if (!read_line(line)) throw io_error("csv: stream is empty, expected a header row");
        std::vector<std::string_view> fields;
        if (!split_csv_fields(line, fields))
            throw format_error("csv: malformed header row");
        header_.reserve(fields.size());
        for (auto f : fields) header_.push_back(unquote_field(f));
    }

    const std::vector<std::string>& header() const { return header_; }

    /// Index of a header column, or -1 when absent. Leading/trailing
    /// whitespace in the header is ignored (TLC exports pad some names).
    std::ptrdiff_t find_column(std::string_view name) const {
        for (std::size_t i = 0; i < header_.size(); ++i)
            if (trim(header_[i]) == trim(name)) return static_cast<std::ptrdiff_t>(i);
        return -1;
    }

    /// Read the next record. Returns false at end of stream. Rows that
    /// fail to split are returned with ok=false so callers can count them.
    bool next_row(std::vector<std::string_view>& fields, bool& ok) {
        if (!read_line(line_)) return false;
        ++row_number_;
        ok = split_csv_fields(line_, fields);
        return true;
    }

    std::size_t row_number() const { return row_number_; }

    static std::string_view trim(std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    }

private:
    bool read_line(std::string& out) {
        if (!std::getline(in_, out)) return false;
        if (!out.empty() && out.back() == '\r') out.pop_back();
        return true;
    }

    std::istream& in_;
    std::vector<std::string> header_;
    std::string line_;
    std::size_t row_number_ = 0;
};

} // namespace deimos
