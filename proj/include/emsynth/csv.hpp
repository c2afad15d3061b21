#pragma once

#include "emsynth/types.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace emsynth {

// Shortest decimal representation that round-trips the double. Used for
// every numeric export so runs are byte-reproducible.
std::string format_double(double value);

std::string trim(const std::string& text);
std::vector<std::string> split(const std::string& text, char sep);

// Minimal delimiter-separated reader. UTF-8, '.' decimal separator, first
// non-comment line is the header. Lines starting with '#' are skipped so
// exports can carry a config comment and still round-trip.
class CsvReader {
public:
    CsvReader(std::istream& in, const std::string& name, char delimiter = ',');

    // Opens and reads the whole file.
    static CsvReader from_file(const std::string& path, char delimiter = ',');

    const std::vector<std::string>& header() const { return header_; }
    std::optional<size_t> column_index(const std::string& name) const;
    bool has_column(const std::string& name) const { return column_index(name).has_value(); }

    size_t row_count() const { return rows_.size(); }
    // 1-based line number of a data row in the original file, for error reports.
    size_t line_number(size_t row) const { return line_numbers_[row]; }

    const std::string& cell(size_t row, size_t column) const;
    // Empty cells read as "not present".
    std::optional<std::string> get(size_t row, const std::string& column) const;

    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::vector<std::string> header_;
    std::unordered_map<std::string, size_t> column_lookup_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<size_t> line_numbers_;
};

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out, char delimiter = ',');

    void comment(const std::string& text);  // writes "# text"
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
    char delimiter_;
};

// Typed cell parsers; all throw DomainError with file/line context on bad input.
double parse_double_cell(const std::string& value, const std::string& file, size_t line,
                         const std::string& column);
int parse_int_cell(const std::string& value, const std::string& file, size_t line,
                   const std::string& column);
bool parse_bool_cell(const std::string& value, const std::string& file, size_t line,
                     const std::string& column);

}  // namespace emsynth
