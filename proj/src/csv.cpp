#include "emsynth/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace emsynth {

std::string format_double(double value)
{
    if (value == 0.0) {
        value = 0.0;  // normalize -0
    }
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        return "0";
    }
    return std::string(buf, ptr);
}

std::string trim(const std::string& text)
{
    size_t begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return {};
    }
    size_t end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> parts;
    std::string current;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(current);
    return parts;
}

CsvReader::CsvReader(std::istream& in, const std::string& name, char delimiter)
    : name_(name)
{
    std::string line;
    size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto cells = split(line, delimiter);
        for (auto& cell : cells) {
            cell = trim(cell);
        }
        if (!have_header) {
            header_ = cells;
            for (size_t i = 0; i < header_.size(); ++i) {
                column_lookup_.emplace(header_[i], i);
            }
            have_header = true;
            continue;
        }
        if (cells.size() != header_.size()) {
            throw DomainError(name_ + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header_.size()) + " columns, got " +
                              std::to_string(cells.size()));
        }
        rows_.push_back(std::move(cells));
        line_numbers_.push_back(line_no);
    }
    if (!have_header) {
        throw DomainError(name_ + ": missing header line");
    }
}

CsvReader CsvReader::from_file(const std::string& path, char delimiter)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    return CsvReader(in, path, delimiter);
}

std::optional<size_t> CsvReader::column_index(const std::string& name) const
{
    auto it = column_lookup_.find(name);
    if (it == column_lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const std::string& CsvReader::cell(size_t row, size_t column) const
{
    return rows_.at(row).at(column);
}

std::optional<std::string> CsvReader::get(size_t row, const std::string& column) const
{
    auto idx = column_index(column);
    if (!idx) {
        return std::nullopt;
    }
    const std::string& value = rows_.at(row)[*idx];
    if (value.empty()) {
        return std::nullopt;
    }
    return value;
}

CsvWriter::CsvWriter(std::ostream& out, char delimiter)
    : out_(out), delimiter_(delimiter)
{
}

void CsvWriter::comment(const std::string& text)
{
    out_ << "# " << text << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells)
{
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            out_ << delimiter_;
        }
        out_ << cells[i];
    }
    out_ << "\n";
}

double parse_double_cell(const std::string& value, const std::string& file, size_t line,
                         const std::string& column)
{
    double result = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), result);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw DomainError(file + ":" + std::to_string(line) + ": column '" + column +
                          "': not a number: '" + value + "'");
    }
    return result;
}

int parse_int_cell(const std::string& value, const std::string& file, size_t line,
                   const std::string& column)
{
    int result = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), result);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw DomainError(file + ":" + std::to_string(line) + ": column '" + column +
                          "': not an integer: '" + value + "'");
    }
    return result;
}

bool parse_bool_cell(const std::string& value, const std::string& file, size_t line,
                     const std::string& column)
{
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    throw DomainError(file + ":" + std::to_string(line) + ": column '" + column +
                      "': not a boolean: '" + value + "'");
}

}  // namespace emsynth
