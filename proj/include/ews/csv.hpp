#pragma once

/// Minimal CSV writer for experiment outputs.
///
/// Doubles are written with 17 significant digits so that identical runs give
/// byte-identical files; non-finite values are written as nan, inf or -inf.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace ews::io {

using Cell = std::variant<double, long long, std::string>;

std::string format_cell(const Cell& c);

class CsvWriter {
public:
    /// Opens (truncates) the file and writes the header. Throws std::runtime_error
    /// when the file cannot be opened.
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

    /// Writes one row; throws std::invalid_argument on a column count mismatch.
    void row(const std::vector<Cell>& cells);
    std::size_t rows() const { return rows_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_;
    std::size_t rows_ = 0;
};

/// Parses a CSV file written by CsvWriter (no quoting) into a header and rows
/// of strings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// Column position by name; throws std::out_of_range when missing.
    std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace ews::io
