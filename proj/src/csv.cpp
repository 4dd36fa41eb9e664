#include "ews/csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ews::io {

std::string format_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        if (std::isnan(*d)) return "nan";
        if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        return buf;
    }
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\n\"") != std::string::npos) throw std::invalid_argument("CSV text cell needs quoting: " + s);
    return s;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), out_(path, std::ios::trunc), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    if (header.empty()) throw std::invalid_argument("CSV header is empty");
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << format_cell(header[k]);
    out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) throw std::invalid_argument("CSV row has the wrong number of columns");
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << format_cell(cells[k]);
    out_ << '\n';
    if (!out_) throw std::runtime_error("write failed on " + path_.string());
    ++rows_;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    throw std::out_of_range("no CSV column " + name);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV file " + path.string());
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto r = split(line);
        if (r.size() != t.header.size()) throw std::runtime_error("ragged CSV row in " + path.string());
        t.rows.push_back(std::move(r));
    }
    return t;
}

}  // namespace ews::io
