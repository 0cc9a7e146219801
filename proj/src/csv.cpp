#include "risim/csv.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "risim/errors.hpp"

namespace risim {

namespace {

// Commas and quotes never appear in our cells; keep the quoting rule anyway
// so a stray label cannot corrupt the file.
std::string escape_cell(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string quoted = "\"";
    for (char c : cell) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

}  // namespace

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns,
                     const std::vector<std::pair<std::string, std::string>>& metadata)
    : path_(path), columns_(columns.size()) {
    if (columns.empty()) throw std::invalid_argument("csv: need at least one column");
    out_.open(path);
    if (!out_) throw ValidationError("cannot write csv file: " + path);
    for (const auto& [key, value] : metadata) out_ << "# " << key << " " << value << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i > 0) out_ << ",";
        out_ << escape_cell(columns[i]);
    }
    out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_)
        throw std::invalid_argument("csv: row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out_ << ",";
        out_ << escape_cell(cells[i]);
    }
    out_ << "\n";
}

void CsvWriter::close() {
    out_.flush();
    if (!out_) throw ValidationError("write failed for csv file: " + path_);
    out_.close();
}

std::string CsvWriter::num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string CsvWriter::num(int v) { return std::to_string(v); }

std::string CsvWriter::num(std::uint64_t v) { return std::to_string(v); }

}  // namespace risim
