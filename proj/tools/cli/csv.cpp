#include "cli/csv.hpp"

#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace gptcloak::cli {

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()), header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_) throw std::logic_error("csv row width does not match header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::text() const {
    std::string out = fmt::format("{}\n", fmt::join(header_, ","));
    for (const auto& row : rows_) out += fmt::format("{}\n", fmt::join(row, ","));
    return out;
}

std::string csv_number(double v) { return fmt::format("{:.17g}", v); }

std::string csv_number(std::optional<double> v) { return v ? csv_number(*v) : std::string{}; }

}  // namespace gptcloak::cli
