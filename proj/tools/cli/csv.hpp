#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gptcloak::cli {

/// Comma-separated table with a header row, LF line endings and
/// 17-significant-digit numbers.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    std::size_t row_count() const noexcept { return rows_.size(); }
    std::string text() const;

private:
    std::size_t columns_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string csv_number(double v);
/// Empty cell when there is no value.
std::string csv_number(std::optional<double> v);

}  // namespace gptcloak::cli
