// csv.hpp: self-describing CSV output and two-column CSV input

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cqed::scenario {

/// 12 significant digits, shortest of fixed/scientific ("%.12g").
std::string format_number(double v);

struct Table {
    std::vector<std::string> metadata; // emitted as "# " lines before the header
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::string label_column;        // optional leading text column
    std::vector<std::string> labels; // one per row when label_column is set
    std::vector<std::string> summary; // emitted as "# " lines after the data

    void add_row(std::vector<double> row, std::string label = {});
    std::size_t column(std::string_view name) const;
    std::vector<double> column_values(std::string_view name) const;
};

void write_csv(std::ostream& os, const Table& table);
std::string to_csv(const Table& table);

class CsvError : public std::runtime_error {
public:
    CsvError(std::size_t line, std::size_t column, const std::string& what);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Reads x,y pairs. Blank lines and '#' comments are skipped; a single
/// non-numeric header row before the first data row is allowed.
std::pair<std::vector<double>, std::vector<double>> read_two_columns(std::string_view text);

/// Minimal SVG line chart of `y_columns` against `x_column`.
std::string svg_line_chart(const Table& table, std::string_view x_column,
                           const std::vector<std::string>& y_columns);

} // namespace cqed::scenario
