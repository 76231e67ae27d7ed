#include "cqed/scenario/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace cqed::scenario {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void Table::add_row(std::vector<double> row, std::string label) {
    if (row.size() != columns.size())
        throw std::invalid_argument("Table: row width differs from column count");
    rows.push_back(std::move(row));
    if (!label_column.empty())
        labels.push_back(std::move(label));
}

std::size_t Table::column(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end())
        throw std::out_of_range("Table: no column " + std::string(name));
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::column_values(std::string_view name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back(r[c]);
    return out;
}

void write_csv(std::ostream& os, const Table& table) {
    for (const auto& m : table.metadata)
        os << "# " << m << '\n';
    const bool labelled = !table.label_column.empty();
    if (labelled)
        os << table.label_column << ',';
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        os << (c ? "," : "") << table.columns[c];
    os << '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (labelled)
            os << table.labels[r] << ',';
        for (std::size_t c = 0; c < row.size(); ++c)
            os << (c ? "," : "") << format_number(row[c]);
        os << '\n';
    }
    for (const auto& s : table.summary)
        os << "# " << s << '\n';
}

std::string to_csv(const Table& table) {
    std::ostringstream os;
    write_csv(os, table);
    return os.str();
}

namespace {

std::string csv_message(std::size_t line, std::size_t column, const std::string& what) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_number(std::string_view field, double& out) {
    field = trim(field);
    if (field.empty())
        return false;
    if (field.front() == '+')
        field.remove_prefix(1);
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

} // namespace

CsvError::CsvError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error(csv_message(line, column, what)), line_(line), column_(column) {}

std::pair<std::vector<double>, std::vector<double>> read_two_columns(std::string_view text) {
    std::vector<double> xs, ys;
    bool header_allowed = true;
    std::size_t line_no = 0;
    for (std::size_t pos = 0; pos <= text.size();) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        line = trim(line);
        if (line.empty() || line.front() == '#')
            continue;

        std::vector<std::string_view> fields;
        for (std::size_t start = 0;;) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }

        double x = 0.0, y = 0.0;
        const bool x_ok = parse_number(fields[0], x);
        if (header_allowed && !x_ok) {
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        if (fields.size() != 2)
            throw CsvError(line_no, std::min<std::size_t>(fields.size(), 3),
                           "expected 2 columns, found " + std::to_string(fields.size()));
        if (!x_ok)
            throw CsvError(line_no, 1, "not a number: '" + std::string(trim(fields[0])) + "'");
        if (!parse_number(fields[1], y))
            throw CsvError(line_no, 2, "not a number: '" + std::string(trim(fields[1])) + "'");
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.empty())
        throw CsvError(line_no, 0, "no data rows");
    return {std::move(xs), std::move(ys)};
}

std::string svg_line_chart(const Table& table, std::string_view x_column,
                           const std::vector<std::string>& y_columns) {
    constexpr double width = 640, height = 400, margin = 50;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    const auto xs = table.column_values(x_column);
    if (xs.size() < 2)
        throw std::invalid_argument("svg_line_chart: need at least two rows");
    double xmin = *std::min_element(xs.begin(), xs.end());
    double xmax = *std::max_element(xs.begin(), xs.end());
    double ymin = INFINITY, ymax = -INFINITY;
    std::vector<std::vector<double>> series;
    for (const auto& name : y_columns) {
        series.push_back(table.column_values(name));
        for (double v : series.back()) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (xmax == xmin)
        xmax = xmin + 1.0;
    if (ymax == ymin)
        ymax = ymin + 1.0;

    auto px = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
    auto py = [&](double y) {
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\">\n";
    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
       << "\" height=\"" << height - 2 * margin << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 10
       << "\" text-anchor=\"middle\" font-size=\"12\">" << x_column << " [" << format_number(xmin)
       << ", " << format_number(xmax) << "]</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % std::size(colors)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i)
            os << format_number(px(xs[i])) << ',' << format_number(py(series[s][i])) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << margin + 5 << "\" y=\"" << margin + 15 + 14 * s << "\" fill=\""
           << color << "\" font-size=\"12\">" << y_columns[s] << "</text>\n";
    }
    os << "<text x=\"5\" y=\"" << margin - 10 << "\" font-size=\"12\">y [" << format_number(ymin)
       << ", " << format_number(ymax) << "]</text>\n";
    os << "</svg>\n";
    return os.str();
}

} // namespace cqed::scenario
