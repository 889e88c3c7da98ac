#include "qbm2/csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "qbm2/errors.hpp"

namespace qbm2 {

std::string format_double(double value)
{
    if (value == 0.0) {
        return "0";
    }
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        throw NumericalError("cannot format floating-point value");
    }
    return std::string(buf.data(), end);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out)
    , header_(std::move(header))
{
    for (std::size_t i = 0; i < header_.size(); ++i) {
        out_ << (i ? "," : "") << header_[i];
    }
    out_ << '\n';
}

void CsvWriter::row(std::span<const double> values)
{
    if (values.size() != header_.size()) {
        throw RangeError("csv row has " + std::to_string(values.size()) + " values, header has "
                         + std::to_string(header_.size()));
    }
    buffer_.clear();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            buffer_ += ',';
        }
        buffer_ += format_double(values[i]);
    }
    buffer_ += '\n';
    out_ << buffer_;
}

void CsvWriter::row(std::initializer_list<double> values)
{
    row(std::span<const double>(values.begin(), values.size()));
}

std::size_t CsvTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw RangeError("csv has no column '" + std::string(name) + "'");
}

CsvTable read_csv(std::istream& in)
{
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("csv input is empty");
    }
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) {
            table.header.push_back(cell);
        }
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<double> values;
        values.reserve(table.header.size());
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p <= end) {
            const char* comma = std::find(p, end, ',');
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(p, comma, v);
            if (ec != std::errc{} || ptr != comma) {
                throw ConfigError("csv line " + std::to_string(lineno) + ": not a number");
            }
            values.push_back(v);
            p = comma + 1;
        }
        if (values.size() != table.header.size()) {
            throw ConfigError("csv line " + std::to_string(lineno) + ": expected "
                              + std::to_string(table.header.size()) + " values");
        }
        table.rows.push_back(std::move(values));
    }
    return table;
}

}  // namespace qbm2
