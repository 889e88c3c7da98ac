#pragma once

#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qbm2 {

// Shortest decimal text that parses back to the same double. Both zeros print as 0.
std::string format_double(double value);

// Comma-separated writer with a fixed header; every row must match its width.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);

    void row(std::span<const double> values);
    void row(std::initializer_list<double> values);

    std::size_t columns() const noexcept { return header_.size(); }

private:
    std::ostream& out_;
    std::vector<std::string> header_;
    std::string buffer_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    // Index of a named column; throws RangeError if absent.
    std::size_t column(std::string_view name) const;
};

// Numeric CSV with one header line. Throws ConfigError on malformed input.
CsvTable read_csv(std::istream& in);

}  // namespace qbm2
