#pragma once

#include <string>
#include <vector>

namespace scoot {

// Minimal CSV table with fixed 6-significant-digit formatting and a
// full-precision sidecar. Byte-identical output for identical inputs.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

    static std::string cell(double v);      // %.6g
    static std::string cell_full(double v); // %.17g

    std::string to_string() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace scoot
