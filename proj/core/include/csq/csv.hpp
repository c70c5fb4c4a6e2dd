#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace csq {

// Minimal RFC-4180-ish CSV support: quoted fields with embedded commas,
// quotes and newlines; no multi-character delimiters.
struct CsvReader {
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Reads one record; returns std::nullopt at end of input.
    std::optional<std::vector<std::string>> next();

    // 1-based line number of the record last returned.
    long line() const { return line_; }

private:
    std::istream& in_;
    long line_ = 0;
    long cursor_line_ = 1;
};

std::string csv_quote(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);

}  // namespace csq
