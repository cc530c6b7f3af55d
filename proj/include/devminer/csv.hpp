#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace devminer::csv {

using Row = std::vector<std::string>;

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerated.
/// Throws ParseError with the 1-based line number on an unterminated quote.
std::vector<Row> parse(std::string_view text);

std::vector<Row> read_file(const std::string& path);

/// Quotes the field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const Row& row);

/// Fixed 6-decimal rendering used by every numeric CSV column.
std::string fixed6(double value);

}  // namespace devminer::csv
