#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace microagg::csv {

/// Reads one CSV record (RFC-4180: quoted fields, embedded commas/newlines,
/// doubled quotes, CRLF line ends). Returns false at end of stream.
bool read_record(std::istream& in, std::vector<std::string>& fields);

/// Quotes a field if it contains a comma, quote, or newline.
std::string escape_field(const std::string& field);

void write_record(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest round-trip decimal rendering of a double (via std::to_chars).
std::string format_double(double value);

}  // namespace microagg::csv
