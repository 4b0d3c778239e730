#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace comet::csv {

// RFC 4180-style row parser: quoted fields, embedded commas/quotes/newlines.
// Returns false on EOF before any character of a new row.
bool read_row(std::istream& in, std::vector<std::string>& fields);

std::string escape(const std::string& field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

} // namespace comet::csv
