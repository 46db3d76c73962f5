#pragma once

#include <iosfwd>
#include <string>
#include <vector>

// Minimal CSV helpers: LF line endings, shortest round-trip number format,
// '#' comment lines ignored on read.
namespace minatt::csv {

std::string format_number(double v);

void write_row(std::ostream& os, const std::vector<std::string>& cells);
void write_row(std::ostream& os, const std::vector<double>& cells);
void write_comment(std::ostream& os, const std::string& text);

// Numeric rows after the first non-comment (header) line.
std::vector<std::vector<double>> read_numeric(std::istream& is);

}  // namespace minatt::csv
