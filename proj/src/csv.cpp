#include "minatt/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "minatt/types.hpp"

namespace minatt::csv {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

void write_row(std::ostream& os, const std::vector<double>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << format_number(cells[i]);
  }
  os << '\n';
}

void write_comment(std::ostream& os, const std::string& text) {
  os << "# " << text << '\n';
}

std::vector<std::vector<double>> read_numeric(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      double value = 0.0;
      const auto res =
          std::from_chars(line.data() + start, line.data() + end, value);
      if (res.ec != std::errc() || res.ptr != line.data() + end) {
        throw Error("CSV: malformed number in line '" + line + "'");
      }
      row.push_back(value);
      start = end + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace minatt::csv
