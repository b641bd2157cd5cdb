#include "ppiw/report.hpp"

#include <algorithm>
#include <cstdio>

namespace ppiw {

std::string format_sig6(double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

TableWriter::TableWriter(std::vector<std::string> header) {
  rows_.push_back(std::move(header));
}

void TableWriter::add_row(std::vector<std::string> cells) {
  rows_.push_back(std::move(cells));
}

std::string TableWriter::str() const {
  std::vector<size_t> width;
  for (const auto& row : rows_) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows_) {
    for (size_t c = 0; c < row.size(); ++c) {
      const size_t pad = width[c] - row[c].size();
      if (c == 0) {
        out += row[c] + std::string(pad, ' ');
      } else {
        out += "  " + std::string(pad, ' ') + row[c];
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace ppiw
