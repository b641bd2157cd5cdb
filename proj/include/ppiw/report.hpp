#pragma once

#include <string>
#include <vector>

namespace ppiw {

/// Fixed 6-significant-digit rendering, used by every CSV writer so output
/// is byte-stable across runs.
std::string format_sig6(double value);

/// Minimal aligned text table: first column left-aligned, the rest right.
class TableWriter {
 public:
  explicit TableWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  std::string str() const;

 private:
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace ppiw
