#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridgame {

/** Minimal CSV writer with a fixed, locale-independent number format so that
 *  reruns with the same seed produce byte-identical files. */
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
    columns_ = header.size();
    write_row_raw(header);
  }

  static std::string format(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
  }
  static std::string format(int x) { return std::to_string(x); }
  static std::string format(long x) { return std::to_string(x); }
  static std::string format(long long x) { return std::to_string(x); }
  static std::string format(std::size_t x) { return std::to_string(x); }

  void write_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_)
      throw std::logic_error("csv row has " + std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(columns_));
    write_row_raw(cells);
  }

 private:
  void write_row_raw(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
  std::size_t columns_ = 0;
};

}  // namespace gridgame
