// SPDX-License-Identifier: Apache-2.0

#ifndef PLASMHOM_IO_HPP
#define PLASMHOM_IO_HPP

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "plasmhom/cellsolver.hpp"

namespace plasmhom {

/// Full-precision decimal rendering (17 significant digits).
inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_full(Complex v) {
  return format_full(v.real()) + "," + format_full(v.imag());
}

/// Comma-separated table: comment lines first (prefixed '#'), then the
/// header row, then data rows.
struct CsvTable {
  std::vector<std::string> comments;
  std::string header;
  std::vector<std::string> rows;

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    for (const auto& c : comments) out << "# " << c << "\n";
    out << header << "\n";
    for (const auto& r : rows) out << r << "\n";
    if (!out) throw std::runtime_error("write failure on " + path);
  }
};

/// Coordinate-triplet dump (row, col, re, im) of the assembled system
/// for external-solver cross-checks.
inline void dump_sparse_system(const CellSystem& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << "row,col,re,im\n";
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (SparseC::InnerIterator it(sys.A, k); it; ++it)
      out << it.row() << "," << it.col() << "," << format_full(it.value().real())
          << "," << format_full(it.value().imag()) << "\n";
}

/// FNV-1a 64-bit hash, used to stamp outputs with their config.
inline std::string content_hash(const std::string& text) {
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", h);
  return buf;
}

}  // namespace plasmhom

#endif  // PLASMHOM_IO_HPP
