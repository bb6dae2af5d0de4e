#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "phasecrystal/errors.hpp"
#include "phasecrystal/grid.hpp"

namespace phasecrystal::io {

/// Fixed 12-significant-digit rendering used by every CSV writer, so that
/// identical runs produce byte-identical files.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string fmt(int v) { return std::to_string(v); }

/// Grid as CSV rows "X,P,value" (or any caller-provided column names).
inline std::string grid_csv(const Grid2D& g, const std::string& header = "X,P,value") {
  std::string out = header + "\n";
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j)
      out += fmt(g.xs[i]) + "," + fmt(g.ys[j]) + "," + fmt(g.at(i, j)) + "\n";
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(content.data(), (std::streamsize)content.size());
  if (!f) throw Error("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace phasecrystal::io
