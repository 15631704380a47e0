#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "discforge/walk.hpp"

namespace discforge {

// 17 significant digits, the precision every file format here uses.
std::string format_real(double v);

// CSV layout:
//   # key=value            (metadata, any number of lines)
//   t,step_len,dot_x_delta,frozen,<diagnostic columns...>,delta
//   one row per step; `frozen` and `delta` are space-separated lists
//   (indices, and j:value pairs respectively)
//   # x_final=v0 v1 ...    (partial coloring before rounding)
//   # coloring=...
// Reals use 17 significant digits so a replay reproduces x exactly.
void write_trace(const WalkTrace& trace, std::ostream& out);
void write_trace(const WalkTrace& trace, const std::filesystem::path& path);

// Throws Error(kMalformedTrace) on any structural problem.
WalkTrace read_trace(std::istream& in);
WalkTrace read_trace(const std::filesystem::path& path);

}  // namespace discforge
