#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "discforge/error.hpp"
#include "discforge/trace.hpp"

namespace discforge {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string fmt(double v) { return format_real(v); }

std::string join_vector(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += fmt(v(i));
  }
  return s;
}

[[noreturn]] void malformed(int line, const std::string& what) {
  fail(ErrorCode::kMalformedTrace, "trace line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) malformed(line, "bad number '" + s + "'");
  return v;
}

long parse_long(const std::string& s, int line) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) malformed(line, "bad integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

Vec parse_vector(const std::string& s, int line) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (ss >> tok) vals.push_back(parse_double(tok, line));
  return Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace

void write_trace(const WalkTrace& trace, std::ostream& out) {
  out << "# n=" << trace.n << '\n';
  out << "# L=" << fmt(trace.L) << '\n';
  for (const auto& [k, v] : trace.meta) out << "# " << k << '=' << v << '\n';

  std::vector<std::string> columns;
  for (const auto& rec : trace.steps) {
    for (const auto& [name, value] : rec.diagnostics) {
      (void)value;
      if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
    }
  }
  out << "t,step_len,dot_x_delta,frozen";
  for (const auto& c : columns) out << ',' << c;
  out << ",delta\n";

  for (const auto& rec : trace.steps) {
    out << rec.t << ',' << fmt(rec.step) << ',' << fmt(rec.dot_x_delta) << ',';
    for (std::size_t i = 0; i < rec.frozen.size(); ++i) out << (i ? " " : "") << rec.frozen[i];
    for (const auto& c : columns) {
      out << ',';
      for (const auto& [name, value] : rec.diagnostics) {
        if (name == c) {
          out << fmt(value);
          break;
        }
      }
    }
    out << ',';
    for (std::size_t i = 0; i < rec.delta.size(); ++i) {
      out << (i ? " " : "") << rec.delta[i].first << ':' << fmt(rec.delta[i].second);
    }
    out << '\n';
  }
  out << "# x_final=" << join_vector(trace.x_final) << '\n';
  out << "# coloring=" << join_vector(trace.coloring) << '\n';
}

void write_trace(const WalkTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  write_trace(trace, out);
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

WalkTrace read_trace(std::istream& in) {
  WalkTrace trace;
  std::vector<std::string> header;
  std::string line;
  int lineno = 0;
  bool have_n = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      while (!body.empty() && body.front() == ' ') body.erase(body.begin());
      const auto eq = body.find('=');
      if (eq == std::string::npos) malformed(lineno, "metadata without '='");
      const std::string key = body.substr(0, eq);
      const std::string value = body.substr(eq + 1);
      if (key == "n") {
        trace.n = static_cast<int>(parse_long(value, lineno));
        have_n = true;
      } else if (key == "L") {
        trace.L = parse_double(value, lineno);
      } else if (key == "x_final") {
        trace.x_final = parse_vector(value, lineno);
      } else if (key == "coloring") {
        trace.coloring = parse_vector(value, lineno);
      } else {
        trace.meta[key] = value;
      }
      continue;
    }
    if (header.empty()) {
      header = split(line, ',');
      if (header.size() < 5 || header[0] != "t" || header[1] != "step_len" ||
          header[2] != "dot_x_delta" || header[3] != "frozen" || header.back() != "delta") {
        malformed(lineno, "unexpected column header");
      }
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) malformed(lineno, "wrong number of cells");
    StepRecord rec;
    rec.t = parse_long(cells[0], lineno);
    rec.step = parse_double(cells[1], lineno);
    rec.dot_x_delta = parse_double(cells[2], lineno);
    {
      std::stringstream ss(cells[3]);
      std::string tok;
      while (ss >> tok) rec.frozen.push_back(static_cast<int>(parse_long(tok, lineno)));
    }
    for (std::size_t c = 4; c + 1 < header.size(); ++c) {
      if (!cells[c].empty()) rec.diagnostics.emplace_back(header[c], parse_double(cells[c], lineno));
    }
    {
      std::stringstream ss(cells.back());
      std::string tok;
      while (ss >> tok) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) malformed(lineno, "delta entry without ':'");
        rec.delta.emplace_back(static_cast<int>(parse_long(tok.substr(0, colon), lineno)),
                               parse_double(tok.substr(colon + 1), lineno));
      }
    }
    trace.steps.push_back(std::move(rec));
  }
  if (!have_n) malformed(lineno, "missing '# n=' metadata");
  if (header.empty()) malformed(lineno, "missing column header");
  for (const auto& rec : trace.steps) {
    for (const auto& [j, v] : rec.delta) {
      (void)v;
      if (j < 0 || j >= trace.n) malformed(lineno, "delta index out of range");
    }
  }
  return trace;
}

WalkTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return read_trace(in);
}

}  // namespace discforge
