#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "discforge/error.hpp"
#include "discforge/instance.hpp"

namespace discforge {

namespace fs = std::filesystem;
using json = nlohmann::json;

fs::path meta_path_for(const fs::path& csv_path) {
  fs::path meta = csv_path;
  meta.replace_extension(".meta.json");
  return meta;
}

void write_matrix_csv(const Mat& m, const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

Mat read_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == cell.c_str() || (end && *end != '\0')) {
        fail(ErrorCode::kIo, path.string() + ":" + std::to_string(lineno) + ": bad number '" +
                                 cell + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(ErrorCode::kIo, path.string() + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::kIo, "'" + path.string() + "' holds no matrix");
  Mat m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void save_instance(const Instance& inst, const fs::path& csv_path) {
  inst.validate();
  write_matrix_csv(inst.entries, csv_path);
  json meta = {
      {"family", std::string(to_string(inst.family))},
      {"m", inst.rows()},
      {"n", inst.cols()},
      {"seed", inst.seed},
      {"col_norm_bound", inst.col_norm_bound},
      {"col_sparsity", inst.col_sparsity ? json(*inst.col_sparsity) : json(nullptr)},
  };
  std::ofstream out(meta_path_for(csv_path));
  if (!out) fail(ErrorCode::kIo, "cannot write metadata for '" + csv_path.string() + "'");
  out << meta.dump(2) << '\n';
}

Instance load_instance(const fs::path& csv_path) {
  Mat entries = read_matrix_csv(csv_path);
  const fs::path meta_path = meta_path_for(csv_path);
  if (!fs::exists(meta_path)) return make_instance(std::move(entries));

  json meta;
  try {
    std::ifstream in(meta_path);
    meta = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kIo, "bad metadata '" + meta_path.string() + "': " + e.what());
  }
  Instance inst;
  try {
    if (meta.at("m").get<int>() != entries.rows() || meta.at("n").get<int>() != entries.cols()) {
      fail(ErrorCode::kInvalidInstance, "metadata shape does not match '" + csv_path.string() + "'");
    }
    inst.family = family_from_string(meta.at("family").get<std::string>());
    inst.seed = meta.value("seed", std::uint64_t{0});
    inst.col_norm_bound = meta.at("col_norm_bound").get<double>();
    if (meta.contains("col_sparsity") && !meta["col_sparsity"].is_null()) {
      inst.col_sparsity = meta["col_sparsity"].get<int>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kIo, "bad metadata '" + meta_path.string() + "': " + e.what());
  }
  inst.entries = std::move(entries);
  inst.validate();
  return inst;
}

}  // namespace discforge
