#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "discforge/instance.hpp"

namespace discforge {

inline constexpr int kReportSchema = 1;

enum class Algorithm {
  kSpencer,
  kSpencerTight,
  kKomlos,
  kBeckFiala,
  kLll,
  kEllipsoid,
  kLambda,
  kHaarMoments,
};

std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view name);

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kSpencer;

  // Instance: a generator family with its parameters, or a file.
  // Empty family picks the algorithm's default.
  std::string family;
  int n = 64;
  std::optional<int> m;  // rademacher rows; defaults to n
  int s = 8;
  int d = 6;
  bool twist_random = true;
  std::optional<std::filesystem::path> in;    // instance CSV (Q for ellipsoid)
  std::optional<std::filesystem::path> b_in;  // ellipsoid B

  std::vector<std::uint64_t> seeds{1};

  std::optional<double> q, eta, L, eps, tol, rho;
  std::optional<long> t_max;
  std::optional<long> trials;  // haar-moments sample count

  std::optional<std::filesystem::path> out;    // JSON report
  std::optional<std::filesystem::path> trace;  // per-run trace CSV
  bool verify = false;
  bool timings = false;
  unsigned threads = 0;  // 0: DISCFORGE_THREADS or hardware concurrency

  // Throws Error(kInvalidArgument) on out-of-range or inapplicable options.
  void validate() const;
};

struct Report {
  std::string json;  // schema 1, pretty-printed
  int runs = 0;
  int failed_runs = 0;
  bool ok = true;     // every run finished and passed its invariant checks
  int exit_code = 0;  // 0, the first run's error code, or kInvariantViolation
};

// Builds the instance a config describes for one seed.
Instance experiment_instance(const ExperimentConfig& config, std::uint64_t seed);

// Trace path used for `seed`: the configured path itself for a single seed,
// otherwise <stem>.seed<N><ext>.
std::filesystem::path trace_path_for(const std::filesystem::path& base, std::uint64_t seed,
                                     std::size_t seed_count);

// Worker pool size: DISCFORGE_THREADS if set, else hardware concurrency,
// capped by `requested` when nonzero and by the number of jobs.
unsigned worker_count(unsigned requested, std::size_t jobs);

Report run_experiment(const ExperimentConfig& config);

}  // namespace discforge
