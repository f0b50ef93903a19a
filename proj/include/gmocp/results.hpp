#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmocp/engine.hpp"

namespace gmocp {

// One results-table row. Column order is fixed:
// method,N,J,seed,coverage,avg_width,runtime_seconds,updates_total,config_hash,stream_hash
struct ResultRow {
  std::string method;
  int n_trials = 0;
  int n_selective = 0;
  std::uint64_t seed = 0;
  double coverage = 0.0;
  double avg_width = 0.0;
  double runtime_seconds = 0.0;
  std::int64_t updates_total = 0;
  std::string config_hash;
  std::string stream_hash;
};

ResultRow make_result_row(const RunReport& report, const std::string& stream_hash);

// Appends rows, writing the header only when the file is new or empty.
void append_results(const std::string& path, const std::vector<ResultRow>& rows);

std::vector<ResultRow> read_results(const std::string& path);

// Shortest round-trip decimal form of a double (exact reload).
std::string format_double(double value);

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string hash_hex(std::uint64_t hash);

// Hash of a run configuration minus the seed (the seed has its own column).
std::string config_hash(const RunConfig& config);

// Hash of a file's bytes.
std::string hash_file(const std::string& path);

struct GroupKey {
  std::string method;
  int n_trials = 0;
  int n_selective = 0;

  bool operator==(const GroupKey&) const = default;
};

struct GroupStats {
  GroupKey key;
  std::size_t runs = 0;
  double coverage_mean = 0.0, coverage_std = 0.0;
  double width_mean = 0.0, width_std = 0.0;
  double runtime_mean = 0.0, runtime_std = 0.0;
};

// Groups rows by (method, N, J), baseline methods first, then by (N, J).
// Faults when rows span different streams or a group mixes configurations.
std::vector<GroupStats> aggregate_results(const std::vector<ResultRow>& rows);

// "89.24 ± 0.12"-style cell.
std::string format_mean_std(double mean, double std, int decimals);

// Per-step log: t,chosen_model,set_size,covered,updates_performed,alpha_of_chosen.
void write_per_step_log(const std::string& path, const RunReport& report);

struct PerStepRow {
  std::int64_t t = 0;
  int chosen_model = 0;
  int set_size = 0;
  bool covered = false;
  int updates_performed = 0;
  double alpha_of_chosen = 0.0;
};

std::vector<PerStepRow> read_per_step_log(const std::string& path);

// Trailing-window mean of the covered flag, one value per step.
std::vector<double> rolling_coverage(const std::vector<PerStepRow>& rows, std::size_t window);

void write_rolling_coverage(const std::string& path, const std::vector<PerStepRow>& rows,
                            std::size_t window);

}  // namespace gmocp
