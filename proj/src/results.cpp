#include "gmocp/results.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "gmocp/stream.hpp"

namespace gmocp {

namespace {

constexpr const char* kResultsHeader =
    "method,N,J,seed,coverage,avg_width,runtime_seconds,updates_total,config_hash,stream_hash";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, const std::string& context) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError("bad number '" + text + "' in " + context);
  }
  return value;
}

std::int64_t parse_int(const std::string& text, const std::string& context) {
  std::int64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError("bad integer '" + text + "' in " + context);
  }
  return value;
}

int method_order(const std::string& method) {
  if (method == "mocp") return 0;  // baseline first, matching the usual table layout
  if (method == "gmocp") return 1;
  return 2;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string config_hash(const RunConfig& config) {
  std::string canon;
  canon += "method=" + method_name(config.method);
  canon += ";model=" + std::to_string(config.model_index);
  canon += ";alpha=" + format_double(config.alpha_target);
  canon += ";eta=" + format_double(config.eta);
  canon += ";epsilon=" + format_double(config.epsilon);
  canon += ";eta_e=" + format_double(config.eta_e);
  canon += ";N=" + std::to_string(config.n_trials);
  canon += ";J=" + std::to_string(config.n_selective);
  canon += ";xi=" + format_double(config.score.xi);
  canon += ";k_reg=" + std::to_string(config.score.k_reg);
  canon += ";warmup=" + std::to_string(config.warmup);
  return hash_hex(fnv1a64(canon.data(), canon.size()));
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for hashing: " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const auto got = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
    if (in.eof()) break;
  }
  return hash_hex(hash);
}

ResultRow make_result_row(const RunReport& report, const std::string& stream_hash) {
  ResultRow row;
  row.method = method_name(report.config.method);
  row.n_trials = report.config.n_trials;
  row.n_selective = report.config.n_selective;
  row.seed = report.config.seed;
  row.coverage = report.coverage;
  row.avg_width = report.avg_width;
  row.runtime_seconds = report.runtime_seconds;
  row.updates_total = report.updates_total;
  row.config_hash = config_hash(report.config);
  row.stream_hash = stream_hash;
  return row;
}

void append_results(const std::string& path, const std::vector<ResultRow>& rows) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot open results file for writing: " + path);
  if (fresh) out << kResultsHeader << '\n';
  for (const ResultRow& row : rows) {
    out << row.method << ',' << row.n_trials << ',' << row.n_selective << ',' << row.seed << ','
        << format_double(row.coverage) << ',' << format_double(row.avg_width) << ','
        << format_double(row.runtime_seconds) << ',' << row.updates_total << ','
        << row.config_hash << ',' << row.stream_hash << '\n';
  }
  if (!out) throw DataError("write failure on results file: " + path);
}

std::vector<ResultRow> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open results file: " + path);
  std::string line;
  if (!std::getline(in, line)) return {};
  if (line != kResultsHeader) throw DataError(path + ": unexpected results header");
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    const std::string ctx = path + ":" + std::to_string(line_no);
    if (f.size() != 10) throw DataError(ctx + ": expected 10 columns");
    ResultRow row;
    row.method = f[0];
    row.n_trials = static_cast<int>(parse_int(f[1], ctx));
    row.n_selective = static_cast<int>(parse_int(f[2], ctx));
    row.seed = static_cast<std::uint64_t>(parse_int(f[3], ctx));
    row.coverage = parse_double(f[4], ctx);
    row.avg_width = parse_double(f[5], ctx);
    row.runtime_seconds = parse_double(f[6], ctx);
    row.updates_total = parse_int(f[7], ctx);
    row.config_hash = f[8];
    row.stream_hash = f[9];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<GroupStats> aggregate_results(const std::vector<ResultRow>& rows) {
  if (rows.empty()) return {};
  for (const ResultRow& row : rows) {
    if (row.stream_hash != rows.front().stream_hash) {
      throw DataError("refusing to aggregate rows produced from different streams (hash " +
                      row.stream_hash + " vs " + rows.front().stream_hash + ")");
    }
  }
  struct Acc {
    std::vector<double> coverage, width, runtime;
    std::string config_hash;
  };
  std::map<std::tuple<int, std::string, int, int>, Acc> groups;
  for (const ResultRow& row : rows) {
    const auto key = std::make_tuple(method_order(row.method), row.method, row.n_trials,
                                     row.n_selective);
    Acc& acc = groups[key];
    if (acc.coverage.empty()) {
      acc.config_hash = row.config_hash;
    } else if (acc.config_hash != row.config_hash) {
      throw DataError("group " + row.method + " N=" + std::to_string(row.n_trials) +
                      " J=" + std::to_string(row.n_selective) + " mixes configurations");
    }
    acc.coverage.push_back(row.coverage);
    acc.width.push_back(row.avg_width);
    acc.runtime.push_back(row.runtime_seconds);
  }

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto std_of = [&](const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };

  std::vector<GroupStats> out;
  for (const auto& [key, acc] : groups) {
    GroupStats g;
    g.key = GroupKey{std::get<1>(key), std::get<2>(key), std::get<3>(key)};
    g.runs = acc.coverage.size();
    g.coverage_mean = mean_of(acc.coverage);
    g.coverage_std = std_of(acc.coverage, g.coverage_mean);
    g.width_mean = mean_of(acc.width);
    g.width_std = std_of(acc.width, g.width_mean);
    g.runtime_mean = mean_of(acc.runtime);
    g.runtime_std = std_of(acc.runtime, g.runtime_mean);
    out.push_back(std::move(g));
  }
  return out;
}

std::string format_mean_std(double mean, double std, int decimals) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.*f ± %.*f", decimals, mean, decimals, std);
  return buf;
}

void write_per_step_log(const std::string& path, const RunReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open per-step log for writing: " + path);
  out << "t,chosen_model,set_size,covered,updates_performed,alpha_of_chosen\n";
  for (const StepOutcome& step : report.per_step) {
    out << step.t << ',' << step.chosen_model << ',' << step.set_size << ','
        << (step.covered ? 1 : 0) << ',' << step.updates_performed << ','
        << format_double(step.alpha_of_chosen) << '\n';
  }
  if (!out) throw DataError("write failure on per-step log: " + path);
}

std::vector<PerStepRow> read_per_step_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open per-step log: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty per-step log");
  std::vector<PerStepRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    const std::string ctx = path + ":" + std::to_string(line_no);
    if (f.size() != 6) throw DataError(ctx + ": expected 6 columns");
    PerStepRow row;
    row.t = parse_int(f[0], ctx);
    row.chosen_model = static_cast<int>(parse_int(f[1], ctx));
    row.set_size = static_cast<int>(parse_int(f[2], ctx));
    row.covered = parse_int(f[3], ctx) != 0;
    row.updates_performed = static_cast<int>(parse_int(f[4], ctx));
    row.alpha_of_chosen = parse_double(f[5], ctx);
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> rolling_coverage(const std::vector<PerStepRow>& rows, std::size_t window) {
  if (window == 0) throw std::invalid_argument("rolling_coverage: window must be >= 1");
  std::vector<double> out(rows.size());
  double in_window = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    in_window += rows[i].covered ? 1.0 : 0.0;
    if (i >= window) in_window -= rows[i - window].covered ? 1.0 : 0.0;
    const double denom = static_cast<double>(std::min(i + 1, window));
    out[i] = in_window / denom;
  }
  return out;
}

void write_rolling_coverage(const std::string& path, const std::vector<PerStepRow>& rows,
                            std::size_t window) {
  const std::vector<double> rc = rolling_coverage(rows, window);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open rolling-coverage file for writing: " + path);
  out << "t,rolling_coverage,set_size\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i].t << ',' << format_double(rc[i]) << ',' << rows[i].set_size << '\n';
  }
  if (!out) throw DataError("write failure on rolling-coverage file: " + path);
}

}  // namespace gmocp
