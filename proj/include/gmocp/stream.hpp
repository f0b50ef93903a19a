#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmocp {

// Validation / I-O failures on stream and results files; carries enough
// context (path, line) to be actionable from the CLI.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StreamHeader {
  int n_models = 0;
  int n_labels = 0;
  std::int64_t length = 0;
  std::vector<std::string> model_names;
  std::string generator_info;  // JSON text describing the generator; empty for external dumps
};

// One time step: the true label plus each model's probability vector,
// stored row-major (model index major).
struct StreamRecord {
  std::int64_t t = 0;  // 1-based step index
  int label = 0;
  std::vector<double> probs;  // n_models * n_labels

  std::span<const double> model_row(std::size_t model, std::size_t n_labels) const {
    return {probs.data() + model * n_labels, n_labels};
  }
};

struct Stream {
  StreamHeader header;
  std::vector<StreamRecord> records;
};

enum class DriftKind { gradual, abrupt };

// Per-model accuracy trajectories. Gradual drift moves each model's quality
// on a sinusoid around its base; abrupt drift holds quality constant within
// a segment and permutes the model-to-quality assignment between segments.
struct DriftProfile {
  DriftKind kind = DriftKind::gradual;
  int period = 1500;        // sinusoid period in steps (gradual)
  int n_segments = 4;       // quality regimes (abrupt)
  double amplitude = 0.08;  // sinusoid amplitude (gradual)
  std::vector<double> base_quality;  // per-model accuracy level; empty = default pool
};

struct GeneratorConfig {
  int n_models = 8;
  int n_labels = 20;
  std::int64_t length = 3000;
  std::uint64_t seed = 1;
  DriftProfile drift;
};

// Default pool shape: a majority of strong models plus one medium and one
// weak straggler, mirroring a mixed-quality deployment.
std::vector<double> default_base_quality(int n_models);

// Resolved quality trajectories for a generator config (segment permutations
// and label priors are derived deterministically from the seed).
class QualityPlan {
 public:
  QualityPlan(const GeneratorConfig& config);

  double quality(int model, std::int64_t t) const;  // t is 1-based
  std::span<const double> label_prior(std::int64_t t) const;

 private:
  GeneratorConfig config_;
  std::vector<double> base_;
  std::vector<std::vector<std::uint32_t>> segment_perm_;  // abrupt only
  std::vector<std::vector<double>> segment_prior_;        // abrupt only
  std::vector<double> uniform_prior_;
  std::int64_t segment_len_ = 1;
};

// Synthetic drifting stream: per step the true label is drawn from the
// plan's prior and each model emits a probability vector whose argmax hits
// the true label with probability quality_m(t); the remaining mass is
// spread over the other labels with symmetric Dirichlet noise.
Stream generate_stream(const GeneratorConfig& config);

// Line-delimited JSON: header object on the first line, then one record
// object per line. Doubles survive the round trip exactly.
void write_stream(const Stream& stream, const std::string& path);

// Streaming reader; validates every record against the header and reports
// the first violation with its line number.
class StreamReader {
 public:
  explicit StreamReader(const std::string& path);

  const StreamHeader& header() const { return header_; }

  // Fills `out` and returns true, or returns false on a clean end of
  // stream. Throws DataError on malformed or truncated input.
  bool next(StreamRecord& out);

 private:
  std::string path_;
  std::ifstream file_;
  StreamHeader header_;
  std::int64_t records_read_ = 0;
  std::int64_t line_no_ = 1;
};

Stream load_stream(const std::string& path);

}  // namespace gmocp
