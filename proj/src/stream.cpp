#include "gmocp/stream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "gmocp/conformal.hpp"
#include "gmocp/rng.hpp"
#include "json.hpp"

namespace gmocp {

namespace {

using nlohmann::json;

constexpr double kQualityFloor = 5e-4;
constexpr double kQualityCeil = 1.0 - 5e-4;

// Fisher-Yates with explicit engine draws; std::shuffle's draw sequence is
// implementation-defined.
void shuffle_indices(std::vector<std::uint32_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

void validate_generator_config(const GeneratorConfig& config, std::span<const double> base) {
  if (config.n_models < 1) throw DataError("generator: n_models must be >= 1");
  if (config.n_labels < 2) throw DataError("generator: n_labels must be >= 2");
  if (config.length < 1) throw DataError("generator: length must be >= 1");
  if (base.size() != static_cast<std::size_t>(config.n_models)) {
    throw DataError("generator: base_quality size does not match n_models");
  }
  for (double q : base) {
    if (!(q > 0.0 && q < 1.0)) throw DataError("generator: quality levels must lie in (0,1)");
  }
  const DriftProfile& drift = config.drift;
  if (drift.kind == DriftKind::gradual && drift.period < 2) {
    throw DataError("generator: gradual drift needs period >= 2");
  }
  if (drift.kind == DriftKind::abrupt && drift.n_segments < 1) {
    throw DataError("generator: abrupt drift needs n_segments >= 1");
  }
  if (!(drift.amplitude >= 0.0 && drift.amplitude < 1.0)) {
    throw DataError("generator: amplitude outside [0,1)");
  }
  const double chance = 1.0 / static_cast<double>(config.n_labels);
  double best = 0.0;
  for (double q : base) {
    const double reach = drift.kind == DriftKind::gradual ? q + drift.amplitude : q;
    best = std::max(best, reach);
  }
  if (best <= chance) {
    throw DataError("generator: every model quality is at or below chance level; stream would be uninformative");
  }
}

json generator_metadata(const GeneratorConfig& config, std::span<const double> base) {
  json meta;
  meta["drift"] = config.drift.kind == DriftKind::gradual ? "gradual" : "abrupt";
  meta["seed"] = config.seed;
  if (config.drift.kind == DriftKind::gradual) {
    meta["period"] = config.drift.period;
    meta["amplitude"] = config.drift.amplitude;
  } else {
    meta["segments"] = config.drift.n_segments;
  }
  meta["base_quality"] = std::vector<double>(base.begin(), base.end());
  return meta;
}

}  // namespace

std::vector<double> default_base_quality(int n_models) {
  std::vector<double> base(static_cast<std::size_t>(std::max(n_models, 0)), 0.75);
  if (n_models >= 2) base[base.size() - 1] = 0.15;
  if (n_models >= 3) base[base.size() - 2] = 0.45;
  return base;
}

QualityPlan::QualityPlan(const GeneratorConfig& config) : config_(config) {
  base_ = config.drift.base_quality.empty() ? default_base_quality(config.n_models)
                                            : config.drift.base_quality;
  validate_generator_config(config, base_);
  uniform_prior_.assign(static_cast<std::size_t>(config.n_labels),
                        1.0 / static_cast<double>(config.n_labels));
  if (config.drift.kind != DriftKind::abrupt) return;

  segment_len_ = (config.length + config.drift.n_segments - 1) / config.drift.n_segments;
  std::mt19937_64 plan_rng(mix64(config.seed ^ 0x73656773ULL));
  const int k = config.n_labels;
  std::vector<double> tilt(static_cast<std::size_t>(k));
  double tilt_sum = 0.0;
  for (int i = 0; i < k; ++i) {
    tilt[static_cast<std::size_t>(i)] = 1.0 + static_cast<double>(i) / static_cast<double>(k - 1);
    tilt_sum += tilt[static_cast<std::size_t>(i)];
  }
  for (double& p : tilt) p /= tilt_sum;

  segment_perm_.resize(static_cast<std::size_t>(config.drift.n_segments));
  segment_prior_.resize(static_cast<std::size_t>(config.drift.n_segments));
  for (int s = 0; s < config.drift.n_segments; ++s) {
    std::vector<std::uint32_t> model_perm(static_cast<std::size_t>(config.n_models));
    for (std::size_t i = 0; i < model_perm.size(); ++i) model_perm[i] = static_cast<std::uint32_t>(i);
    shuffle_indices(model_perm, plan_rng);
    segment_perm_[static_cast<std::size_t>(s)] = std::move(model_perm);

    std::vector<std::uint32_t> label_perm(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < label_perm.size(); ++i) label_perm[i] = static_cast<std::uint32_t>(i);
    shuffle_indices(label_perm, plan_rng);
    std::vector<double> prior(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) prior[static_cast<std::size_t>(i)] = tilt[label_perm[static_cast<std::size_t>(i)]];
    segment_prior_[static_cast<std::size_t>(s)] = std::move(prior);
  }
}

double QualityPlan::quality(int model, std::int64_t t) const {
  const DriftProfile& drift = config_.drift;
  if (drift.kind == DriftKind::gradual) {
    const double phase =
        2.0 * M_PI * static_cast<double>(model) / static_cast<double>(config_.n_models);
    const double wave =
        std::sin(2.0 * M_PI * static_cast<double>(t) / static_cast<double>(drift.period) + phase);
    return std::clamp(base_[static_cast<std::size_t>(model)] + drift.amplitude * wave,
                      kQualityFloor, kQualityCeil);
  }
  const auto seg = static_cast<std::size_t>(
      std::min<std::int64_t>((t - 1) / segment_len_, drift.n_segments - 1));
  return base_[segment_perm_[seg][static_cast<std::size_t>(model)]];
}

std::span<const double> QualityPlan::label_prior(std::int64_t t) const {
  if (config_.drift.kind == DriftKind::gradual) return uniform_prior_;
  const auto seg = static_cast<std::size_t>(
      std::min<std::int64_t>((t - 1) / segment_len_, config_.drift.n_segments - 1));
  return segment_prior_[seg];
}

Stream generate_stream(const GeneratorConfig& config) {
  const QualityPlan plan(config);
  const int m = config.n_models;
  const int k = config.n_labels;
  std::mt19937_64 rng = make_rng(config.seed, RngStream::data_gen);

  Stream stream;
  stream.header.n_models = m;
  stream.header.n_labels = k;
  stream.header.length = config.length;
  for (int i = 0; i < m; ++i) stream.header.model_names.push_back("model_" + std::to_string(i));
  const std::vector<double> base = config.drift.base_quality.empty()
                                       ? default_base_quality(m)
                                       : config.drift.base_quality;
  stream.header.generator_info = generator_metadata(config, base).dump();

  stream.records.reserve(static_cast<std::size_t>(config.length));
  std::vector<double> shares(static_cast<std::size_t>(k - 1));
  for (std::int64_t t = 1; t <= config.length; ++t) {
    StreamRecord rec;
    rec.t = t;
    rec.label = static_cast<int>(sample_categorical(plan.label_prior(t), rng));
    rec.probs.resize(static_cast<std::size_t>(m) * static_cast<std::size_t>(k));
    for (int model = 0; model < m; ++model) {
      const double quality = plan.quality(model, t);
      const bool correct = uniform01(rng) < quality;
      int winner = rec.label;
      if (!correct) {
        // uniform over the other k-1 labels
        int alt = static_cast<int>(uniform01(rng) * static_cast<double>(k - 1));
        alt = std::min(alt, k - 2);
        winner = alt >= rec.label ? alt + 1 : alt;
      }
      const double top_mass = 0.6 + 0.35 * uniform01(rng);
      double share_sum = 0.0;
      for (double& s : shares) {
        s = -std::log1p(-uniform01(rng));
        share_sum += s;
      }
      double* row = rec.probs.data() + static_cast<std::size_t>(model) * static_cast<std::size_t>(k);
      std::size_t next_share = 0;
      for (int lbl = 0; lbl < k; ++lbl) {
        if (lbl == winner) {
          row[lbl] = top_mass;
        } else if (share_sum > 0.0) {
          row[lbl] = (1.0 - top_mass) * shares[next_share++] / share_sum;
        } else {
          row[lbl] = (1.0 - top_mass) / static_cast<double>(k - 1);
          ++next_share;
        }
      }
    }
    stream.records.push_back(std::move(rec));
  }
  return stream;
}

void write_stream(const Stream& stream, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open stream file for writing: " + path);
  const StreamHeader& h = stream.header;
  json header;
  header["n_models"] = h.n_models;
  header["n_labels"] = h.n_labels;
  header["length"] = h.length;
  header["model_names"] = h.model_names;
  if (!h.generator_info.empty()) header["generator"] = json::parse(h.generator_info);
  out << header.dump() << '\n';

  const auto k = static_cast<std::size_t>(h.n_labels);
  for (const StreamRecord& rec : stream.records) {
    json row;
    row["t"] = rec.t;
    row["label"] = rec.label;
    json probs = json::array();
    for (int model = 0; model < h.n_models; ++model) {
      const auto span = rec.model_row(static_cast<std::size_t>(model), k);
      probs.push_back(std::vector<double>(span.begin(), span.end()));
    }
    row["probs"] = std::move(probs);
    out << row.dump() << '\n';
  }
  if (!out) throw DataError("write failure on stream file: " + path);
}

StreamReader::StreamReader(const std::string& path) : path_(path), file_(path, std::ios::binary) {
  if (!file_) throw DataError("cannot open stream file: " + path);
  std::string line;
  if (!std::getline(file_, line)) throw DataError(path + ": empty file, expected header line");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(path + ":1: malformed header: " + e.what());
  }
  try {
    header_.n_models = header.at("n_models").get<int>();
    header_.n_labels = header.at("n_labels").get<int>();
    header_.length = header.at("length").get<std::int64_t>();
    if (header.contains("model_names")) {
      header_.model_names = header["model_names"].get<std::vector<std::string>>();
    }
    if (header.contains("generator")) header_.generator_info = header["generator"].dump();
  } catch (const json::exception& e) {
    throw DataError(path + ":1: bad header field: " + e.what());
  }
  if (header_.n_models < 1 || header_.n_labels < 2 || header_.length < 1) {
    throw DataError(path + ":1: header out of range (need n_models >= 1, n_labels >= 2, length >= 1)");
  }
  if (header_.model_names.empty()) {
    for (int i = 0; i < header_.n_models; ++i) header_.model_names.push_back("model_" + std::to_string(i));
  }
  if (header_.model_names.size() != static_cast<std::size_t>(header_.n_models)) {
    throw DataError(path + ":1: model_names count does not match n_models");
  }
}

bool StreamReader::next(StreamRecord& out) {
  std::string line;
  while (std::getline(file_, line)) {
    ++line_no_;
    if (line.empty()) continue;
    if (records_read_ == header_.length) {
      throw DataError(path_ + ":" + std::to_string(line_no_) +
                      ": trailing data after the declared " + std::to_string(header_.length) +
                      " records");
    }
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(path_ + ":" + std::to_string(line_no_) +
                      ": malformed record (truncated mid-record?): " + e.what());
    }
    const std::int64_t expected_t = records_read_ + 1;
    try {
      out.t = row.at("t").get<std::int64_t>();
      out.label = row.at("label").get<int>();
      const json& probs = row.at("probs");
      if (!probs.is_array() || probs.size() != static_cast<std::size_t>(header_.n_models)) {
        throw DataError(path_ + ":" + std::to_string(line_no_) + ": record " +
                        std::to_string(expected_t) + " has wrong model count");
      }
      out.probs.resize(static_cast<std::size_t>(header_.n_models) *
                       static_cast<std::size_t>(header_.n_labels));
      for (std::size_t model = 0; model < probs.size(); ++model) {
        const json& mrow = probs[model];
        if (!mrow.is_array() || mrow.size() != static_cast<std::size_t>(header_.n_labels)) {
          throw DataError(path_ + ":" + std::to_string(line_no_) + ": record " +
                          std::to_string(expected_t) + " has wrong label count in model row " +
                          std::to_string(model));
        }
        for (std::size_t lbl = 0; lbl < mrow.size(); ++lbl) {
          out.probs[model * static_cast<std::size_t>(header_.n_labels) + lbl] = mrow[lbl].get<double>();
        }
      }
    } catch (const json::exception& e) {
      throw DataError(path_ + ":" + std::to_string(line_no_) + ": bad record field: " + e.what());
    }
    if (out.t != expected_t) {
      throw DataError(path_ + ":" + std::to_string(line_no_) + ": record index " +
                      std::to_string(out.t) + " out of order, expected " + std::to_string(expected_t));
    }
    if (out.label < 0 || out.label >= header_.n_labels) {
      throw DataError(path_ + ":" + std::to_string(line_no_) + ": record " +
                      std::to_string(expected_t) + " label out of range");
    }
    for (int model = 0; model < header_.n_models; ++model) {
      const auto row_span = out.model_row(static_cast<std::size_t>(model),
                                          static_cast<std::size_t>(header_.n_labels));
      try {
        validate_probability_vector(row_span);
      } catch (const std::invalid_argument& e) {
        throw DataError(path_ + ":" + std::to_string(line_no_) + ": record " +
                        std::to_string(expected_t) + ", model row " + std::to_string(model) + ": " +
                        e.what());
      }
    }
    ++records_read_;
    return true;
  }
  if (records_read_ != header_.length) {
    throw DataError(path_ + ": unexpected end of stream after " + std::to_string(records_read_) +
                    " of " + std::to_string(header_.length) + " records");
  }
  return false;
}

Stream load_stream(const std::string& path) {
  StreamReader reader(path);
  Stream stream;
  stream.header = reader.header();
  stream.records.reserve(static_cast<std::size_t>(stream.header.length));
  StreamRecord rec;
  while (reader.next(rec)) stream.records.push_back(rec);
  return stream;
}

}  // namespace gmocp
