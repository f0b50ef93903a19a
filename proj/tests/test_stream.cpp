#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "gmocp/conformal.hpp"
#include "gmocp/rng.hpp"
#include "gmocp/stream.hpp"

using namespace gmocp;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("gmocp_stream_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

GeneratorConfig small_config(std::uint64_t seed) {
  GeneratorConfig config;
  config.n_models = 3;
  config.n_labels = 6;
  config.length = 300;
  config.seed = seed;
  config.drift.base_quality = {0.8, 0.5, 0.2};
  return config;
}

double top1_accuracy(const Stream& stream, int model) {
  int hits = 0;
  const auto k = static_cast<std::size_t>(stream.header.n_labels);
  for (const StreamRecord& rec : stream.records) {
    const auto row = rec.model_row(static_cast<std::size_t>(model), k);
    std::size_t best = 0;
    for (std::size_t lbl = 1; lbl < k; ++lbl) {
      if (row[lbl] > row[best]) best = lbl;
    }
    hits += best == static_cast<std::size_t>(rec.label) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(stream.records.size());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

}  // namespace

TEST_CASE("generated records satisfy the stream invariants") {
  std::mt19937_64 rng(81);
  for (int rep = 0; rep < 12; ++rep) {
    GeneratorConfig config;
    config.n_models = 1 + static_cast<int>(rng() % 5);
    config.n_labels = 2 + static_cast<int>(rng() % 10);
    config.length = 50 + static_cast<int>(rng() % 100);
    config.seed = rng();
    config.drift.kind = rep % 2 == 0 ? DriftKind::gradual : DriftKind::abrupt;
    config.drift.n_segments = 3;
    config.drift.base_quality.assign(static_cast<std::size_t>(config.n_models), 0.0);
    for (double& q : config.drift.base_quality) q = 0.3 + 0.6 * uniform01(rng);
    const Stream stream = generate_stream(config);
    CHECK(stream.records.size() == static_cast<std::size_t>(config.length));
    const auto k = static_cast<std::size_t>(config.n_labels);
    for (const StreamRecord& rec : stream.records) {
      CHECK(rec.label >= 0);
      CHECK(rec.label < config.n_labels);
      for (int m = 0; m < config.n_models; ++m) {
        validate_probability_vector(rec.model_row(static_cast<std::size_t>(m), k));
      }
    }
  }
}

TEST_CASE("generator accuracy tracks the quality knob") {
  SUBCASE("near-perfect quality gives near-perfect top-1 accuracy") {
    GeneratorConfig config;
    config.n_models = 1;
    config.n_labels = 20;
    config.length = 3000;
    config.seed = 5;
    config.drift.amplitude = 0.0;
    config.drift.base_quality = {0.999};
    CHECK(top1_accuracy(generate_stream(config), 0) >= 0.99);
  }
  SUBCASE("chance-level quality stays at chance") {
    GeneratorConfig config;
    config.n_models = 2;
    config.n_labels = 10;
    config.length = 4000;
    config.seed = 6;
    config.drift.amplitude = 0.0;
    config.drift.base_quality = {0.1, 0.8};  // second model keeps the stream informative
    const double acc = top1_accuracy(generate_stream(config), 0);
    const double se = std::sqrt(0.1 * 0.9 / 4000.0);
    CHECK(std::abs(acc - 0.1) < 3.0 * se);
  }
  SUBCASE("windowed accuracy follows the drifting quality within 0.05") {
    GeneratorConfig config;  // default pool, gradual sinusoid
    config.seed = 9;
    const Stream stream = generate_stream(config);
    const QualityPlan plan(config);
    const int window = 500;
    const auto k = static_cast<std::size_t>(config.n_labels);
    for (int model = 0; model < config.n_models; ++model) {
      for (std::int64_t start = 0; start + window <= config.length; start += window) {
        int hits = 0;
        double quality_sum = 0.0;
        for (std::int64_t i = start; i < start + window; ++i) {
          const StreamRecord& rec = stream.records[static_cast<std::size_t>(i)];
          const auto row = rec.model_row(static_cast<std::size_t>(model), k);
          std::size_t best = 0;
          for (std::size_t lbl = 1; lbl < k; ++lbl) {
            if (row[lbl] > row[best]) best = lbl;
          }
          hits += best == static_cast<std::size_t>(rec.label) ? 1 : 0;
          quality_sum += plan.quality(model, i + 1);
        }
        const double acc = static_cast<double>(hits) / window;
        CHECK(std::abs(acc - quality_sum / window) < 0.05);
      }
    }
  }
}

TEST_CASE("abrupt drift permutes model rankings between segments") {
  GeneratorConfig config;
  config.n_models = 4;
  config.n_labels = 8;
  config.length = 400;
  config.seed = 11;
  config.drift.kind = DriftKind::abrupt;
  config.drift.n_segments = 4;
  config.drift.base_quality = {0.9, 0.6, 0.4, 0.2};
  const QualityPlan plan(config);
  // each segment holds quality constant
  CHECK(plan.quality(0, 1) == plan.quality(0, 100));
  CHECK(plan.quality(2, 101) == plan.quality(2, 200));
  // the multiset of qualities per segment is the base set
  for (std::int64_t t : {1, 101, 201, 301}) {
    std::vector<double> qs;
    for (int m = 0; m < 4; ++m) qs.push_back(plan.quality(m, t));
    std::sort(qs.begin(), qs.end());
    CHECK(qs == std::vector<double>{0.2, 0.4, 0.6, 0.9});
  }
  // at least one segment boundary reassigns some model
  bool changed = false;
  for (int m = 0; m < 4 && !changed; ++m) changed = plan.quality(m, 1) != plan.quality(m, 101);
  CHECK(changed);
}

TEST_CASE("degenerate generator configs are rejected") {
  GeneratorConfig config;
  config.n_models = 2;
  config.n_labels = 10;
  config.length = 100;
  config.drift.amplitude = 0.0;
  config.drift.base_quality = {0.05, 0.08};  // all at or below 1/K
  CHECK_THROWS_AS(generate_stream(config), DataError);
  config.n_labels = 1;
  CHECK_THROWS_AS(generate_stream(config), DataError);
}

TEST_CASE("stream file round trip is lossless") {
  TempDir tmp;
  const Stream stream = generate_stream(small_config(33));
  const std::string path = tmp.file("roundtrip.jsonl");
  write_stream(stream, path);
  const Stream loaded = load_stream(path);
  CHECK(loaded.header.n_models == stream.header.n_models);
  CHECK(loaded.header.n_labels == stream.header.n_labels);
  CHECK(loaded.header.length == stream.header.length);
  CHECK(loaded.header.model_names == stream.header.model_names);
  REQUIRE(loaded.records.size() == stream.records.size());
  for (std::size_t i = 0; i < stream.records.size(); ++i) {
    CHECK(loaded.records[i].t == stream.records[i].t);
    CHECK(loaded.records[i].label == stream.records[i].label);
    CHECK(loaded.records[i].probs == stream.records[i].probs);  // bit-exact
  }
}

TEST_CASE("fixed seed writes a byte-identical stream file") {
  TempDir tmp;
  const std::string a = tmp.file("a.jsonl");
  const std::string b = tmp.file("b.jsonl");
  write_stream(generate_stream(small_config(99)), a);
  write_stream(generate_stream(small_config(99)), b);
  CHECK(slurp(a) == slurp(b));
  const std::string c = tmp.file("c.jsonl");
  write_stream(generate_stream(small_config(100)), c);
  CHECK(slurp(a) != slurp(c));
}

TEST_CASE("loader reports the first violation with its location") {
  TempDir tmp;
  const Stream stream = generate_stream(small_config(7));

  SUBCASE("non-normalized row names the record") {
    Stream broken = stream;
    broken.records[4].probs[0] += 0.2;
    const std::string path = tmp.file("bad_row.jsonl");
    write_stream(broken, path);
    CHECK_THROWS_WITH_AS(load_stream(path),
                         doctest::Contains("record 5"), DataError);
  }
  SUBCASE("label out of range names the record") {
    Stream broken = stream;
    broken.records[9].label = 6;
    const std::string path = tmp.file("bad_label.jsonl");
    write_stream(broken, path);
    CHECK_THROWS_WITH_AS(load_stream(path), doctest::Contains("record 10"), DataError);
  }
  SUBCASE("missing records are flagged as truncation") {
    const std::string full = tmp.file("full.jsonl");
    write_stream(stream, full);
    std::ifstream in(full);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    const std::string path = tmp.file("short.jsonl");
    std::ofstream out(path);
    for (std::size_t i = 0; i + 10 < lines.size(); ++i) out << lines[i] << '\n';
    out.close();
    CHECK_THROWS_WITH_AS(load_stream(path), doctest::Contains("unexpected end of stream"),
                         DataError);
  }
  SUBCASE("a record cut off mid-line is a malformed record, not a clean end") {
    const std::string full = tmp.file("full2.jsonl");
    write_stream(stream, full);
    const std::string text = slurp(full);
    const std::string path = tmp.file("cut.jsonl");
    std::ofstream out(path, std::ios::binary);
    out << text.substr(0, text.size() - 40);
    out.close();
    CHECK_THROWS_WITH_AS(load_stream(path), doctest::Contains("malformed record"), DataError);
  }
  SUBCASE("trailing data after the declared length is rejected") {
    const std::string full = tmp.file("full3.jsonl");
    write_stream(stream, full);
    std::ofstream out(full, std::ios::app);
    out << "{\"t\":301,\"label\":0,\"probs\":[]}\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_stream(full), doctest::Contains("trailing data"), DataError);
  }
}

TEST_CASE("default pool shape: strong majority plus medium and weak stragglers") {
  const auto base = default_base_quality(8);
  REQUIRE(base.size() == 8);
  for (int i = 0; i < 6; ++i) CHECK(base[static_cast<std::size_t>(i)] == doctest::Approx(0.75));
  CHECK(base[6] == doctest::Approx(0.45));
  CHECK(base[7] == doctest::Approx(0.15));
}
