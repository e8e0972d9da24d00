#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dataio.hpp"

using namespace qst;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / "qst_dataio_test";
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("datasets round trip losslessly") {
  TempDir dir;
  Provenance p;
  p.kind = Provenance::Kind::shots;
  p.shots = 15;
  const Dataset original = generate_dataset(20, 2, p, 99);
  const std::string path = dir.file("data.jsonl");
  save_dataset(original, path);

  const Dataset loaded = load_dataset(path);
  CHECK(loaded.qubits == 2);
  CHECK(loaded.provenance.to_string() == "shots:15");
  REQUIRE(loaded.samples.size() == original.samples.size());
  for (std::size_t i = 0; i < original.samples.size(); ++i) {
    CHECK(loaded.samples[i].measurements == original.samples[i].measurements);
    CHECK(loaded.samples[i].target_tau == original.samples[i].target_tau);
  }

  // Same content, same bytes.
  save_dataset(original, dir.file("again.jsonl"));
  CHECK(slurp(path) == slurp(dir.file("again.jsonl")));
}

TEST_CASE("dataset loading validates structure line by line") {
  TempDir dir;
  const std::string path = dir.file("bad.jsonl");

  SUBCASE("unsupported version") {
    spit(path, "{\"version\":2,\"d\":1,\"provenance\":\"ideal\",\"count\":0}\n");
    CHECK_THROWS_WITH_AS(load_dataset(path),
                         doctest::Contains("unsupported"), Error);
  }
  SUBCASE("vector length inconsistent with header d") {
    spit(path,
         "{\"version\":1,\"d\":2,\"provenance\":\"ideal\",\"count\":1}\n"
         "{\"m\":[0.5,0.5],\"tau\":[1,0,0,0]}\n");
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("line 2"),
                         Error);
  }
  SUBCASE("malformed json names the line") {
    spit(path,
         "{\"version\":1,\"d\":1,\"provenance\":\"ideal\",\"count\":2}\n"
         "{\"m\":[0.5,0.5,0.5,0.5,0.5,0.5],\"tau\":[1,0,0,0]}\n"
         "{oops\n");
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("line 3"),
                         Error);
  }
  SUBCASE("count mismatch") {
    spit(path,
         "{\"version\":1,\"d\":1,\"provenance\":\"ideal\",\"count\":3}\n"
         "{\"m\":[0.5,0.5,0.5,0.5,0.5,0.5],\"tau\":[1,0,0,0]}\n");
    CHECK_THROWS_AS(load_dataset(path), Error);
  }
  SUBCASE("empty dataset with count zero is valid") {
    spit(path, "{\"version\":1,\"d\":1,\"provenance\":\"ideal\",\"count\":0}\n");
    const Dataset d = load_dataset(path);
    CHECK(d.qubits == 1);
    CHECK(d.samples.empty());
  }
  SUBCASE("missing file is an io error") {
    CHECK_THROWS_AS(load_dataset(dir.file("nope.jsonl")), Error);
  }
}

TEST_CASE("checkpoints restore bitwise-identical inference") {
  TempDir dir;
  NetworkConfig config = NetworkConfig::defaults_for(1);
  config.epochs = 2;
  config.seed = 8;
  Dataset training = generate_dataset(40, 1, Provenance{}, 17);
  Dataset validation = generate_dataset(10, 1, Provenance{}, 18);
  const TrainResult trained = train(training, validation, config);

  const std::string path = dir.file("model.json");
  save_model(trained.model, trained.history, path);
  const LoadedModel loaded = load_model(path);

  CHECK(loaded.history.size() == trained.history.size());
  Rng rng(123);
  for (int i = 0; i < 10; ++i) {
    RVector probe(config.input_length());
    for (Eigen::Index k = 0; k < probe.size(); ++k) probe(k) = rng.uniform();
    const RVector a = forward(trained.model, probe, false, nullptr);
    const RVector b = forward(loaded.model, probe, false, nullptr);
    CHECK(a == b);  // bitwise
  }
}

TEST_CASE("corrupt checkpoints are rejected, not crashed on") {
  TempDir dir;
  NetworkConfig config = NetworkConfig::defaults_for(1);
  const ModelParams model = initialize_model(config);
  const std::string path = dir.file("model.json");
  save_model(model, {}, path);

  SUBCASE("truncated file") {
    const std::string text = slurp(path);
    spit(path, text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_model(path), Error);
  }
  SUBCASE("tensor shape tampered with") {
    std::string text = slurp(path);
    const auto pos = text.find("\"shape\":[");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 9, "\"shape\":[9,");
    spit(path, text);
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("corrupt"),
                         Error);
  }
  SUBCASE("unknown version") {
    std::string text = slurp(path);
    const auto pos = text.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 11, "\"version\":9");
    spit(path, text);
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("version"),
                         Error);
  }
}

TEST_CASE("a d=1 checkpoint refuses d=2 records") {
  TempDir dir;
  NetworkConfig config = NetworkConfig::defaults_for(1);
  const ModelParams model = initialize_model(config);
  save_model(model, {}, dir.file("m.json"));
  const LoadedModel loaded = load_model(dir.file("m.json"));

  MeasurementRecord record;
  record.qubits = 2;
  record.shots = kIdealShots;
  record.values = RVector::Constant(36, 0.25);
  CHECK_THROWS_AS(predict_density(loaded.model, record), Error);
}

TEST_CASE("results tables write validated deterministic csv") {
  TempDir dir;

  SUBCASE("empty table gives a header-only file") {
    ResultsTable empty;
    write_results(empty, dir.file("empty.csv"));
    CHECK(slurp(dir.file("empty.csv")) ==
          "method,d,shots,noise_p,state_index,fidelity,wall_time_s,seed\n");
  }

  SUBCASE("rows are sorted and rewrites are byte-identical") {
    ResultsTable table;
    table.add("mle", 2, 128, 0.0, 1, 0.95, 0.5, 7);
    table.add("mle", 2, 15, 0.0, 0, 0.9, 0.25, 7);
    table.add("nn-ideal", 2, 15, 0.0, 0, 0.97, 0.001, 7);
    write_results(table, dir.file("a.csv"));

    ResultsTable shuffled;
    shuffled.rows = {table.rows[2], table.rows[0], table.rows[1]};
    write_results(shuffled, dir.file("b.csv"));
    CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));

    const std::string text = slurp(dir.file("a.csv"));
    CHECK(text.find("mle,2,15") < text.find("mle,2,128"));
    CHECK(text.find("mle,2,128") < text.find("nn-ideal"));
  }

  SUBCASE("fidelity outside the unit interval is rejected") {
    ResultsTable table;
    table.add("mle", 2, 15, 0.0, 0, 1.2, 0.1, 7);
    CHECK_THROWS_AS(write_results(table, dir.file("x.csv")), Error);
  }

  SUBCASE("duplicate keys are rejected") {
    ResultsTable table;
    table.add("mle", 2, 15, 0.0, 0, 0.9, 0.1, 7);
    table.add("mle", 2, 15, 0.0, 0, 0.91, 0.2, 7);
    CHECK_THROWS_WITH_AS(write_results(table, dir.file("x.csv")),
                         doctest::Contains("duplicate"), Error);
  }
}
