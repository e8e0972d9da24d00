// qst - command-line harness for the tomography benchmark toolkit.
// Talks to the core exclusively through the shared-library C API.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <qst/qst.h>

namespace {

// ---- handle RAII -----------------------------------------------------------

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};
template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, HandleDeleter<T, Free>>;

using DensityPtr = Handle<qst_density, qst_density_free>;
using ProjectorsPtr = Handle<qst_projectors, qst_projectors_free>;
using RecordPtr = Handle<qst_record, qst_record_free>;
using DatasetPtr = Handle<qst_dataset, qst_dataset_free>;
using ModelPtr = Handle<qst_model, qst_model_free>;
using ResultsPtr = Handle<qst_results, qst_results_free>;
using MleResultPtr = Handle<qst_mle_result, qst_mle_result_free>;

[[noreturn]] void die_runtime(const std::string& context) {
  std::fprintf(stderr, "error: %s: %s\n", context.c_str(), qst_last_error());
  std::exit(2);
}

[[noreturn]] void die_usage(const std::string& message) {
  std::fprintf(stderr, "usage error: %s\n", message.c_str());
  std::exit(1);
}

void check(qst_status status, const std::string& context) {
  if (status != QST_OK) die_runtime(context);
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Same splitting rule the library documents:
// task_seed = master_seed * 1000003 + task_index.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  return master * 1000003ULL + index;
}
// Task-index ranges per purpose, so streams never collide.
std::uint64_t haar_index(int state) { return state; }
std::uint64_t sample_index(int level, int state) {
  return 100000 + std::uint64_t(level) * 10000 + state;
}
std::uint64_t mle_index(int level, int state) {
  return 2000000 + std::uint64_t(level) * 10000 + state;
}

DensityPtr haar_density(int qubits, std::uint64_t seed) {
  qst_density* rho = nullptr;
  check(qst_density_haar(qubits, seed, &rho), "sampling a Haar state");
  return DensityPtr(rho);
}

ProjectorsPtr build_projectors(int qubits) {
  qst_projectors* proj = nullptr;
  check(qst_projectors_build(qubits, &proj), "building projectors");
  return ProjectorsPtr(proj);
}

RecordPtr ideal_record(const qst_density* rho, const qst_projectors* proj) {
  qst_record* rec = nullptr;
  check(qst_record_ideal(rho, proj, &rec), "evaluating ideal probabilities");
  return RecordPtr(rec);
}

RecordPtr sampled_record(const qst_record* ideal, std::int64_t shots,
                         std::uint64_t seed) {
  qst_record* rec = nullptr;
  check(qst_record_sample(ideal, shots, seed, &rec), "sampling shots");
  return RecordPtr(rec);
}

double fidelity_of(const qst_density* a, const qst_density* b) {
  double f = 0.0;
  check(qst_fidelity(a, b, &f), "evaluating fidelity");
  return f;
}

ModelPtr load_model(const std::string& path) {
  qst_model* model = nullptr;
  check(qst_model_load(path.c_str(), &model), "loading '" + path + "'");
  return ModelPtr(model);
}

struct EpochPrinter {
  bool quiet = false;
  double seconds_total = 0.0;
  int epochs = 0;
};

void epoch_callback(int epoch, double loss, double val_fidelity,
                    double seconds, void* user) {
  auto* printer = static_cast<EpochPrinter*>(user);
  printer->seconds_total += seconds;
  printer->epochs += 1;
  if (!printer->quiet)
    std::printf("%d,%.6g,%.6g\n", epoch, loss, val_fidelity);
}

ModelPtr train_model(const qst_dataset* training, const qst_dataset* val,
                     qst_network_config config, EpochPrinter& printer) {
  qst_model* model = nullptr;
  check(qst_train(training, val, &config, epoch_callback, &printer, &model),
        "training");
  return ModelPtr(model);
}

std::vector<int> parse_qubit_list(const std::string& text) {
  std::vector<int> out;
  const auto range_pos = text.find("..");
  if (range_pos != std::string::npos) {
    const int lo = std::atoi(text.substr(0, range_pos).c_str());
    const int hi = std::atoi(text.substr(range_pos + 2).c_str());
    if (lo < 1 || hi < lo)
      die_usage("bad qubit range '" + text + "' (want e.g. 1..3)");
    for (int d = lo; d <= hi; ++d) out.push_back(d);
    return out;
  }
  std::string item;
  std::istringstream stream(text);
  while (std::getline(stream, item, ',')) {
    const int d = std::atoi(item.c_str());
    if (d < 1) die_usage("bad qubit count '" + item + "'");
    out.push_back(d);
  }
  if (out.empty()) die_usage("empty qubit list");
  return out;
}

std::vector<std::int64_t> parse_shot_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::string item;
  std::istringstream stream(text);
  while (std::getline(stream, item, ',')) {
    const long long n = std::atoll(item.c_str());
    if (n < 1) die_usage("bad shot count '" + item + "'");
    out.push_back(n);
  }
  if (out.empty()) die_usage("empty shots list");
  return out;
}

// ---- gen-data ---------------------------------------------------------------

struct GenDataArgs {
  int qubits = 2;
  int count = 100;
  std::string provenance = "ideal";
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_data(const GenDataArgs& args) {
  qst_dataset* data = nullptr;
  const qst_status status = qst_dataset_generate(
      args.qubits, args.count, args.provenance.c_str(), args.seed, &data);
  if (status == QST_ERROR_FORMAT) die_usage(qst_last_error());
  check(status, "generating dataset");
  DatasetPtr dataset(data);
  check(qst_dataset_save(dataset.get(), args.out.c_str()),
        "writing '" + args.out + "'");
  std::printf("seed: %llu\n", (unsigned long long)args.seed);
  std::printf("wrote %d %d-qubit samples (provenance %s) to %s\n", args.count,
              args.qubits, args.provenance.c_str(), args.out.c_str());
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string train_path, val_path, out;
  int epochs = -1;
  std::uint64_t seed = 0;
  double learning_rate = -1.0;
  int batch_size = -1;
  int conv1 = -1, conv2 = -1, dense1 = -1, dense2 = -1;
  int kernel = -1, pool = -1;
  double dropout = -1.0;
};

int cmd_train(const TrainArgs& args) {
  qst_dataset* t = nullptr;
  check(qst_dataset_load(args.train_path.c_str(), &t),
        "loading '" + args.train_path + "'");
  DatasetPtr training(t);
  qst_dataset* v = nullptr;
  check(qst_dataset_load(args.val_path.c_str(), &v),
        "loading '" + args.val_path + "'");
  DatasetPtr validation(v);

  if (qst_dataset_qubits(training.get()) !=
      qst_dataset_qubits(validation.get()))
    die_usage("training and validation files disagree on the qubit count");

  qst_network_config config;
  check(qst_network_config_defaults(qst_dataset_qubits(training.get()),
                                    &config),
        "default configuration");
  config.seed = args.seed;
  if (args.epochs >= 0) config.epochs = args.epochs;
  if (args.learning_rate > 0) config.learning_rate = args.learning_rate;
  if (args.batch_size > 0) config.batch_size = args.batch_size;
  if (args.conv1 > 0) config.conv1_filters = args.conv1;
  if (args.conv2 > 0) config.conv2_filters = args.conv2;
  if (args.dense1 > 0) config.dense1_units = args.dense1;
  if (args.dense2 > 0) config.dense2_units = args.dense2;
  if (args.kernel > 0) config.kernel_size = args.kernel;
  if (args.pool > 0) config.pool_size = args.pool;
  if (args.dropout >= 0) config.dropout_rate = args.dropout;

  std::printf("seed: %llu\n", (unsigned long long)args.seed);
  std::printf("epoch,loss,val_fidelity\n");
  EpochPrinter printer;
  ModelPtr model =
      train_model(training.get(), validation.get(), config, printer);
  check(qst_model_save(model.get(), args.out.c_str()),
        "writing '" + args.out + "'");
  std::printf("checkpoint: %s\n", args.out.c_str());
  return 0;
}

// ---- bench-scaling ----------------------------------------------------------

struct BenchScalingArgs {
  std::string qubits = "1..2";
  int states = 20;
  std::uint64_t seed = 0;
  std::string out;
  bool train_inline = false;
  int train_count = 4000;
  int val_count = 200;
  int epochs = -1;
  std::vector<std::string> checkpoints;  // d=path
  std::string scenarios = "ideal,depol";
  double noise_p = -1.0;  // <0: per-d default
  std::int64_t noisy_shots = 2192;
  bool zero_timing = false;
};

int cmd_bench_scaling(const BenchScalingArgs& args) {
  const std::vector<int> qubit_list = parse_qubit_list(args.qubits);
  std::vector<std::string> scenario_list;
  {
    std::istringstream stream(args.scenarios);
    std::string item;
    while (std::getline(stream, item, ',')) {
      if (item != "ideal" && item != "depol")
        die_usage("unknown scenario '" + item + "' (ideal | depol)");
      scenario_list.push_back(item);
    }
  }
  if (scenario_list.empty()) die_usage("empty scenarios list");

  std::map<int, std::string> checkpoint_paths;
  for (const std::string& spec : args.checkpoints) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
      die_usage("checkpoint flag wants d=PATH, got '" + spec + "'");
    checkpoint_paths[std::atoi(spec.substr(0, eq).c_str())] =
        spec.substr(eq + 1);
  }
  if (!args.train_inline) {
    std::vector<int> missing;
    for (int d : qubit_list)
      if (!checkpoint_paths.count(d)) missing.push_back(d);
    if (!missing.empty()) {
      std::string list;
      for (int d : missing) list += " d=" + std::to_string(d);
      die_usage("no checkpoint for" + list +
                " (pass --checkpoint d=PATH or --train-inline)");
    }
  }

  std::printf("seed: %llu\n", (unsigned long long)args.seed);

  qst_results* raw_results = nullptr;
  check(qst_results_create("bench-scaling", &raw_results), "results table");
  ResultsPtr results(raw_results);

  for (int d : qubit_list) {
    ModelPtr model;
    if (args.train_inline) {
      qst_dataset* t = nullptr;
      check(qst_dataset_generate(d, args.train_count, "ideal",
                                 split_seed(args.seed, 50000 + d), &t),
            "generating training data");
      DatasetPtr training(t);
      qst_dataset* v = nullptr;
      check(qst_dataset_generate(d, args.val_count, "ideal",
                                 split_seed(args.seed, 60000 + d), &v),
            "generating validation data");
      DatasetPtr validation(v);

      qst_network_config config;
      check(qst_network_config_defaults(d, &config), "default configuration");
      config.seed = split_seed(args.seed, 70000 + d);
      if (args.epochs >= 0) config.epochs = args.epochs;
      EpochPrinter printer;
      printer.quiet = true;
      model = train_model(training.get(), validation.get(), config, printer);
      std::printf("trained d=%d: %d epochs, mean epoch time %.3fs\n", d,
                  printer.epochs,
                  printer.epochs ? printer.seconds_total / printer.epochs
                                 : 0.0);
    } else {
      model = load_model(checkpoint_paths[d]);
      if (qst_model_qubits(model.get()) != d)
        die_usage("checkpoint for d=" + std::to_string(d) +
                  " holds a different qubit count");
    }

    ProjectorsPtr projectors = build_projectors(d);
    const double depol_p =
        args.noise_p >= 0 ? args.noise_p : qst_default_depolarizing_p(d);

    for (std::size_t s = 0; s < scenario_list.size(); ++s) {
      const bool noisy = scenario_list[s] == "depol";
      for (int state = 0; state < args.states; ++state) {
        const DensityPtr target =
            haar_density(d, split_seed(args.seed, haar_index(state)));

        RecordPtr record;
        if (noisy) {
          qst_density* mixed = nullptr;
          check(qst_density_depolarize(target.get(), depol_p, &mixed),
                "depolarizing");
          DensityPtr mixed_ptr(mixed);
          RecordPtr ideal = ideal_record(mixed_ptr.get(), projectors.get());
          record = sampled_record(
              ideal.get(), args.noisy_shots,
              split_seed(args.seed, sample_index(int(s), state)));
        } else {
          record = ideal_record(target.get(), projectors.get());
        }

        const double t0 = now_seconds();
        qst_density* predicted = nullptr;
        check(qst_model_predict(model.get(), record.get(), &predicted),
              "network prediction");
        const double elapsed = now_seconds() - t0;
        DensityPtr predicted_ptr(predicted);

        check(qst_results_add(results.get(), "nn-ideal", d,
                              qst_record_shots(record.get()),
                              noisy ? depol_p : 0.0, state,
                              fidelity_of(target.get(), predicted_ptr.get()),
                              args.zero_timing ? 0.0 : elapsed, args.seed),
              "recording row");
      }
    }
  }

  check(qst_results_write_csv(results.get(), args.out.c_str()),
        "writing '" + args.out + "'");
  std::printf("wrote %s\n", args.out.c_str());
  return 0;
}

// ---- bench-shots ------------------------------------------------------------

struct BenchShotsArgs {
  int qubits = 2;
  std::string shots = "5,15,128,1024,8192";
  std::string methods = "nn-ideal,nn-shots:15,mle";
  int states = 20;
  std::uint64_t seed = 0;
  std::string checkpoint_ideal, checkpoint_shots;
  int mle_restarts = -1;
  std::string out;
  std::string sqdiff_out;
  bool zero_timing = false;
};

int cmd_bench_shots(const BenchShotsArgs& args) {
  const std::vector<std::int64_t> shot_levels = parse_shot_list(args.shots);
  std::vector<std::string> methods;
  {
    std::istringstream stream(args.methods);
    std::string item;
    while (std::getline(stream, item, ',')) {
      if (item != "mle" && item != "nn-ideal" &&
          item.rfind("nn-shots:", 0) != 0)
        die_usage("unknown method '" + item +
                  "' (mle | nn-ideal | nn-shots:K)");
      methods.push_back(item);
    }
    if (methods.empty()) die_usage("empty methods list");
  }

  ModelPtr model_ideal, model_shots;
  for (const std::string& method : methods) {
    if (method == "nn-ideal") {
      if (args.checkpoint_ideal.empty())
        die_usage("method nn-ideal needs --checkpoint-ideal PATH");
      model_ideal = load_model(args.checkpoint_ideal);
      if (qst_model_qubits(model_ideal.get()) != args.qubits)
        die_usage("--checkpoint-ideal holds a different qubit count");
    } else if (method.rfind("nn-shots:", 0) == 0) {
      if (args.checkpoint_shots.empty())
        die_usage("method " + method + " needs --checkpoint-shots PATH");
      model_shots = load_model(args.checkpoint_shots);
      if (qst_model_qubits(model_shots.get()) != args.qubits)
        die_usage("--checkpoint-shots holds a different qubit count");
    }
  }

  std::printf("seed: %llu\n", (unsigned long long)args.seed);

  ProjectorsPtr projectors = build_projectors(args.qubits);
  qst_mle_config mle_config;
  qst_mle_config_init(&mle_config);
  if (args.mle_restarts > 0) mle_config.restarts = args.mle_restarts;

  qst_results* raw_results = nullptr;
  check(qst_results_create("bench-shots", &raw_results), "results table");
  ResultsPtr results(raw_results);

  std::string sqdiff_csv = "d,shots,state_index,sqdiff,seed\n";

  for (std::size_t level = 0; level < shot_levels.size(); ++level) {
    const std::int64_t shots = shot_levels[level];
    for (int state = 0; state < args.states; ++state) {
      const DensityPtr target =
          haar_density(args.qubits, split_seed(args.seed, haar_index(state)));
      const RecordPtr ideal = ideal_record(target.get(), projectors.get());
      const RecordPtr record = sampled_record(
          ideal.get(), shots,
          split_seed(args.seed, sample_index(int(level), state)));

      double sqdiff = 0.0;
      check(qst_record_squared_difference(record.get(), ideal.get(), &sqdiff),
            "squared difference");
      char line[128];
      std::snprintf(line, sizeof line, "%d,%lld,%d,%.17g,%llu\n", args.qubits,
                    (long long)shots, state, sqdiff,
                    (unsigned long long)args.seed);
      sqdiff_csv += line;

      for (const std::string& method : methods) {
        DensityPtr predicted;
        double elapsed = 0.0;
        if (method == "mle") {
          qst_mle_result* raw = nullptr;
          const double t0 = now_seconds();
          check(qst_mle_reconstruct(
                    record.get(), projectors.get(), &mle_config,
                    split_seed(args.seed, mle_index(int(level), state)), &raw),
                "mle reconstruction");
          elapsed = now_seconds() - t0;
          MleResultPtr mle(raw);
          qst_density* rho = nullptr;
          check(qst_mle_result_density(mle.get(), &rho), "mle density");
          predicted.reset(rho);
        } else {
          const qst_model* model =
              method == "nn-ideal" ? model_ideal.get() : model_shots.get();
          const double t0 = now_seconds();
          qst_density* rho = nullptr;
          check(qst_model_predict(model, record.get(), &rho),
                "network prediction");
          elapsed = now_seconds() - t0;
          predicted.reset(rho);
        }
        check(qst_results_add(results.get(), method.c_str(), args.qubits,
                              shots, 0.0, state,
                              fidelity_of(target.get(), predicted.get()),
                              args.zero_timing ? 0.0 : elapsed, args.seed),
              "recording row");
      }
    }
  }

  check(qst_results_write_csv(results.get(), args.out.c_str()),
        "writing '" + args.out + "'");
  std::printf("wrote %s\n", args.out.c_str());

  const std::string sqdiff_path =
      args.sqdiff_out.empty() ? args.out + ".sqdiff.csv" : args.sqdiff_out;
  {
    std::ofstream out(sqdiff_path, std::ios::binary | std::ios::trunc);
    if (!out) die_runtime("writing '" + sqdiff_path + "'");
    out << sqdiff_csv;
  }
  std::printf("wrote %s\n", sqdiff_path.c_str());
  return 0;
}

// ---- reconstruct ------------------------------------------------------------

struct ReconstructArgs {
  std::string record_path;
  int index = 0;
  std::string method = "mle";
  std::string checkpoint;
  bool against_target = false;
  std::uint64_t seed = 0;
  int mle_restarts = -1;
  std::string out;
};

int cmd_reconstruct(const ReconstructArgs& args) {
  qst_dataset* raw = nullptr;
  check(qst_dataset_load(args.record_path.c_str(), &raw),
        "loading '" + args.record_path + "'");
  DatasetPtr dataset(raw);

  qst_record* raw_record = nullptr;
  check(qst_dataset_record(dataset.get(), args.index, &raw_record),
        "reading sample " + std::to_string(args.index));
  RecordPtr record(raw_record);
  const int qubits = qst_record_qubits(record.get());

  DensityPtr predicted;
  if (args.method == "mle") {
    ProjectorsPtr projectors = build_projectors(qubits);
    qst_mle_config config;
    qst_mle_config_init(&config);
    if (args.mle_restarts > 0) config.restarts = args.mle_restarts;
    qst_mle_result* result = nullptr;
    check(qst_mle_reconstruct(record.get(), projectors.get(), &config,
                              args.seed, &result),
          "mle reconstruction");
    MleResultPtr mle(result);
    qst_density* rho = nullptr;
    check(qst_mle_result_density(mle.get(), &rho), "mle density");
    predicted.reset(rho);
  } else if (args.method == "nn") {
    if (args.checkpoint.empty()) die_usage("method nn needs --checkpoint");
    ModelPtr model = load_model(args.checkpoint);
    qst_density* rho = nullptr;
    check(qst_model_predict(model.get(), record.get(), &rho),
          "network prediction");
    predicted.reset(rho);
  } else {
    die_usage("unknown method '" + args.method + "' (mle | nn)");
  }

  const int dim = 1 << qubits;
  std::vector<double> re(dim * dim), im(dim * dim);
  check(qst_density_elements(predicted.get(), re.data(), im.data(), re.size()),
        "reading the matrix");

  std::string text = "method: " + args.method + "\nre:\n";
  char buf[64];
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      std::snprintf(buf, sizeof buf, " % .6f", re[r * dim + c]);
      text += buf;
    }
    text += '\n';
  }
  text += "im:\n";
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      std::snprintf(buf, sizeof buf, " % .6f", im[r * dim + c]);
      text += buf;
    }
    text += '\n';
  }

  if (args.against_target) {
    qst_density* target = nullptr;
    check(qst_dataset_target(dataset.get(), args.index, &target),
          "reading the target");
    DensityPtr target_ptr(target);
    std::snprintf(buf, sizeof buf, "fidelity: %.6f\n",
                  fidelity_of(target_ptr.get(), predicted.get()));
    text += buf;
  }

  std::printf("seed: %llu\n", (unsigned long long)args.seed);
  std::fputs(text.c_str(), stdout);
  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::binary | std::ios::trunc);
    if (!out) die_runtime("writing '" + args.out + "'");
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum state tomography benchmark toolkit"};
  app.require_subcommand(1);

  GenDataArgs gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-data", "simulate tomography training data");
  gen_cmd->add_option("--qubits", gen.qubits, "qubit count")
      ->required()
      ->check(CLI::Range(1, 10));
  gen_cmd->add_option("--count", gen.count, "number of samples")->required();
  gen_cmd->add_option("--provenance", gen.provenance,
                      "ideal | shots:K | depol:P+shots:K");
  gen_cmd->add_option("--seed", gen.seed, "master seed (default 0)");
  gen_cmd->add_option("--out", gen.out, "output dataset path")->required();

  TrainArgs train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train a reconstruction network");
  train_cmd->add_option("--train", train.train_path, "training dataset")
      ->required();
  train_cmd->add_option("--val", train.val_path, "validation dataset")
      ->required();
  train_cmd->add_option("--out", train.out, "checkpoint path")->required();
  train_cmd->add_option("--epochs", train.epochs, "epoch count");
  train_cmd->add_option("--seed", train.seed, "training seed (default 0)");
  train_cmd->add_option("--lr", train.learning_rate, "learning rate");
  train_cmd->add_option("--batch-size", train.batch_size, "batch size");
  train_cmd->add_option("--conv1", train.conv1, "conv1 filters");
  train_cmd->add_option("--conv2", train.conv2, "conv2 filters");
  train_cmd->add_option("--dense1", train.dense1, "dense1 units");
  train_cmd->add_option("--dense2", train.dense2, "dense2 units");
  train_cmd->add_option("--kernel", train.kernel, "kernel size");
  train_cmd->add_option("--pool", train.pool, "pool size");
  train_cmd->add_option("--dropout", train.dropout, "dropout rate");

  BenchScalingArgs scaling;
  CLI::App* scaling_cmd = app.add_subcommand(
      "bench-scaling", "fidelity and timing versus the qubit count");
  scaling_cmd->add_option("--qubits", scaling.qubits,
                          "range 1..3 or list 1,2,3");
  scaling_cmd->add_option("--states", scaling.states, "test states per case");
  scaling_cmd->add_option("--seed", scaling.seed, "master seed (default 0)");
  scaling_cmd->add_option("--out", scaling.out, "results CSV")->required();
  scaling_cmd->add_flag("--train-inline", scaling.train_inline,
                        "train models on the fly");
  scaling_cmd->add_option("--train-count", scaling.train_count,
                          "inline training set size");
  scaling_cmd->add_option("--val-count", scaling.val_count,
                          "inline validation set size");
  scaling_cmd->add_option("--epochs", scaling.epochs, "inline epoch count");
  scaling_cmd->add_option("--checkpoint", scaling.checkpoints,
                          "d=PATH (repeatable)");
  scaling_cmd->add_option("--scenarios", scaling.scenarios,
                          "comma list of ideal|depol");
  scaling_cmd->add_option("--noise-p", scaling.noise_p,
                          "depolarizing weight (default per d)");
  scaling_cmd->add_option("--noisy-shots", scaling.noisy_shots,
                          "shots for the depol scenario");
  scaling_cmd->add_flag("--zero-timing", scaling.zero_timing,
                        "write 0 in wall_time_s for byte-reproducible CSVs");

  BenchShotsArgs shots;
  CLI::App* shots_cmd =
      app.add_subcommand("bench-shots", "fidelity versus shots for nn and mle");
  shots_cmd->add_option("--qubits", shots.qubits, "qubit count")
      ->check(CLI::Range(1, 10));
  shots_cmd->add_option("--shots", shots.shots, "comma list of shot counts");
  shots_cmd->add_option("--methods", shots.methods,
                        "comma list of nn-ideal|nn-shots:K|mle");
  shots_cmd->add_option("--states", shots.states, "test states per level");
  shots_cmd->add_option("--seed", shots.seed, "master seed (default 0)");
  shots_cmd->add_option("--checkpoint-ideal", shots.checkpoint_ideal,
                        "checkpoint for nn-ideal");
  shots_cmd->add_option("--checkpoint-shots", shots.checkpoint_shots,
                        "checkpoint for nn-shots:K");
  shots_cmd->add_option("--mle-restarts", shots.mle_restarts,
                        "mle restart count");
  shots_cmd->add_option("--out", shots.out, "results CSV")->required();
  shots_cmd->add_option("--sqdiff-out", shots.sqdiff_out,
                        "squared-difference CSV (default OUT.sqdiff.csv)");
  shots_cmd->add_flag("--zero-timing", shots.zero_timing,
                      "write 0 in wall_time_s for byte-reproducible CSVs");

  ReconstructArgs rec;
  CLI::App* rec_cmd = app.add_subcommand(
      "reconstruct", "reconstruct one record from a dataset file");
  rec_cmd->add_option("--record", rec.record_path, "dataset file")->required();
  rec_cmd->add_option("--index", rec.index, "sample index (default 0)");
  rec_cmd->add_option("--method", rec.method, "mle | nn");
  rec_cmd->add_option("--checkpoint", rec.checkpoint, "nn checkpoint");
  rec_cmd->add_flag("--target", rec.against_target,
                    "print fidelity against the stored target");
  rec_cmd->add_option("--seed", rec.seed, "mle seed (default 0)");
  rec_cmd->add_option("--mle-restarts", rec.mle_restarts, "mle restarts");
  rec_cmd->add_option("--out", rec.out, "also write the printout here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (gen_cmd->parsed()) return cmd_gen_data(gen);
  if (train_cmd->parsed()) return cmd_train(train);
  if (scaling_cmd->parsed()) return cmd_bench_scaling(scaling);
  if (shots_cmd->parsed()) return cmd_bench_shots(shots);
  if (rec_cmd->parsed()) return cmd_reconstruct(rec);
  return 1;
}
