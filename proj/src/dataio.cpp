#include "dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace qst {

namespace {

using nlohmann::json;

std::string seventeen_digits(double v) {
  if (!std::isfinite(v)) fail(Error::Code::numeric, "non-finite value");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string shortest_digits(double v) {
  if (!std::isfinite(v)) fail(Error::Code::numeric, "non-finite value");
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Write-to-temp-then-rename so readers never observe a partial file.
void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      fail(Error::Code::io, "cannot open '" + tmp + "' for writing");
    out.write(contents.data(),
              static_cast<std::streamsize>(contents.size()));
    if (!out) fail(Error::Code::io, "write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    fail(Error::Code::io,
         "cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Error::Code::io, "cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const unsigned char* data, std::size_t size) {
  std::string out;
  out.reserve((size + 2) / 3 * 4);
  for (std::size_t i = 0; i < size; i += 3) {
    unsigned int chunk = data[i] << 16;
    if (i + 1 < size) chunk |= data[i + 1] << 8;
    if (i + 2 < size) chunk |= data[i + 2];
    out.push_back(kBase64Alphabet[(chunk >> 18) & 63]);
    out.push_back(kBase64Alphabet[(chunk >> 12) & 63]);
    out.push_back(i + 1 < size ? kBase64Alphabet[(chunk >> 6) & 63] : '=');
    out.push_back(i + 2 < size ? kBase64Alphabet[chunk & 63] : '=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0)
    fail(Error::Code::format, "base64 payload has invalid length");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      const char c = text[i + j];
      if (c == '=' && i + 4 == text.size() && j >= 2) {
        vals[j] = 0;
        ++pad;
      } else {
        vals[j] = value_of(c);
        if (vals[j] < 0)
          fail(Error::Code::format, "base64 payload has invalid characters");
      }
    }
    const unsigned int chunk = (vals[0] << 18) | (vals[1] << 12) |
                               (vals[2] << 6) | vals[3];
    out.push_back((chunk >> 16) & 0xff);
    if (pad < 2) out.push_back((chunk >> 8) & 0xff);
    if (pad < 1) out.push_back(chunk & 0xff);
  }
  return out;
}

// Little-endian float64 payload, row-major traversal.
std::string encode_tensor(const Eigen::MatrixXd& m) {
  std::vector<unsigned char> bytes(sizeof(double) * m.size());
  std::size_t offset = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      std::memcpy(bytes.data() + offset, &v, sizeof(double));
      offset += sizeof(double);
    }
  return base64_encode(bytes.data(), bytes.size());
}

void decode_tensor(const json& node, Eigen::MatrixXd& m,
                   const std::string& name) {
  if (!node.is_object() || !node.contains("shape") || !node.contains("data"))
    fail(Error::Code::format,
         "corrupt checkpoint: tensor '" + name + "' is malformed");
  const auto& shape = node.at("shape");
  if (!shape.is_array() || shape.size() != 2)
    fail(Error::Code::format,
         "corrupt checkpoint: tensor '" + name + "' has no 2-entry shape");
  const Eigen::Index rows = shape[0].get<Eigen::Index>();
  const Eigen::Index cols = shape[1].get<Eigen::Index>();
  if (rows != m.rows() || cols != m.cols())
    fail(Error::Code::format,
         "corrupt checkpoint: tensor '" + name + "' has shape " +
             std::to_string(rows) + "x" + std::to_string(cols) +
             ", expected " + std::to_string(m.rows()) + "x" +
             std::to_string(m.cols()));
  const std::vector<unsigned char> bytes =
      base64_decode(node.at("data").get<std::string>());
  if (bytes.size() != sizeof(double) * static_cast<std::size_t>(m.size()))
    fail(Error::Code::format,
         "corrupt checkpoint: tensor '" + name + "' payload size mismatch");
  std::size_t offset = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v;
      std::memcpy(&v, bytes.data() + offset, sizeof(double));
      m(r, c) = v;
      offset += sizeof(double);
    }
}

void append_vector(std::string& out, const RVector& values) {
  out.push_back('[');
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += seventeen_digits(values(i));
  }
  out.push_back(']');
}

json parse_json(const std::string& text, const std::string& context) {
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded())
    fail(Error::Code::format, context + ": invalid JSON");
  return parsed;
}

RVector vector_field(const json& object, const char* key,
                     Eigen::Index expected, const std::string& context) {
  if (!object.contains(key) || !object.at(key).is_array())
    fail(Error::Code::format,
         context + ": missing or non-array field '" + key + "'");
  const auto& arr = object.at(key);
  if (static_cast<Eigen::Index>(arr.size()) != expected)
    fail(Error::Code::format,
         context + ": field '" + key + "' has length " +
             std::to_string(arr.size()) + ", expected " +
             std::to_string(expected));
  RVector values(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    if (!arr[i].is_number())
      fail(Error::Code::format,
           context + ": field '" + key + "' has a non-numeric entry");
    values(i) = arr[i].get<double>();
  }
  return values;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::string& path) {
  dimension(dataset.qubits);
  std::string out;
  out.reserve(64 + dataset.samples.size() * 1024);
  out += "{\"version\":" + std::to_string(kDatasetFormatVersion) +
         ",\"d\":" + std::to_string(dataset.qubits) + ",\"provenance\":\"" +
         dataset.provenance.to_string() +
         "\",\"count\":" + std::to_string(dataset.samples.size()) + "}\n";
  for (const Sample& sample : dataset.samples) {
    out += "{\"m\":";
    append_vector(out, sample.measurements);
    out += ",\"tau\":";
    append_vector(out, sample.target_tau);
    out += "}\n";
  }
  atomic_write(path, out);
}

Dataset load_dataset(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream lines(text);
  std::string line;

  if (!std::getline(lines, line))
    fail(Error::Code::format, path + ": empty file, header expected");
  const json header = parse_json(line, path + ", line 1");
  if (!header.contains("version") || !header.at("version").is_number_integer())
    fail(Error::Code::format, path + ", line 1: missing format version");
  const int version = header.at("version").get<int>();
  if (version != kDatasetFormatVersion)
    fail(Error::Code::format,
         path + ": unsupported dataset format version " +
             std::to_string(version));
  if (!header.contains("d") || !header.contains("provenance") ||
      !header.contains("count"))
    fail(Error::Code::format,
         path + ", line 1: header needs d, provenance and count");

  Dataset dataset;
  std::int64_t count = 0;
  try {
    dataset.qubits = header.at("d").get<int>();
    dataset.provenance =
        Provenance::parse(header.at("provenance").get<std::string>());
    count = header.at("count").get<std::int64_t>();
  } catch (const json::exception& e) {
    fail(Error::Code::format,
         path + ", line 1: malformed header (" + std::string(e.what()) + ")");
  }
  dimension(dataset.qubits);
  if (count < 0)
    fail(Error::Code::format, path + ": negative sample count in header");

  Eigen::Index m_len = 1, tau_len = 1;
  for (int i = 0; i < dataset.qubits; ++i) {
    m_len *= 6;
    tau_len *= 4;
  }

  dataset.samples.reserve(static_cast<std::size_t>(count));
  std::size_t line_number = 1;
  while (std::getline(lines, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string context = path + ", line " + std::to_string(line_number);
    const json object = parse_json(line, context);
    Sample sample;
    sample.measurements = vector_field(object, "m", m_len, context);
    sample.target_tau = vector_field(object, "tau", tau_len, context);
    dataset.samples.push_back(std::move(sample));
  }
  if (dataset.samples.size() != static_cast<std::size_t>(count))
    fail(Error::Code::format,
         path + ": header announces " + std::to_string(count) +
             " samples but the file holds " +
             std::to_string(dataset.samples.size()));
  return dataset;
}

void save_model(const ModelParams& model,
                const std::vector<EpochStats>& history,
                const std::string& path) {
  const NetworkConfig& c = model.config;
  json root;
  root["version"] = kCheckpointFormatVersion;
  root["config"] = {
      {"qubits", c.qubits},
      {"conv1_filters", c.conv1_filters},
      {"conv2_filters", c.conv2_filters},
      {"kernel_size", c.kernel_size},
      {"pool_size", c.pool_size},
      {"dense1_units", c.dense1_units},
      {"dense2_units", c.dense2_units},
      {"dropout_rate", c.dropout_rate},
      {"learning_rate", c.learning_rate},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"seed", c.seed},
  };

  auto dump_tensors = [](const TensorSet& tensors) {
    json node;
    for (TensorRef ref : tensor_entries(const_cast<TensorSet&>(tensors))) {
      Eigen::MatrixXd m =
          ref.matrix ? *ref.matrix : Eigen::MatrixXd(*ref.vector);
      node[ref.name] = {{"shape", {m.rows(), m.cols()}},
                        {"data", encode_tensor(m)}};
    }
    return node;
  };
  root["weights"] = dump_tensors(model.weights);
  root["accumulators"] = dump_tensors(model.accumulators);

  json hist = json::array();
  for (const EpochStats& stats : history)
    hist.push_back({{"epoch", stats.epoch},
                    {"train_loss", stats.train_loss},
                    {"val_fidelity", stats.val_fidelity},
                    {"seconds", stats.seconds}});
  root["history"] = std::move(hist);

  atomic_write(path, root.dump() + "\n");
}

LoadedModel load_model(const std::string& path) {
  const json root = parse_json(read_file(path), path);
  if (!root.is_object() || !root.contains("version") ||
      !root.at("version").is_number_integer())
    fail(Error::Code::format, path + ": corrupt checkpoint, no version");
  const int version = root.at("version").get<int>();
  if (version != kCheckpointFormatVersion)
    fail(Error::Code::format,
         path + ": unsupported checkpoint format version " +
             std::to_string(version));
  if (!root.contains("config") || !root.contains("weights") ||
      !root.contains("accumulators"))
    fail(Error::Code::format, path + ": corrupt checkpoint, missing section");

  NetworkConfig config;
  try {
    const json& c = root.at("config");
    config.qubits = c.at("qubits").get<int>();
    config.conv1_filters = c.at("conv1_filters").get<int>();
    config.conv2_filters = c.at("conv2_filters").get<int>();
    config.kernel_size = c.at("kernel_size").get<int>();
    config.pool_size = c.at("pool_size").get<int>();
    config.dense1_units = c.at("dense1_units").get<int>();
    config.dense2_units = c.at("dense2_units").get<int>();
    config.dropout_rate = c.at("dropout_rate").get<double>();
    config.learning_rate = c.at("learning_rate").get<double>();
    config.batch_size = c.at("batch_size").get<int>();
    config.epochs = c.at("epochs").get<int>();
    config.seed = c.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(Error::Code::format,
         path + ": corrupt checkpoint config (" + e.what() + ")");
  }
  try {
    config.validate();
  } catch (const Error& e) {
    fail(Error::Code::format,
         path + ": corrupt checkpoint config (" + std::string(e.what()) + ")");
  }

  // Size the tensors from the config, then overwrite from the payloads so
  // shape mismatches are detected against the declared configuration.
  LoadedModel loaded;
  loaded.model = initialize_model(config);

  auto read_tensors = [&](const char* section, TensorSet& tensors) {
    const json& node = root.at(section);
    for (TensorRef ref : tensor_entries(tensors)) {
      if (!node.contains(ref.name))
        fail(Error::Code::format,
             path + ": corrupt checkpoint, tensor '" +
                 std::string(ref.name) + "' missing from " + section);
      if (ref.matrix) {
        decode_tensor(node.at(ref.name), *ref.matrix, ref.name);
      } else {
        Eigen::MatrixXd column(ref.vector->size(), 1);
        decode_tensor(node.at(ref.name), column, ref.name);
        *ref.vector = column.col(0);
      }
    }
  };
  try {
    read_tensors("weights", loaded.model.weights);
    read_tensors("accumulators", loaded.model.accumulators);
  } catch (const json::exception& e) {
    fail(Error::Code::format,
         path + ": corrupt checkpoint tensors (" + std::string(e.what()) +
             ")");
  }

  if (root.contains("history") && root.at("history").is_array()) {
    for (const json& item : root.at("history")) {
      if (!item.is_object()) continue;
      EpochStats stats;
      stats.epoch = item.value("epoch", 0);
      stats.train_loss = item.value("train_loss", 0.0);
      stats.val_fidelity = item.value("val_fidelity", 0.0);
      stats.seconds = item.value("seconds", 0.0);
      loaded.history.push_back(stats);
    }
  }
  return loaded;
}

void write_results(const ResultsTable& table, const std::string& path) {
  std::vector<ResultRow> rows = table.rows;
  const auto key = [](const ResultRow& r) {
    return std::tie(r.method, r.qubits, r.shots, r.noise_p, r.state_index,
                    r.seed);
  };
  std::sort(rows.begin(), rows.end(),
            [&](const ResultRow& a, const ResultRow& b) {
              return key(a) < key(b);
            });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ResultRow& r = rows[i];
    if (!(r.fidelity >= 0.0 && r.fidelity <= 1.0))
      fail(Error::Code::invalid_argument,
           "fidelity " + std::to_string(r.fidelity) + " for method '" +
               r.method + "' lies outside [0, 1]");
    if (i > 0) {
      const ResultRow& p = rows[i - 1];
      if (p.method == r.method && p.qubits == r.qubits &&
          p.shots == r.shots && p.noise_p == r.noise_p &&
          p.state_index == r.state_index)
        fail(Error::Code::invalid_argument,
             "duplicate results row for method '" + r.method + "', d=" +
                 std::to_string(r.qubits) + ", shots=" +
                 std::to_string(r.shots) + ", state " +
                 std::to_string(r.state_index));
    }
  }

  std::string out = "method,d,shots,noise_p,state_index,fidelity,wall_time_s,seed\n";
  for (const ResultRow& r : rows) {
    out += r.method;
    out += ',';
    out += std::to_string(r.qubits);
    out += ',';
    out += std::to_string(r.shots);
    out += ',';
    out += shortest_digits(r.noise_p);
    out += ',';
    out += std::to_string(r.state_index);
    out += ',';
    out += shortest_digits(r.fidelity);
    out += ',';
    out += shortest_digits(r.wall_time_s);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  atomic_write(path, out);
}

}  // namespace qst
