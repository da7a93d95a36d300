#include "smartmixed/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "smartmixed/errors.hpp"

namespace smartmixed {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian");

constexpr const char* kFormatTag = "smartmixed-checkpoint";
constexpr int kFormatVersion = 1;

struct TensorRef {
  std::string name;
  const double* data;
  std::size_t rows;
  std::size_t cols;
};

void collect_layers(const std::vector<DenseLayer>& layers,
                    std::vector<TensorRef>& refs) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    refs.push_back({"layers." + std::to_string(l) + ".w", layers[l].w.data.data(),
                    layers[l].w.rows, layers[l].w.cols});
    refs.push_back({"layers." + std::to_string(l) + ".b", layers[l].b.data(),
                    1, layers[l].b.size()});
  }
}

json tensor_directory(const std::vector<TensorRef>& refs) {
  json dir = json::array();
  for (const TensorRef& t : refs) {
    dir.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  return dir;
}

void write_file(const std::string& path, const json& header,
                const std::vector<TensorRef>& refs) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw IoError("cannot write '" + path + "'");
  }
  f << header.dump() << '\n';
  for (const TensorRef& t : refs) {
    f.write(reinterpret_cast<const char*>(t.data),
            static_cast<std::streamsize>(t.rows * t.cols * sizeof(double)));
  }
  if (!f) {
    throw IoError("short write to '" + path + "'");
  }
}

json activation_params_json(const ActivationParams& p) {
  return {{"leaky_slope", p.leaky_slope},
          {"elu_alpha", p.elu_alpha},
          {"selu_lambda", p.selu_lambda},
          {"selu_alpha", p.selu_alpha}};
}

ActivationParams activation_params_from_json(const json& j) {
  ActivationParams p;
  p.leaky_slope = j.at("leaky_slope").get<double>();
  p.elu_alpha = j.at("elu_alpha").get<double>();
  p.selu_lambda = j.at("selu_lambda").get<double>();
  p.selu_alpha = j.at("selu_alpha").get<double>();
  return p;
}

json base_header(const std::vector<std::size_t>& architecture,
                 const char* phase, const ActivationParams& params,
                 const std::string& config_echo_json) {
  json header;
  header["format"] = kFormatTag;
  header["version"] = kFormatVersion;
  header["phase"] = phase;
  header["architecture"] = architecture;
  header["activation_params"] = activation_params_json(params);
  if (!config_echo_json.empty()) {
    header["config"] = json::parse(config_echo_json);
  }
  return header;
}

}  // namespace

void save_checkpoint(const std::string& path, const NetworkPhase1& net,
                     const std::string& config_echo_json) {
  std::vector<TensorRef> refs;
  collect_layers(net.layers, refs);
  for (std::size_t l = 0; l < net.selections.size(); ++l) {
    const Matrix& logits = net.selections[l].logits;
    refs.push_back({"selections." + std::to_string(l) + ".logits",
                    logits.data.data(), logits.rows, logits.cols});
  }
  json header = base_header(net.architecture, "phase1", net.params,
                            config_echo_json);
  header["tau"] = net.tau;
  header["eps"] = net.eps;
  header["tensors"] = tensor_directory(refs);
  write_file(path, header, refs);
}

void save_checkpoint(const std::string& path, const NetworkMixed& net,
                     const std::string& config_echo_json) {
  std::vector<TensorRef> refs;
  collect_layers(net.layers, refs);
  json header = base_header(net.architecture, "mixed", net.params,
                            config_echo_json);
  json assignment = json::array();
  for (const auto& kinds : net.assignment.layers) {
    json names = json::array();
    for (ActivationKind kind : kinds) {
      names.push_back(activation_name(kind));
    }
    assignment.push_back(std::move(names));
  }
  header["assignment"] = std::move(assignment);
  header["tensors"] = tensor_directory(refs);
  write_file(path, header, refs);
}

namespace {

struct LoadedTensor {
  std::string name;
  Matrix value;
};

std::vector<LoadedTensor> read_tensors(std::ifstream& f, const json& header,
                                       const std::string& path) {
  std::vector<LoadedTensor> tensors;
  for (const json& t : header.at("tensors")) {
    LoadedTensor lt;
    lt.name = t.at("name").get<std::string>();
    const auto rows = t.at("rows").get<std::size_t>();
    const auto cols = t.at("cols").get<std::size_t>();
    lt.value = Matrix(rows, cols);
    f.read(reinterpret_cast<char*>(lt.value.data.data()),
           static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!f) {
      throw CheckpointError("'" + path + "': truncated tensor payload");
    }
    tensors.push_back(std::move(lt));
  }
  f.peek();
  if (!f.eof()) {
    throw CheckpointError("'" + path + "': trailing bytes after payload");
  }
  return tensors;
}

Matrix take_tensor(std::vector<LoadedTensor>& tensors, const std::string& name,
                   std::size_t rows, std::size_t cols,
                   const std::string& path) {
  for (LoadedTensor& t : tensors) {
    if (t.name == name) {
      if (t.value.rows != rows || t.value.cols != cols) {
        throw CheckpointError("'" + path + "': tensor '" + name +
                              "' has unexpected shape");
      }
      return std::move(t.value);
    }
  }
  throw CheckpointError("'" + path + "': tensor '" + name + "' missing");
}

std::vector<DenseLayer> rebuild_layers(
    const std::vector<std::size_t>& architecture,
    std::vector<LoadedTensor>& tensors, const std::string& path) {
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < architecture.size(); ++l) {
    DenseLayer layer;
    layer.w = take_tensor(tensors, "layers." + std::to_string(l) + ".w",
                          architecture[l + 1], architecture[l], path);
    Matrix b = take_tensor(tensors, "layers." + std::to_string(l) + ".b", 1,
                           architecture[l + 1], path);
    layer.b = std::move(b.data);
    layers.push_back(std::move(layer));
  }
  return layers;
}

}  // namespace

AnyNetwork load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw IoError("cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(f, line)) {
    throw CheckpointError("'" + path + "': missing header line");
  }
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw CheckpointError("'" + path + "': bad header: " + e.what());
  }
  try {
    if (header.at("format").get<std::string>() != kFormatTag) {
      throw CheckpointError("'" + path + "': not a checkpoint file");
    }
    if (header.at("version").get<int>() != kFormatVersion) {
      throw CheckpointError("'" + path + "': unsupported version");
    }
    const auto architecture =
        header.at("architecture").get<std::vector<std::size_t>>();
    const auto phase = header.at("phase").get<std::string>();
    std::vector<LoadedTensor> tensors = read_tensors(f, header, path);

    if (phase == "phase1") {
      NetworkPhase1 net;
      net.architecture = architecture;
      net.params = activation_params_from_json(header.at("activation_params"));
      net.layers = rebuild_layers(architecture, tensors, path);
      for (std::size_t l = 1; l + 1 < architecture.size(); ++l) {
        SelectionState sel(architecture[l]);
        sel.logits = take_tensor(
            tensors, "selections." + std::to_string(l - 1) + ".logits",
            architecture[l], kActivationCount, path);
        net.selections.push_back(std::move(sel));
      }
      net.set_temperature(header.at("tau").get<double>(),
                          header.at("eps").get<double>());
      return net;
    }
    if (phase == "mixed") {
      NetworkMixed net;
      net.architecture = architecture;
      net.params = activation_params_from_json(header.at("activation_params"));
      net.layers = rebuild_layers(architecture, tensors, path);
      for (const json& names : header.at("assignment")) {
        std::vector<ActivationKind> kinds;
        for (const json& name : names) {
          kinds.push_back(activation_from_name(name.get<std::string>()));
        }
        net.assignment.layers.push_back(std::move(kinds));
      }
      if (net.assignment.layers.size() + 2 != architecture.size()) {
        throw CheckpointError("'" + path + "': assignment depth mismatch");
      }
      for (std::size_t l = 0; l < net.assignment.layers.size(); ++l) {
        if (net.assignment.layers[l].size() != architecture[l + 1]) {
          throw CheckpointError("'" + path + "': assignment width mismatch");
        }
      }
      net.groups = build_groups(net.assignment);
      return net;
    }
    throw CheckpointError("'" + path + "': unknown phase '" + phase + "'");
  } catch (const json::exception& e) {
    throw CheckpointError("'" + path + "': bad header: " + e.what());
  }
}

namespace {

std::uint64_t fnv_bytes(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t checksum_layers(std::uint64_t h,
                              const std::vector<DenseLayer>& layers) {
  for (const DenseLayer& layer : layers) {
    h = fnv_bytes(h, layer.w.data.data(), layer.w.size() * sizeof(double));
    h = fnv_bytes(h, layer.b.data(), layer.b.size() * sizeof(double));
  }
  return h;
}

}  // namespace

std::uint64_t parameter_checksum(const NetworkPhase1& net) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  h = checksum_layers(h, net.layers);
  for (const SelectionState& sel : net.selections) {
    h = fnv_bytes(h, sel.logits.data.data(),
                  sel.logits.size() * sizeof(double));
  }
  return h;
}

std::uint64_t parameter_checksum(const NetworkMixed& net) {
  return checksum_layers(0xCBF29CE484222325ULL, net.layers);
}

}  // namespace smartmixed
