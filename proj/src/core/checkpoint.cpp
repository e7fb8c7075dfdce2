#include "ala/core/checkpoint.hpp"

#include <fstream>

namespace ala::core {

using nlohmann::json;

json to_json(const Checkpoint& ckpt) {
  json tensors = json::array();
  for (const Tensor& t : ckpt.tensors) {
    json data = json::array();
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) data.push_back(t.value(r, c));
    }
    tensors.push_back({{"name", t.name},
                       {"rows", t.value.rows()},
                       {"cols", t.value.cols()},
                       {"data", std::move(data)}});
  }
  return {{"format", "ala-tensors/1"}, {"header", ckpt.header}, {"tensors", tensors}};
}

Checkpoint checkpoint_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "ala-tensors/1") {
    throw LoadError("checkpoint: missing or unknown format tag");
  }
  Checkpoint ckpt;
  ckpt.header = j.value("header", json::object());
  for (const json& jt : j.at("tensors")) {
    const auto rows = jt.at("rows").get<Eigen::Index>();
    const auto cols = jt.at("cols").get<Eigen::Index>();
    const json& data = jt.at("data");
    if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw LoadError("checkpoint: tensor '" + jt.value("name", std::string{}) +
                      "' has inconsistent shape");
    }
    Tensor t{jt.at("name").get<std::string>(), Matrix(rows, cols)};
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) t.value(r, c) = data[k++].get<double>();
    }
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << to_json(ckpt).dump() << '\n';
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw LoadError("checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

json spec_to_json(const NetworkSpec& spec) {
  return {{"sizes", spec.sizes},
          {"hidden", to_string(spec.hidden)},
          {"head", to_string(spec.head)}};
}

NetworkSpec spec_from_json(const json& j) {
  NetworkSpec spec;
  spec.sizes = j.at("sizes").get<std::vector<int>>();
  spec.hidden = activation_from_string(j.at("hidden").get<std::string>());
  spec.head = head_from_string(j.at("head").get<std::string>());
  return spec;
}

Checkpoint network_checkpoint(const Network& net) {
  Checkpoint ckpt;
  ckpt.header = {{"kind", "network"}, {"network", spec_to_json(net.spec())}};
  ckpt.tensors = net.parameters();
  return ckpt;
}

Network network_from_checkpoint(const Checkpoint& ckpt) {
  if (!ckpt.header.contains("network")) {
    throw LoadError("checkpoint has no network architecture header");
  }
  Network net(spec_from_json(ckpt.header.at("network")), 0);
  auto& params = net.parameters();
  if (params.size() != ckpt.tensors.size()) {
    throw LoadError("checkpoint tensor count does not match architecture");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& src = ckpt.tensors[i];
    if (src.name != params[i].name || src.value.rows() != params[i].value.rows() ||
        src.value.cols() != params[i].value.cols()) {
      throw LoadError("checkpoint tensor '" + src.name + "' does not match '" +
                      params[i].name + "' " + shape_str(params[i].value));
    }
    params[i].value = src.value;
  }
  return net;
}

}  // namespace ala::core
