#include "heston_deepcal/network_io.hpp"

#include <json.hpp>

#include "heston_deepcal/error.hpp"
#include "heston_deepcal/io.hpp"

namespace hdc::nn {

namespace {

constexpr const char* kFormat = "heston_deepcal.network";
constexpr int kVersion = 1;

nlohmann::ordered_json scaler_json(const Scaler& s) { return {{"mean", s.mean}, {"std", s.std}}; }

Scaler scaler_from(const nlohmann::json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

}  // namespace

std::string to_json(const NetworkDocument& doc) {
  const auto& net = doc.model.net;
  net.validate();
  nlohmann::ordered_json out;
  out["format"] = kFormat;
  out["version"] = kVersion;
  std::vector<std::size_t> dims{net.input_dim()};
  std::vector<std::string> activations;
  auto layers = nlohmann::ordered_json::array();
  for (const auto& layer : net.layers) {
    dims.push_back(layer.n_out());
    activations.push_back(to_string(layer.activation_in));
    std::vector<double> w(layer.weights.data(), layer.weights.data() + layer.weights.size());
    std::vector<double> b(layer.bias.data(), layer.bias.data() + layer.bias.size());
    layers.push_back({{"weights", w}, {"bias", b}});
  }
  out["dims"] = dims;
  out["activations"] = activations;
  out["layers"] = layers;
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& s : doc.model.input_scalers) inputs.push_back(scaler_json(s));
  out["scalers"] = {{"inputs", inputs}, {"output", scaler_json(doc.model.output_scaler)}};
  auto meta = nlohmann::ordered_json::object();
  for (const auto& [key, value] : doc.metadata) meta[key] = value;
  out["metadata"] = meta;
  return out.dump(2) + "\n";
}

NetworkDocument network_from_json(const std::string& text) {
  NetworkDocument doc;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kFormat)
      fail(ErrorCode::ParseError, "not a network document (format tag mismatch)");
    if (j.at("version").get<int>() != kVersion)
      fail(ErrorCode::ParseError, "unsupported network document version");
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    const auto activations = j.at("activations").get<std::vector<std::string>>();
    const auto& layers = j.at("layers");
    if (dims.size() < 2 || activations.size() != dims.size() - 1 || layers.size() != dims.size() - 1)
      fail(ErrorCode::ShapeMismatch, "network document dims/activations/layers disagree");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      const auto w = layers[l].at("weights").get<std::vector<double>>();
      const auto b = layers[l].at("bias").get<std::vector<double>>();
      if (w.size() != dims[l] * dims[l + 1] || b.size() != dims[l + 1])
        fail(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " arrays do not match dims");
      DenseLayer layer;
      layer.weights = Eigen::Map<const Matrix>(w.data(), static_cast<Eigen::Index>(dims[l]),
                                               static_cast<Eigen::Index>(dims[l + 1]));
      layer.bias = Eigen::Map<const RowVector>(b.data(), static_cast<Eigen::Index>(b.size()));
      layer.activation_in = parse_activation(activations[l]);
      doc.model.net.layers.push_back(std::move(layer));
    }
    const auto& scalers = j.at("scalers");
    for (const auto& s : scalers.at("inputs")) doc.model.input_scalers.push_back(scaler_from(s));
    doc.model.output_scaler = scaler_from(scalers.at("output"));
    if (doc.model.input_scalers.size() != dims.front())
      fail(ErrorCode::ShapeMismatch, "input scaler count differs from the input width");
    if (j.contains("metadata"))
      for (const auto& [key, value] : j.at("metadata").items()) doc.metadata[key] = value.get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("network document: ") + e.what());
  }
  doc.model.net.validate();
  return doc;
}

void save_network(const NetworkDocument& doc, const std::filesystem::path& path) {
  io::write_atomic(path, to_json(doc));
}

NetworkDocument load_network(const std::filesystem::path& path) {
  return network_from_json(io::read_text(path));
}

}  // namespace hdc::nn
