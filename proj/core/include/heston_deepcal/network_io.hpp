#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "heston_deepcal/micronet.hpp"

namespace hdc::nn {

// Versioned JSON document:
// {
//   "format": "heston_deepcal.network", "version": 1,
//   "dims": [n0, ..., nL],
//   "activations": ["identity", ...],        // activation_in per layer
//   "layers": [{"weights": [row-major n_in*n_out], "bias": [n_out]}, ...],
//   "scalers": {"inputs": [{"mean", "std"}, ...], "output": {"mean", "std"}},
//   "metadata": {"<key>": <number>, ...}
// }
// Doubles are written in shortest round-trip form, so load(save(x)) == x bit for bit.
struct NetworkDocument {
  ScaledNetwork model;
  std::map<std::string, double> metadata;
};

std::string to_json(const NetworkDocument& doc);
NetworkDocument network_from_json(const std::string& text);

void save_network(const NetworkDocument& doc, const std::filesystem::path& path);
NetworkDocument load_network(const std::filesystem::path& path);

}  // namespace hdc::nn
