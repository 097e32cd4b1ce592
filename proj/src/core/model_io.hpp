#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "core/codec.hpp"

namespace wmkit {

// Training metadata recorded in the model file alongside the parameters.
struct TrainInfo {
  bool trained = false;
  bool adversarial = false;
  int epochs = 0;
  int batch_size = 0;
  double learning_rate = 0.0;
  std::uint64_t seed = 0;
};

// Versioned JSON document: codec kind, n, all parameters, optional training
// metadata. Serialization is deterministic — keys emitted in sorted order,
// floats printed with 17 significant digits, 64-bit seeds/keys as decimal
// strings — so identical codecs produce byte-identical files.
std::string codec_to_json(const Codec& codec, const TrainInfo* train = nullptr);
std::unique_ptr<Codec> codec_from_json(const std::string& text, TrainInfo* train = nullptr);

void save_codec(const Codec& codec, const std::string& path, const TrainInfo* train = nullptr);
std::unique_ptr<Codec> load_codec(const std::string& path, TrainInfo* train = nullptr);

}  // namespace wmkit
