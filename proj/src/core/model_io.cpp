#include "core/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/qim_codec.hpp"
#include "core/spread_codec.hpp"

namespace wmkit {

namespace {

void append_double(std::string& out, double v) {
  if (!std::isfinite(v)) fail(Err::domain, "model serialization: non-finite parameter");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_u64(std::string& out, std::uint64_t v) {
  out += '"';
  out += std::to_string(v);
  out += '"';
}

void append_train(std::string& out, const TrainInfo& t) {
  out += "\"train\":{\"adversarial\":";
  out += t.adversarial ? "true" : "false";
  out += ",\"batch_size\":" + std::to_string(t.batch_size);
  out += ",\"epochs\":" + std::to_string(t.epochs);
  out += ",\"learning_rate\":";
  append_double(out, t.learning_rate);
  out += ",\"seed\":";
  append_u64(out, t.seed);
  out += ",\"trained\":";
  out += t.trained ? "true" : "false";
  out += "}";
}

std::uint64_t parse_u64(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_string()) return std::stoull(v.get<std::string>());
  return v.get<std::uint64_t>();
}

}  // namespace

std::string codec_to_json(const Codec& codec, const TrainInfo* train) {
  std::string out;
  if (const auto* qim = dynamic_cast<const DwtDctQimCodec*>(&codec)) {
    out += "{\"delta\":";
    append_double(out, qim->delta());
    out += ",\"format_version\":1,\"key\":";
    append_u64(out, qim->key());
    out += ",\"kind\":\"dwt-dct-qim\",\"n\":" + std::to_string(qim->n());
    if (train) {
      out += ",";
      append_train(out, *train);
    }
    out += "}\n";
    return out;
  }
  if (const auto* ss = dynamic_cast<const SpreadSpectrumCodec*>(&codec)) {
    const SpreadParams& p = ss->params();
    out.reserve(p.P.size() * 20 + 1024);
    out += "{\"alpha\":";
    append_double(out, p.alpha);
    out += ",\"biases\":[";
    for (int i = 0; i < p.n; ++i) {
      if (i) out += ',';
      append_double(out, p.b(i));
    }
    out += "],\"format_version\":1,\"gains\":[";
    for (int i = 0; i < p.n; ++i) {
      if (i) out += ',';
      append_double(out, p.g(i));
    }
    out += "],\"height\":" + std::to_string(p.h);
    out += ",\"kind\":\"spread-spectrum\",\"n\":" + std::to_string(p.n);
    out += ",\"patterns\":[";
    const auto cols = static_cast<Eigen::Index>(p.N());
    for (int i = 0; i < p.n; ++i) {
      if (i) out += ',';
      out += '[';
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (j) out += ',';
        append_double(out, p.P(i, j));
      }
      out += ']';
    }
    out += ']';
    if (train) {
      out += ",";
      append_train(out, *train);
    }
    out += ",\"width\":" + std::to_string(p.w);
    out += "}\n";
    return out;
  }
  fail(Err::invalid_argument, "codec_to_json: unknown codec kind " + codec.kind());
}

std::unique_ptr<Codec> codec_from_json(const std::string& text, TrainInfo* train) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Err::format, std::string("model parse: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != 1)
      fail(Err::format, "model parse: unsupported format_version");
    if (train) {
      *train = TrainInfo{};
      if (j.contains("train")) {
        const auto& t = j["train"];
        train->trained = t.at("trained").get<bool>();
        train->adversarial = t.at("adversarial").get<bool>();
        train->epochs = t.at("epochs").get<int>();
        train->batch_size = t.at("batch_size").get<int>();
        train->learning_rate = t.at("learning_rate").get<double>();
        train->seed = parse_u64(t, "seed");
      }
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "dwt-dct-qim") {
      return std::make_unique<DwtDctQimCodec>(j.at("n").get<int>(), j.at("delta").get<double>(),
                                              parse_u64(j, "key"));
    }
    if (kind == "spread-spectrum") {
      SpreadParams p;
      p.n = j.at("n").get<int>();
      p.h = j.at("height").get<int>();
      p.w = j.at("width").get<int>();
      p.alpha = j.at("alpha").get<double>();
      const auto cols = static_cast<Eigen::Index>(p.N());
      if (p.n < 1 || p.h < 1 || p.w < 1) fail(Err::format, "model parse: bad dims");
      p.P.resize(p.n, cols);
      p.g.resize(p.n);
      p.b.resize(p.n);
      const auto& pats = j.at("patterns");
      const auto& gains = j.at("gains");
      const auto& biases = j.at("biases");
      if (static_cast<int>(pats.size()) != p.n || static_cast<int>(gains.size()) != p.n ||
          static_cast<int>(biases.size()) != p.n)
        fail(Err::format, "model parse: parameter count mismatch");
      for (int i = 0; i < p.n; ++i) {
        const auto& row = pats[i];
        if (static_cast<Eigen::Index>(row.size()) != cols)
          fail(Err::format, "model parse: pattern length mismatch");
        for (Eigen::Index c = 0; c < cols; ++c) p.P(i, c) = row[c].get<double>();
        p.g(i) = gains[i].get<double>();
        p.b(i) = biases[i].get<double>();
      }
      return std::make_unique<SpreadSpectrumCodec>(std::move(p));
    }
    fail(Err::format, "model parse: unknown kind " + kind);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Err::format, std::string("model parse: ") + e.what());
  }
}

void save_codec(const Codec& codec, const std::string& path, const TrainInfo* train) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Err::io, "cannot open for write: " + path);
  const std::string doc = codec_to_json(codec, train);
  f.write(doc.data(), static_cast<std::streamsize>(doc.size()));
  if (!f) fail(Err::io, "write failed: " + path);
}

std::unique_ptr<Codec> load_codec(const std::string& path, TrainInfo* train) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Err::io, "cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return codec_from_json(ss.str(), train);
}

}  // namespace wmkit
