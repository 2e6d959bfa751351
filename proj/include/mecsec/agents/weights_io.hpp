#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "mecsec/agents/qnetwork.hpp"
#include "mecsec/core/error.hpp"

namespace mecsec::agents {

// Text weights file:
//   line 1: "mecsec-qnetwork <version>"
//   line 2: layer-spec signature
//   then one line per tensor: name, shape (d0xd1x...), row-major values (%.17g)
inline constexpr const char* kWeightsTag = "mecsec-qnetwork";
inline constexpr int kWeightsVersion = 1;

class WeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
  return s;
}

inline void write_weights(std::ostream& os, const QNetwork& net) {
  os << kWeightsTag << ' ' << kWeightsVersion << '\n' << net.spec().signature() << '\n';
  char buf[32];
  for (const auto& t : net.tensors()) {
    os << t.name << ' ' << shape_string(t.shape);
    for (std::size_t i = 0; i < t.size; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", net.parameters()[t.offset + i]);
      os << ' ' << buf;
    }
    os << '\n';
  }
}

inline void save_weights(const std::string& path, const QNetwork& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw WeightsError("cannot open " + path + " for writing");
  write_weights(os, net);
  if (!os) throw WeightsError("write failed: " + path);
}

// Loads into `net`, whose spec must match the file exactly.
inline void read_weights(std::istream& is, QNetwork& net) {
  std::string line;
  if (!std::getline(is, line)) throw WeightsError("weights file is empty");
  {
    std::istringstream hs(line);
    std::string tag;
    int version = -1;
    hs >> tag >> version;
    if (tag != kWeightsTag) throw WeightsError("not a weights file (tag '" + tag + "')");
    if (version != kWeightsVersion)
      throw WeightsError("unsupported weights version " + std::to_string(version) + ", expected " +
                         std::to_string(kWeightsVersion));
  }
  if (!std::getline(is, line)) throw WeightsError("missing layer-spec line");
  if (line != net.spec().signature())
    throw WeightsError("layer spec mismatch: expected [" + net.spec().signature() + "], found [" + line + "]");
  std::vector<double> params(net.parameter_count());
  for (const auto& t : net.tensors()) {
    if (!std::getline(is, line)) throw WeightsError("missing tensor " + t.name);
    std::istringstream ts(line);
    std::string name, shape;
    ts >> name >> shape;
    if (name != t.name) throw WeightsError("expected tensor " + t.name + ", found " + name);
    if (shape != shape_string(t.shape))
      throw WeightsError("tensor " + t.name + ": expected shape " + shape_string(t.shape) + ", found " + shape);
    for (std::size_t i = 0; i < t.size; ++i) {
      std::string tok;
      if (!(ts >> tok)) throw WeightsError("tensor " + t.name + ": too few values");
      params[t.offset + i] = std::strtod(tok.c_str(), nullptr);
    }
    std::string extra;
    if (ts >> extra) throw WeightsError("tensor " + t.name + ": too many values");
  }
  net.parameters() = std::move(params);
}

inline void load_weights(const std::string& path, QNetwork& net) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw WeightsError("cannot open " + path);
  read_weights(is, net);
}

}  // namespace mecsec::agents
