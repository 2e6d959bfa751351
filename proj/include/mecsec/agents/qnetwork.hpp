#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mecsec/core/error.hpp"
#include "mecsec/core/rng.hpp"

namespace mecsec::agents {

// Layer sizes of the Q-network: two 1-D convolutions over the time axis of a
// window x features input, then two fully connected layers. ReLU after every
// hidden layer, linear output.
struct NetSpec {
  std::size_t window = 8;
  std::size_t features = 5;  // state_dim + 1 action column
  std::size_t conv1_filters = 8;
  std::size_t conv1_kernel = 3;
  std::size_t conv2_filters = 8;
  std::size_t conv2_kernel = 3;
  std::size_t hidden = 32;
  std::size_t actions = 12;

  bool operator==(const NetSpec&) const = default;

  std::size_t conv1_length() const { return window - conv1_kernel + 1; }
  std::size_t conv2_length() const { return conv1_length() - conv2_kernel + 1; }
  std::size_t flat_size() const { return conv2_length() * conv2_filters; }
  std::size_t input_size() const { return window * features; }

  void validate() const {
    if (window == 0 || features == 0 || conv1_filters == 0 || conv2_filters == 0 || hidden == 0 || actions == 0 ||
        conv1_kernel == 0 || conv2_kernel == 0)
      throw ContractViolation("NetSpec: all sizes must be positive");
    if (conv1_kernel > window || conv2_kernel > conv1_length())
      throw ContractViolation("NetSpec: kernels longer than the time axis");
  }

  std::string signature() const {
    std::ostringstream os;
    os << "window=" << window << " features=" << features << " conv1=" << conv1_filters << "x" << conv1_kernel
       << " conv2=" << conv2_filters << "x" << conv2_kernel << " hidden=" << hidden << " actions=" << actions;
    return os.str();
  }
};

struct TensorInfo {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

class QNetwork {
 public:
  // Intermediate activations of one forward pass, reused across calls.
  struct Cache {
    std::vector<double> input, z1, a1, z2, a2, z3, a3, out;
  };

  explicit QNetwork(NetSpec spec) : spec_(spec) {
    spec_.validate();
    const auto add = [this](std::string name, std::vector<std::size_t> shape) {
      std::size_t n = 1;
      for (auto d : shape) n *= d;
      tensors_.push_back({std::move(name), std::move(shape), total_, n});
      total_ += n;
    };
    add("conv1.weight", {spec_.conv1_filters, spec_.features, spec_.conv1_kernel});
    add("conv1.bias", {spec_.conv1_filters});
    add("conv2.weight", {spec_.conv2_filters, spec_.conv1_filters, spec_.conv2_kernel});
    add("conv2.bias", {spec_.conv2_filters});
    add("fc1.weight", {spec_.hidden, spec_.flat_size()});
    add("fc1.bias", {spec_.hidden});
    add("fc2.weight", {spec_.actions, spec_.hidden});
    add("fc2.bias", {spec_.actions});
    params_.assign(total_, 0.0);
  }

  // He-uniform weights, zero biases.
  void initialize(SeededRng& rng) {
    const std::size_t fan_in[4] = {spec_.features * spec_.conv1_kernel, spec_.conv1_filters * spec_.conv2_kernel,
                                   spec_.flat_size(), spec_.hidden};
    for (std::size_t layer = 0; layer < 4; ++layer) {
      const TensorInfo& w = tensors_[2 * layer];
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in[layer]));
      for (std::size_t i = 0; i < w.size; ++i) params_[w.offset + i] = (2.0 * rng.uniform() - 1.0) * bound;
      const TensorInfo& b = tensors_[2 * layer + 1];
      std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(b.offset), b.size, 0.0);
    }
  }

  const NetSpec& spec() const noexcept { return spec_; }
  const std::vector<TensorInfo>& tensors() const noexcept { return tensors_; }
  std::size_t parameter_count() const noexcept { return total_; }
  std::vector<double>& parameters() noexcept { return params_; }
  const std::vector<double>& parameters() const noexcept { return params_; }

  std::span<double> tensor(const std::string& name) {
    for (const auto& t : tensors_)
      if (t.name == name) return {params_.data() + t.offset, t.size};
    throw ContractViolation("QNetwork: no tensor named " + name);
  }

  // Input layout: row-major window x features (time-major).
  const std::vector<double>& forward(std::span<const double> input, Cache& c) const {
    if (input.size() != spec_.input_size())
      throw ContractViolation("QNetwork::forward: input has " + std::to_string(input.size()) + " values, expected " +
                              std::to_string(spec_.input_size()));
    const std::size_t C = spec_.features, F1 = spec_.conv1_filters, K1 = spec_.conv1_kernel;
    const std::size_t F2 = spec_.conv2_filters, K2 = spec_.conv2_kernel;
    const std::size_t L1 = spec_.conv1_length(), L2 = spec_.conv2_length();
    const std::size_t D = spec_.flat_size(), H = spec_.hidden, A = spec_.actions;
    const double* w1 = &params_[tensors_[0].offset];
    const double* b1 = &params_[tensors_[1].offset];
    const double* w2 = &params_[tensors_[2].offset];
    const double* b2 = &params_[tensors_[3].offset];
    const double* w3 = &params_[tensors_[4].offset];
    const double* b3 = &params_[tensors_[5].offset];
    const double* w4 = &params_[tensors_[6].offset];
    const double* b4 = &params_[tensors_[7].offset];

    c.input.assign(input.begin(), input.end());
    c.z1.assign(L1 * F1, 0.0);
    c.a1.assign(L1 * F1, 0.0);
    for (std::size_t t = 0; t < L1; ++t)
      for (std::size_t f = 0; f < F1; ++f) {
        double z = b1[f];
        for (std::size_t ch = 0; ch < C; ++ch)
          for (std::size_t j = 0; j < K1; ++j) z += w1[(f * C + ch) * K1 + j] * input[(t + j) * C + ch];
        c.z1[t * F1 + f] = z;
        c.a1[t * F1 + f] = z > 0.0 ? z : 0.0;
      }
    c.z2.assign(L2 * F2, 0.0);
    c.a2.assign(L2 * F2, 0.0);
    for (std::size_t t = 0; t < L2; ++t)
      for (std::size_t f = 0; f < F2; ++f) {
        double z = b2[f];
        for (std::size_t ch = 0; ch < F1; ++ch)
          for (std::size_t j = 0; j < K2; ++j) z += w2[(f * F1 + ch) * K2 + j] * c.a1[(t + j) * F1 + ch];
        c.z2[t * F2 + f] = z;
        c.a2[t * F2 + f] = z > 0.0 ? z : 0.0;
      }
    c.z3.assign(H, 0.0);
    c.a3.assign(H, 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      double z = b3[h];
      for (std::size_t d = 0; d < D; ++d) z += w3[h * D + d] * c.a2[d];
      c.z3[h] = z;
      c.a3[h] = z > 0.0 ? z : 0.0;
    }
    c.out.assign(A, 0.0);
    for (std::size_t a = 0; a < A; ++a) {
      double z = b4[a];
      for (std::size_t h = 0; h < H; ++h) z += w4[a * H + h] * c.a3[h];
      c.out[a] = z;
    }
    return c.out;
  }

  std::vector<double> forward(std::span<const double> input) const {
    Cache c;
    return forward(input, c);
  }

  // Accumulates dLoss/dparams into grad given dLoss/dout for the pass in c.
  void backward(const Cache& c, std::span<const double> dout, std::vector<double>& grad) const {
    if (dout.size() != spec_.actions) throw ContractViolation("QNetwork::backward: gradient length != action count");
    if (grad.size() != total_) grad.assign(total_, 0.0);
    const std::size_t C = spec_.features, F1 = spec_.conv1_filters, K1 = spec_.conv1_kernel;
    const std::size_t F2 = spec_.conv2_filters, K2 = spec_.conv2_kernel;
    const std::size_t L1 = spec_.conv1_length(), L2 = spec_.conv2_length();
    const std::size_t D = spec_.flat_size(), H = spec_.hidden, A = spec_.actions;
    const double* w2 = &params_[tensors_[2].offset];
    const double* w3 = &params_[tensors_[4].offset];
    const double* w4 = &params_[tensors_[6].offset];
    double* gw1 = &grad[tensors_[0].offset];
    double* gb1 = &grad[tensors_[1].offset];
    double* gw2 = &grad[tensors_[2].offset];
    double* gb2 = &grad[tensors_[3].offset];
    double* gw3 = &grad[tensors_[4].offset];
    double* gb3 = &grad[tensors_[5].offset];
    double* gw4 = &grad[tensors_[6].offset];
    double* gb4 = &grad[tensors_[7].offset];

    std::vector<double> dz3(H, 0.0);
    for (std::size_t a = 0; a < A; ++a) {
      if (dout[a] == 0.0) continue;
      gb4[a] += dout[a];
      for (std::size_t h = 0; h < H; ++h) {
        gw4[a * H + h] += dout[a] * c.a3[h];
        dz3[h] += w4[a * H + h] * dout[a];
      }
    }
    for (std::size_t h = 0; h < H; ++h)
      if (c.z3[h] <= 0.0) dz3[h] = 0.0;

    std::vector<double> dz2(D, 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      if (dz3[h] == 0.0) continue;
      gb3[h] += dz3[h];
      for (std::size_t d = 0; d < D; ++d) {
        gw3[h * D + d] += dz3[h] * c.a2[d];
        dz2[d] += w3[h * D + d] * dz3[h];
      }
    }
    for (std::size_t d = 0; d < D; ++d)
      if (c.z2[d] <= 0.0) dz2[d] = 0.0;

    std::vector<double> dz1(L1 * F1, 0.0);
    for (std::size_t t = 0; t < L2; ++t)
      for (std::size_t f = 0; f < F2; ++f) {
        const double g = dz2[t * F2 + f];
        if (g == 0.0) continue;
        gb2[f] += g;
        for (std::size_t ch = 0; ch < F1; ++ch)
          for (std::size_t j = 0; j < K2; ++j) {
            gw2[(f * F1 + ch) * K2 + j] += g * c.a1[(t + j) * F1 + ch];
            dz1[(t + j) * F1 + ch] += w2[(f * F1 + ch) * K2 + j] * g;
          }
      }
    for (std::size_t i = 0; i < dz1.size(); ++i)
      if (c.z1[i] <= 0.0) dz1[i] = 0.0;

    for (std::size_t t = 0; t < L1; ++t)
      for (std::size_t f = 0; f < F1; ++f) {
        const double g = dz1[t * F1 + f];
        if (g == 0.0) continue;
        gb1[f] += g;
        for (std::size_t ch = 0; ch < C; ++ch)
          for (std::size_t j = 0; j < K1; ++j) gw1[(f * C + ch) * K1 + j] += g * c.input[(t + j) * C + ch];
      }
  }

  void sgd_step(const std::vector<double>& grad, double lr) {
    expects(grad.size() == total_, "sgd_step: gradient size mismatch");
    for (std::size_t i = 0; i < total_; ++i) params_[i] -= lr * grad[i];
  }

 private:
  NetSpec spec_;
  std::vector<TensorInfo> tensors_;
  std::size_t total_ = 0;
  std::vector<double> params_;
};

inline std::vector<double> net_forward(const QNetwork& net, std::span<const double> input) { return net.forward(input); }

}  // namespace mecsec::agents
