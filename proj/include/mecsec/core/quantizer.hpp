#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mecsec/core/error.hpp"

namespace mecsec {

// Uniform binning of [lo, hi] into `bins` cells. Inputs outside the range
// clamp to the edge bins; x == hi lands in the last bin.
class Quantizer {
 public:
  Quantizer(double lo, double hi, std::size_t bins) : lo_(lo), hi_(hi), bins_(bins) {
    if (!(hi > lo)) throw ContractViolation("Quantizer: requires hi > lo");
    if (bins == 0) throw ContractViolation("Quantizer: requires bins > 0");
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t bins() const noexcept { return bins_; }

  std::size_t operator()(double x) const noexcept {
    if (!(x > lo_)) return 0;  // also maps NaN to bin 0
    if (x >= hi_) return bins_ - 1;
    const auto idx = static_cast<std::size_t>(std::floor((x - lo_) / (hi_ - lo_) * static_cast<double>(bins_)));
    return idx < bins_ ? idx : bins_ - 1;
  }

 private:
  double lo_;
  double hi_;
  std::size_t bins_;
};

inline std::size_t quantize(const Quantizer& q, double x) { return q(x); }

// Row-major mixed-radix composition: the last field varies fastest.
inline std::size_t state_index(std::span<const std::size_t> bins_per_field,
                               std::span<const std::size_t> field_bins) {
  expects(bins_per_field.size() == field_bins.size(), "state_index: field count mismatch");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < bins_per_field.size(); ++i) {
    expects(bins_per_field[i] > 0, "state_index: zero radix");
    if (field_bins[i] >= bins_per_field[i])
      throw ContractViolation("state_index: field " + std::to_string(i) + " bin " +
                              std::to_string(field_bins[i]) + " >= " + std::to_string(bins_per_field[i]));
    idx = idx * bins_per_field[i] + field_bins[i];
  }
  return idx;
}

inline std::size_t state_count(std::span<const std::size_t> bins_per_field) {
  std::size_t n = 1;
  for (auto b : bins_per_field) n *= b;
  return n;
}

inline std::vector<std::size_t> decode_state_index(std::span<const std::size_t> bins_per_field, std::size_t index) {
  expects(index < state_count(bins_per_field), "decode_state_index: index out of range");
  std::vector<std::size_t> out(bins_per_field.size());
  for (std::size_t i = bins_per_field.size(); i-- > 0;) {
    out[i] = index % bins_per_field[i];
    index /= bins_per_field[i];
  }
  return out;
}

}  // namespace mecsec
