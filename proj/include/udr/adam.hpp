#pragma once

#include <cstddef>

#include "udr/nn.hpp"

namespace udr {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdamState {
  MlpParams first_moment;
  MlpParams second_moment;
  std::size_t step = 0;

  /// Zero moments shaped like `params`.
  static AdamState for_params(const MlpParams& params);
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace udr
