#include "udr/adam.hpp"

#include <cmath>
#include <span>
#include <stdexcept>

namespace udr {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("AdamConfig: learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("AdamConfig: betas must lie in (0, 1)");
  }
  if (!(epsilon >= 0.0)) throw std::invalid_argument("AdamConfig: epsilon must be >= 0");
}

AdamState AdamState::for_params(const MlpParams& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

namespace {

void update_block(std::span<double> p, std::span<const double> g, std::span<double> m,
                  std::span<double> v, const AdamConfig& cfg, double c1, double c2) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    const double denom = std::sqrt(v_hat) + cfg.epsilon;
    // With epsilon = 0 a coordinate that has never seen a gradient stays put.
    if (denom > 0.0) p[i] -= cfg.learning_rate * m_hat / denom;
  }
}

}  // namespace

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (grads.layers.size() != params.layers.size() ||
      state.first_moment.layers.size() != params.layers.size()) {
    throw std::invalid_argument("adam_step: parameter, gradient and state layouts differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    auto& m = state.first_moment.layers[l];
    auto& v = state.second_moment.layers[l];
    if (g.weight.size() != p.weight.size() || g.bias.size() != p.bias.size()) {
      throw std::invalid_argument("adam_step: gradient shape mismatch in layer " +
                                  std::to_string(l));
    }
    update_block(p.weight.data(), g.weight.data(), m.weight.data(), v.weight.data(), cfg, c1, c2);
    update_block(p.bias, g.bias, m.bias, v.bias, cfg, c1, c2);
  }
}

}  // namespace udr
