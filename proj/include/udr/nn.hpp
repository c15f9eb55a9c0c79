#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "udr/matrix.hpp"
#include "udr/rng.hpp"

namespace udr {

/// Architecture of a relu multi-layer perceptron.
///
/// `hidden_widths.size()` is the depth (number of hidden layers). The output
/// layer is affine; when `out_lo` / `out_hi` are set the output is clamped to
/// that range, which is how the bounded hypothesis classes are realised.
struct MlpSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_widths;
  std::size_t output_dim = 1;
  std::optional<double> out_lo;
  std::optional<double> out_hi;

  std::size_t depth() const { return hidden_widths.size(); }
  std::size_t layer_count() const { return hidden_widths.size() + 1; }
  /// Width of every layer, input first, output last.
  std::vector<std::size_t> layer_dims() const;
  /// Throws std::invalid_argument when a width is zero or the bounds are inverted.
  void validate() const;
};

struct Layer {
  Matrix weight;  // (fan_out x fan_in)
  std::vector<double> bias;
  friend bool operator==(const Layer&, const Layer&) = default;
};

struct MlpParams {
  std::vector<Layer> layers;

  /// Zero-filled parameters with the same shapes.
  MlpParams zeros_like() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Error raised when training or integration produces a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// He-style initialisation: weights ~ N(0, 2 / fan_in), biases zero.
MlpParams init_params(const MlpSpec& spec, RngStream& rng);

/// Throws if `params` does not match the layer shapes of `spec`.
void check_shapes(const MlpSpec& spec, const MlpParams& params);

/// Network output for every row of X, clamped if the spec has bounds.
Matrix forward(const MlpSpec& spec, const MlpParams& params, const Matrix& X);

/// A scalar loss of the network outputs: fills `grad` (same shape as
/// `outputs`) with dLoss/dOutputs and returns the loss.
using OutputLoss = std::function<double(const Matrix& outputs, Matrix& grad)>;

struct LossAndGrad {
  double loss = 0.0;
  MlpParams grads;
};

/// Reverse-mode gradient of `loss_fn(forward(X))` with respect to every
/// weight and bias. Relu and the output clamp pass gradient only strictly
/// inside their active region. Throws NumericalError on a non-finite loss.
LossAndGrad loss_and_grad(const MlpSpec& spec, const MlpParams& params, const Matrix& X,
                          const OutputLoss& loss_fn);

/// Trained network: architecture plus parameters.
struct MlpModel {
  MlpSpec spec;
  MlpParams params;

  Matrix predict(const Matrix& X) const { return forward(spec, params, X); }
  /// First output column as a vector.
  std::vector<double> predict_scalar(const Matrix& X) const;
};

/// Product of per-layer Frobenius norms; an upper bound on the Lipschitz
/// constant of the unclamped network.
double lipschitz_upper_bound(const MlpParams& params);

/// Epoch-wise mini-batch index stream: shuffles once per epoch and hands out
/// consecutive slices without replacement. When batch >= n every batch is
/// the whole set in natural order.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, RngStream rng);
  const std::vector<std::size_t>& next();
  std::size_t epoch() const { return epoch_; }

 private:
  void reshuffle();

  std::size_t n_;
  std::size_t batch_;
  RngStream rng_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> current_;
  std::size_t pos_ = 0;
  std::size_t epoch_ = 0;
};

// Parameter snapshot: plain text, one value per line. The layer count, then
// (rows, cols) of each weight matrix, then for each layer its weights in
// row-major order followed by its bias.
void save_params(std::ostream& os, const MlpParams& params);
MlpParams load_params(std::istream& is);
void save_params(const std::string& path, const MlpParams& params);
MlpParams load_params(const std::string& path);

}  // namespace udr
