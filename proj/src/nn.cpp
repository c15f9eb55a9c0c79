#include "udr/nn.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace udr {

std::vector<std::size_t> MlpSpec::layer_dims() const {
  std::vector<std::size_t> dims;
  dims.reserve(hidden_widths.size() + 2);
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden_widths.begin(), hidden_widths.end());
  dims.push_back(output_dim);
  return dims;
}

void MlpSpec::validate() const {
  for (std::size_t w : layer_dims()) {
    if (w == 0) throw std::invalid_argument("MlpSpec: every layer width must be >= 1");
  }
  if (out_lo && out_hi && !(*out_lo < *out_hi)) {
    throw std::invalid_argument("MlpSpec: need out_lo < out_hi (got " + std::to_string(*out_lo) +
                                ", " + std::to_string(*out_hi) + ")");
  }
}

MlpParams MlpParams::zeros_like() const {
  MlpParams z;
  z.layers.reserve(layers.size());
  for (const auto& l : layers) {
    z.layers.push_back({Matrix(l.weight.rows(), l.weight.cols()),
                        std::vector<double>(l.bias.size(), 0.0)});
  }
  return z;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

bool MlpParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.all_finite()) return false;
    for (double b : l.bias)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

MlpParams init_params(const MlpSpec& spec, RngStream& rng) {
  spec.validate();
  const auto dims = spec.layer_dims();
  MlpParams p;
  p.layers.reserve(dims.size() - 1);
  for (std::size_t l = 1; l < dims.size(); ++l) {
    const double scale = std::sqrt(2.0 / static_cast<double>(dims[l - 1]));
    Matrix w(dims[l], dims[l - 1]);
    for (double& v : w.data()) v = scale * rng.normal();
    p.layers.push_back({std::move(w), std::vector<double>(dims[l], 0.0)});
  }
  return p;
}

void check_shapes(const MlpSpec& spec, const MlpParams& params) {
  const auto dims = spec.layer_dims();
  if (params.layers.size() + 1 != dims.size()) {
    throw std::invalid_argument("MlpParams: expected " + std::to_string(dims.size() - 1) +
                                " layers, got " + std::to_string(params.layers.size()));
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    if (layer.weight.rows() != dims[l + 1] || layer.weight.cols() != dims[l] ||
        layer.bias.size() != dims[l + 1]) {
      throw std::invalid_argument("MlpParams: layer " + std::to_string(l) + " has weight " +
                                  layer.weight.shape_string() + ", expected (" +
                                  std::to_string(dims[l + 1]) + "x" + std::to_string(dims[l]) +
                                  ")");
    }
  }
}

namespace {

void check_input(const MlpSpec& spec, const Matrix& X) {
  if (X.cols() != spec.input_dim) {
    throw std::invalid_argument("forward: input has " + std::to_string(X.cols()) +
                                " columns, network expects " + std::to_string(spec.input_dim));
  }
}

void relu_inplace(Matrix& m) {
  for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
}

double clamp_output(const MlpSpec& spec, double v) {
  if (spec.out_lo && v < *spec.out_lo) return *spec.out_lo;
  if (spec.out_hi && v > *spec.out_hi) return *spec.out_hi;
  return v;
}

bool clamp_passes_gradient(const MlpSpec& spec, double raw) {
  if (spec.out_lo && !(raw > *spec.out_lo)) return false;
  if (spec.out_hi && !(raw < *spec.out_hi)) return false;
  return true;
}

}  // namespace

Matrix forward(const MlpSpec& spec, const MlpParams& params, const Matrix& X) {
  check_input(spec, X);
  check_shapes(spec, params);
  Matrix a = X;
  Matrix z;
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l <= last; ++l) {
    kernels::affine(a, params.layers[l].weight, params.layers[l].bias, z);
    if (l < last) relu_inplace(z);
    std::swap(a, z);
  }
  if (spec.out_lo || spec.out_hi) {
    for (double& v : a.data()) v = clamp_output(spec, v);
  }
  return a;
}

LossAndGrad loss_and_grad(const MlpSpec& spec, const MlpParams& params, const Matrix& X,
                          const OutputLoss& loss_fn) {
  check_input(spec, X);
  check_shapes(spec, params);
  const std::size_t n_layers = params.layers.size();

  // acts[l] is the input to layer l (acts[0] = X); the pre-activation of a
  // hidden layer is recoverable from its relu output for the mask (z > 0
  // iff relu(z) > 0), so only post-activations are kept.
  std::vector<Matrix> acts(n_layers);
  acts[0] = X;
  Matrix raw;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Matrix z;
    kernels::affine(acts[l], params.layers[l].weight, params.layers[l].bias, z);
    if (l + 1 < n_layers) {
      relu_inplace(z);
      acts[l + 1] = std::move(z);
    } else {
      raw = std::move(z);
    }
  }
  Matrix out = raw;
  if (spec.out_lo || spec.out_hi) {
    for (double& v : out.data()) v = clamp_output(spec, v);
  }

  Matrix g(out.rows(), out.cols());
  const double loss = loss_fn(out, g);
  if (!std::isfinite(loss)) throw NumericalError("loss_and_grad: non-finite loss", 0);
  if (g.rows() != out.rows() || g.cols() != out.cols()) {
    throw std::invalid_argument("loss_and_grad: loss gradient has shape " + g.shape_string() +
                                ", outputs are " + out.shape_string());
  }
  if (spec.out_lo || spec.out_hi) {
    auto gd = g.data();
    auto rd = raw.data();
    for (std::size_t i = 0; i < gd.size(); ++i)
      if (!clamp_passes_gradient(spec, rd[i])) gd[i] = 0.0;
  }

  LossAndGrad result{loss, params.zeros_like()};
  for (std::size_t l = n_layers; l-- > 0;) {
    auto& grad_layer = result.grads.layers[l];
    kernels::accumulate_outer(g, acts[l], grad_layer.weight);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      const auto gi = g.row(i);
      for (std::size_t o = 0; o < gi.size(); ++o) grad_layer.bias[o] += gi[o];
    }
    if (l == 0) break;
    Matrix prev;
    kernels::gemm(g, params.layers[l].weight, prev);
    auto pd = prev.data();
    auto ad = acts[l].data();
    for (std::size_t i = 0; i < pd.size(); ++i)
      if (!(ad[i] > 0.0)) pd[i] = 0.0;
    g = std::move(prev);
  }
  return result;
}

std::vector<double> MlpModel::predict_scalar(const Matrix& X) const {
  return predict(X).col(0);
}

double lipschitz_upper_bound(const MlpParams& params) {
  double bound = 1.0;
  for (const auto& l : params.layers) bound *= frobenius_norm(l.weight);
  return bound;
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch, RngStream rng)
    : n_(n), batch_(batch), rng_(std::move(rng)), order_(n) {
  if (n == 0 || batch == 0) throw std::invalid_argument("BatchSampler: n and batch must be >= 1");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (batch_ >= n_) {
    current_ = order_;
  } else {
    reshuffle();
  }
}

void BatchSampler::reshuffle() {
  shuffle(rng_, order_);
  pos_ = 0;
}

const std::vector<std::size_t>& BatchSampler::next() {
  if (batch_ >= n_) {
    ++epoch_;
    return current_;
  }
  // A trailing partial slice is dropped so every step sees a full batch.
  if (pos_ + batch_ > n_) {
    reshuffle();
    ++epoch_;
  }
  current_.assign(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  order_.begin() + static_cast<std::ptrdiff_t>(pos_ + batch_));
  pos_ += batch_;
  return current_;
}

void save_params(std::ostream& os, const MlpParams& params) {
  os << std::setprecision(17);
  os << params.layers.size() << '\n';
  for (const auto& l : params.layers) os << l.weight.rows() << '\n' << l.weight.cols() << '\n';
  for (const auto& l : params.layers) {
    for (double v : l.weight.data()) os << v << '\n';
    for (double v : l.bias) os << v << '\n';
  }
}

MlpParams load_params(std::istream& is) {
  auto read_count = [&is](const char* what) {
    long long v = 0;
    if (!(is >> v) || v < 0) {
      throw std::runtime_error(std::string("load_params: bad or missing ") + what);
    }
    return static_cast<std::size_t>(v);
  };
  const std::size_t n_layers = read_count("layer count");
  std::vector<std::pair<std::size_t, std::size_t>> shapes(n_layers);
  for (auto& [r, c] : shapes) {
    r = read_count("weight rows");
    c = read_count("weight cols");
  }
  MlpParams p;
  for (const auto& [r, c] : shapes) {
    Layer layer{Matrix(r, c), std::vector<double>(r)};
    for (double& v : layer.weight.data())
      if (!(is >> v)) throw std::runtime_error("load_params: truncated weight block");
    for (double& v : layer.bias)
      if (!(is >> v)) throw std::runtime_error("load_params: truncated bias block");
    p.layers.push_back(std::move(layer));
  }
  return p;
}

void save_params(const std::string& path, const MlpParams& params) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_params: cannot open " + path);
  save_params(os, params);
  if (!os) throw std::runtime_error("save_params: write failed for " + path);
}

MlpParams load_params(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_params: cannot open " + path);
  return load_params(is);
}

}  // namespace udr
