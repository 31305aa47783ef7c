#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace soc {

// Layer widths [d_0, d_1, ..., d_L] of a feed-forward network with tanh on every
// hidden layer and identity on the output layer.
struct MlpSpec {
  std::vector<Eigen::Index> layer_dims;

  Eigen::Index num_layers() const { return static_cast<Eigen::Index>(layer_dims.size()) - 1; }
  Eigen::Index input_dim() const { return layer_dims.front(); }
  Eigen::Index output_dim() const { return layer_dims.back(); }

  Eigen::Index num_params() const {
    Eigen::Index n = 0;
    for (std::size_t l = 1; l < layer_dims.size(); ++l) n += layer_dims[l] * (layer_dims[l - 1] + 1);
    return n;
  }

  void validate() const {
    if (layer_dims.size() < 2) throw std::invalid_argument("MlpSpec: need at least one layer");
    for (auto d : layer_dims)
      if (d < 1) throw std::invalid_argument("MlpSpec: layer dimensions must be >= 1");
  }

  bool operator==(const MlpSpec&) const = default;
};

// In-place tanh through the vectorized exponential. Saturates cleanly: exp overflow
// gives 1, underflow gives -1.
template <typename Derived>
void tanh_inplace(Eigen::ArrayBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  z = Scalar(1) - Scalar(2) / ((Scalar(2) * z).exp() + Scalar(1));
}

// Feed-forward network phi(x) = A_L tanh(... tanh(A_1 x + b_1) ...) + b_L.
//
// All parameters live in one flat vector, layer by layer: A_l (column-major,
// d_l x d_{l-1}) followed by b_l. Gradients use the same layout, so optimizers,
// Polyak averaging and finite-difference checks work on plain vectors.
//
// Batched calls take one sample per column.
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  struct Gradients {
    Vector params;  // d(upstream . phi) / d theta, summed over the batch
    Matrix inputs;  // d(upstream . phi) / d x, one column per sample
  };

  Mlp() = default;

  explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    params_ = Vector::Zero(spec_.num_params());
  }

  Mlp(MlpSpec spec, Vector params) : Mlp(std::move(spec)) {
    if (params.size() != params_.size()) throw std::invalid_argument("Mlp: parameter count mismatch");
    params_ = std::move(params);
  }

  const MlpSpec& spec() const { return spec_; }
  Eigen::Index num_layers() const { return spec_.num_layers(); }
  Eigen::Index num_params() const { return params_.size(); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  // Layer l in [0, L) maps dimension d_l to d_{l+1}.
  MatrixMap weights(Eigen::Index l) { return MatrixMap(params_.data() + offset(l), rows(l), cols(l)); }
  ConstMatrixMap weights(Eigen::Index l) const {
    return ConstMatrixMap(params_.data() + offset(l), rows(l), cols(l));
  }
  VectorMap bias(Eigen::Index l) { return VectorMap(params_.data() + offset(l) + rows(l) * cols(l), rows(l)); }
  ConstVectorMap bias(Eigen::Index l) const {
    return ConstVectorMap(params_.data() + offset(l) + rows(l) * cols(l), rows(l));
  }

  Matrix forward(const Eigen::Ref<const Matrix>& inputs) const {
    check_inputs(inputs);
    Matrix h = inputs;
    for (Eigen::Index l = 0; l < num_layers(); ++l) {
      Matrix z = weights(l) * h;
      z.colwise() += bias(l);
      if (l + 1 < num_layers()) {
        auto za = z.array();
        tanh_inplace(za);
      }
      h = std::move(z);
    }
    return h;
  }

  // Scalar-in, scalar-out convenience for d_0 = d_L = 1.
  Scalar operator()(Scalar x) const {
    Matrix in(1, 1);
    in(0, 0) = x;
    return forward(in)(0, 0);
  }

  // Forward pass that keeps what backward needs.
  struct Tape {
    std::vector<Matrix> layer_inputs;  // input to layer l, l = 0..L-1
    Matrix outputs;
  };

  Tape record(const Eigen::Ref<const Matrix>& inputs) const {
    check_inputs(inputs);
    const Eigen::Index layers = num_layers();
    Tape tape;
    tape.layer_inputs.resize(static_cast<std::size_t>(layers));
    tape.layer_inputs[0] = inputs;
    for (Eigen::Index l = 0; l < layers; ++l) {
      Matrix z = weights(l) * tape.layer_inputs[static_cast<std::size_t>(l)];
      z.colwise() += bias(l);
      if (l + 1 < layers) {
        auto za = z.array();
        tanh_inplace(za);
        tape.layer_inputs[static_cast<std::size_t>(l + 1)] = std::move(z);
      } else {
        tape.outputs = std::move(z);
      }
    }
    return tape;
  }

  // Reverse-mode gradients of sum_n upstream(:, n) . phi(x_n) for the recorded inputs.
  Gradients backward(const Tape& tape, const Eigen::Ref<const Matrix>& upstream) const {
    if (upstream.rows() != spec_.output_dim() || upstream.cols() != tape.outputs.cols())
      throw std::invalid_argument("Mlp::backward: upstream shape mismatch");
    Gradients grads;
    grads.params = Vector::Zero(num_params());
    Matrix delta = upstream;
    for (Eigen::Index l = num_layers() - 1; l >= 0; --l) {
      const Matrix& a = tape.layer_inputs[static_cast<std::size_t>(l)];
      MatrixMap(grads.params.data() + offset(l), rows(l), cols(l)).noalias() = delta * a.transpose();
      VectorMap(grads.params.data() + offset(l) + rows(l) * cols(l), rows(l)) = delta.rowwise().sum();
      Matrix back = weights(l).transpose() * delta;
      if (l > 0) {
        back.array() *= Scalar(1) - a.array().square();
        delta = std::move(back);
      } else {
        grads.inputs = std::move(back);
      }
    }
    return grads;
  }

  Gradients backward(const Eigen::Ref<const Matrix>& inputs, const Eigen::Ref<const Matrix>& upstream,
                     Matrix* outputs = nullptr) const {
    Tape tape = record(inputs);
    Gradients grads = backward(tape, upstream);
    if (outputs != nullptr) *outputs = std::move(tape.outputs);
    return grads;
  }

 private:
  Eigen::Index rows(Eigen::Index l) const { return spec_.layer_dims[static_cast<std::size_t>(l + 1)]; }
  Eigen::Index cols(Eigen::Index l) const { return spec_.layer_dims[static_cast<std::size_t>(l)]; }
  Eigen::Index offset(Eigen::Index l) const {
    Eigen::Index o = 0;
    for (Eigen::Index k = 0; k < l; ++k) o += rows(k) * (cols(k) + 1);
    return o;
  }
  void check_inputs(const Eigen::Ref<const Matrix>& inputs) const {
    if (inputs.rows() != spec_.input_dim())
      throw std::invalid_argument("Mlp: input has " + std::to_string(inputs.rows()) + " rows, expected " +
                                  std::to_string(spec_.input_dim()));
  }

  MlpSpec spec_;
  Vector params_;
};

// Hidden layers: weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
// Final layer: weights and bias U(-final_layer_halfwidth, final_layer_halfwidth).
template <typename Scalar, typename Rng>
Mlp<Scalar> init_params(const MlpSpec& spec, Scalar final_layer_halfwidth, Rng& rng) {
  if (!(final_layer_halfwidth > 0)) throw std::invalid_argument("init_params: final_layer_halfwidth must be > 0");
  Mlp<Scalar> net(spec);
  const Eigen::Index layers = net.num_layers();
  for (Eigen::Index l = 0; l < layers; ++l) {
    const bool last = l + 1 == layers;
    const Scalar bound =
        last ? final_layer_halfwidth : Scalar(1) / std::sqrt(static_cast<Scalar>(net.weights(l).cols()));
    std::uniform_real_distribution<Scalar> dist(-bound, bound);
    auto w = net.weights(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    auto b = net.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = last ? dist(rng) : Scalar(0);
  }
  return net;
}

template <typename Scalar>
struct AdamState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector first_moment;
  Vector second_moment;
  std::int64_t step = 0;
  Scalar learning_rate = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);

  AdamState() = default;
  AdamState(Eigen::Index num_params, Scalar lr)
      : first_moment(Vector::Zero(num_params)), second_moment(Vector::Zero(num_params)), learning_rate(lr) {}
};

// One bias-corrected Adam step in the descent direction.
template <typename Scalar>
void adam_update(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& params,
                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& grads, AdamState<Scalar>& state) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size())
    throw std::invalid_argument("adam_update: shape mismatch");
  ++state.step;
  state.first_moment = state.beta1 * state.first_moment + (Scalar(1) - state.beta1) * grads;
  state.second_moment = state.beta2 * state.second_moment + (Scalar(1) - state.beta2) * grads.cwiseAbs2();
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, static_cast<Scalar>(state.step));
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, static_cast<Scalar>(state.step));
  params.array() -= state.learning_rate * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + state.epsilon);
}

// target <- rho * target + (1 - rho) * online
template <typename Scalar>
void polyak_average(Mlp<Scalar>& target, const Mlp<Scalar>& online, Scalar rho) {
  target.params() = rho * target.params() + (Scalar(1) - rho) * online.params();
}

}  // namespace soc
