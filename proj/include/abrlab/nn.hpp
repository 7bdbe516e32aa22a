#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace abrlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Head { kSoftmax, kLinear };

/// Activations recorded by a forward pass; consumed by Mlp::backward.
struct ForwardCache {
  std::vector<Matrix> inputs;  // input to each layer, samples as columns
  bool valid() const { return !inputs.empty(); }
};

struct MlpGrads {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  void set_zero();
  double max_abs() const;
};

/// Dense network with tanh hidden layers. The head only labels how the raw
/// final-layer outputs are interpreted; forward() always returns them raw
/// (logits for a softmax head).
class Mlp {
 public:
  Mlp() = default;
  /// All parameters zero.
  Mlp(std::vector<std::size_t> layer_dims, Head head);

  /// Xavier-uniform weights and zero biases; `zero_last_layer` zeroes the
  /// output layer so a softmax head starts uniform.
  static Mlp xavier(std::vector<std::size_t> layer_dims, Head head, std::mt19937_64& rng,
                    bool zero_last_layer);

  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  Head head() const { return head_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  std::size_t num_layers() const { return weights_.size(); }
  std::size_t num_parameters() const;

  std::vector<Matrix>& weights() { return weights_; }
  std::vector<Vector>& biases() { return biases_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Vector>& biases() const { return biases_; }

  /// x: input_dim x batch. Returns output_dim x batch. Throws
  /// std::invalid_argument on a dimension mismatch.
  Matrix forward(const Matrix& x, ForwardCache* cache = nullptr) const;

  /// Accumulates d loss / d parameters into `grads` given d loss / d outputs
  /// for the batch recorded in `cache`. Throws ContractViolation when the
  /// cache holds no forward pass.
  void backward(const ForwardCache& cache, const Matrix& grad_output, MlpGrads& grads) const;

  MlpGrads zero_grads() const;
  bool all_finite() const;

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  std::vector<std::size_t> dims_;
  Head head_ = Head::kLinear;
  std::vector<Matrix> weights_;  // out x in
  std::vector<Vector> biases_;
};

/// Column-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);
/// Column-wise log-softmax with max subtraction.
Matrix log_softmax(const Matrix& logits);

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  std::vector<Matrix> m_weights, v_weights;
  std::vector<Vector> m_biases, v_biases;
  std::int64_t step = 0;

  static AdamState for_net(const Mlp& net);
};

/// One bias-corrected Adam step. Throws DivergenceError on a non-finite
/// gradient, leaving the parameters untouched.
void adam_step(Mlp& net, AdamState& state, const MlpGrads& grads, double lr);

/// Separate actor (softmax over levels) and critic (scalar) networks, each
/// with its own optimizer state.
struct PolicyValueNet {
  Mlp actor;
  Mlp critic;
  AdamState actor_opt;
  AdamState critic_opt;

  /// actor = [features, hidden..., levels], critic = [features, hidden..., 1].
  static PolicyValueNet create(std::size_t feature_dim, std::size_t levels,
                               const std::vector<std::size_t>& hidden, std::uint64_t seed);
  static PolicyValueNet from_networks(Mlp actor, Mlp critic);

  std::vector<double> forward_policy(std::span<const double> features) const;
  double forward_value(std::span<const double> features) const;
};

Matrix column(std::span<const double> features);

}  // namespace abrlab
