#include "abrlab/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "abrlab/error.hpp"

namespace abrlab {

void MlpGrads::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

double MlpGrads::max_abs() const {
  double m = 0.0;
  for (const auto& w : weights) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : biases) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

Mlp::Mlp(std::vector<std::size_t> layer_dims, Head head) : dims_(std::move(layer_dims)), head_(head) {
  if (dims_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output dims");
  for (auto d : dims_) {
    if (d == 0) throw std::invalid_argument("Mlp layer dims must be positive");
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const auto out = static_cast<Eigen::Index>(dims_[l + 1]);
    const auto in = static_cast<Eigen::Index>(dims_[l]);
    weights_.push_back(Matrix::Zero(out, in));
    biases_.push_back(Vector::Zero(out));
  }
}

Mlp Mlp::xavier(std::vector<std::size_t> layer_dims, Head head, std::mt19937_64& rng,
                bool zero_last_layer) {
  Mlp net(std::move(layer_dims), head);
  for (std::size_t l = 0; l < net.weights_.size(); ++l) {
    if (zero_last_layer && l + 1 == net.weights_.size()) break;
    auto& w = net.weights_[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major fill order keeps the draw sequence independent of storage order.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
  }
  return net;
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

Matrix Mlp::forward(const Matrix& x, ForwardCache* cache) const {
  if (static_cast<std::size_t>(x.rows()) != input_dim()) {
    throw std::invalid_argument("Mlp::forward: expected " + std::to_string(input_dim()) +
                                " features, got " + std::to_string(x.rows()));
  }
  if (cache) cache->inputs.clear();
  Matrix a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix z = weights_[l] * a;
    z.colwise() += biases_[l];
    if (cache) cache->inputs.push_back(std::move(a));
    if (l + 1 < weights_.size()) {
      a = z.array().tanh().matrix();
    } else {
      a = std::move(z);
    }
  }
  return a;
}

void Mlp::backward(const ForwardCache& cache, const Matrix& grad_output, MlpGrads& grads) const {
  if (!cache.valid() || cache.inputs.size() != weights_.size()) {
    throw ContractViolation("Mlp::backward without a matching forward pass");
  }
  if (static_cast<std::size_t>(grad_output.rows()) != output_dim() ||
      grad_output.cols() != cache.inputs.front().cols()) {
    throw std::invalid_argument("Mlp::backward: gradient shape does not match the forward batch");
  }
  if (grads.weights.size() != weights_.size()) grads = zero_grads();
  Matrix g = grad_output;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const Matrix& input = cache.inputs[l];
    grads.weights[l].noalias() += g * input.transpose();
    grads.biases[l] += g.rowwise().sum();
    if (l > 0) {
      Matrix upstream = weights_[l].transpose() * g;
      // input is tanh(z) of the previous layer: d tanh = 1 - tanh^2.
      g = (upstream.array() * (1.0 - input.array().square())).matrix();
    }
  }
}

MlpGrads Mlp::zero_grads() const {
  MlpGrads g;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    g.weights.push_back(Matrix::Zero(weights_[l].rows(), weights_[l].cols()));
    g.biases.push_back(Vector::Zero(biases_[l].size()));
  }
  return g;
}

bool Mlp::all_finite() const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  }
  return true;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.dims_ != b.dims_ || a.head_ != b.head_) return false;
  for (std::size_t l = 0; l < a.weights_.size(); ++l) {
    if (a.weights_[l] != b.weights_[l] || a.biases_[l] != b.biases_[l]) return false;
  }
  return true;
}

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    out.col(c) = (logits.col(c).array() - m).exp().matrix();
    out.col(c) /= out.col(c).sum();
  }
  return out;
}

Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    const double lse = m + std::log((logits.col(c).array() - m).exp().sum());
    out.col(c) = logits.col(c).array() - lse;
  }
  return out;
}

AdamState AdamState::for_net(const Mlp& net) {
  AdamState s;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto& w = net.weights()[l];
    s.m_weights.push_back(Matrix::Zero(w.rows(), w.cols()));
    s.v_weights.push_back(Matrix::Zero(w.rows(), w.cols()));
    s.m_biases.push_back(Vector::Zero(w.rows()));
    s.v_biases.push_back(Vector::Zero(w.rows()));
  }
  return s;
}

void adam_step(Mlp& net, AdamState& state, const MlpGrads& grads, double lr) {
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite()) {
      throw DivergenceError("adam_step: non-finite gradient in layer " + std::to_string(l));
    }
  }
  if (state.m_weights.size() != net.num_layers()) state = AdamState::for_net(net);
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, t);
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = AdamState::kBeta1 * m + (1.0 - AdamState::kBeta1) * g;
    v = AdamState::kBeta2 * v + (1.0 - AdamState::kBeta2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + AdamState::kEpsilon);
  };
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    update(net.weights()[l], state.m_weights[l], state.v_weights[l], grads.weights[l]);
    update(net.biases()[l], state.m_biases[l], state.v_biases[l], grads.biases[l]);
  }
}

PolicyValueNet PolicyValueNet::create(std::size_t feature_dim, std::size_t levels,
                                      const std::vector<std::size_t>& hidden, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> actor_dims{feature_dim};
  actor_dims.insert(actor_dims.end(), hidden.begin(), hidden.end());
  std::vector<std::size_t> critic_dims = actor_dims;
  actor_dims.push_back(levels);
  critic_dims.push_back(1);
  auto actor = Mlp::xavier(actor_dims, Head::kSoftmax, rng, true);
  auto critic = Mlp::xavier(critic_dims, Head::kLinear, rng, false);
  return from_networks(std::move(actor), std::move(critic));
}

PolicyValueNet PolicyValueNet::from_networks(Mlp actor, Mlp critic) {
  if (actor.input_dim() != critic.input_dim()) {
    throw std::invalid_argument("actor and critic input dims differ");
  }
  if (critic.output_dim() != 1) throw std::invalid_argument("critic must have a scalar output");
  PolicyValueNet net;
  net.actor_opt = AdamState::for_net(actor);
  net.critic_opt = AdamState::for_net(critic);
  net.actor = std::move(actor);
  net.critic = std::move(critic);
  return net;
}

Matrix column(std::span<const double> features) {
  Matrix x(static_cast<Eigen::Index>(features.size()), 1);
  for (std::size_t i = 0; i < features.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = features[i];
  return x;
}

std::vector<double> PolicyValueNet::forward_policy(std::span<const double> features) const {
  const Matrix p = softmax(actor.forward(column(features)));
  return {p.data(), p.data() + p.size()};
}

double PolicyValueNet::forward_value(std::span<const double> features) const {
  return critic.forward(column(features))(0, 0);
}

}  // namespace abrlab
