#pragma once

#include <algorithm>
#include <cmath>

namespace abrlab::verify {

template <typename LossFn, typename GradFn>
double max_relative_error(Mlp& net, LossFn&& loss, GradFn&& analytic) {
  const MlpGrads grads = analytic();
  double worst = 0.0;
  auto probe = [&](double& param, double exact) {
    const double saved = param;
    param = saved + kGradcheckStep;
    const double up = loss();
    param = saved - kGradcheckStep;
    const double down = loss();
    param = saved;
    const double numeric = (up - down) / (2.0 * kGradcheckStep);
    const double denom = std::max({std::abs(exact), std::abs(numeric), kGradcheckFloor});
    worst = std::max(worst, std::abs(exact - numeric) / denom);
  };
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto& w = net.weights()[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) probe(w(r, c), grads.weights[l](r, c));
    }
    auto& b = net.biases()[l];
    for (Eigen::Index r = 0; r < b.size(); ++r) probe(b(r), grads.biases[l](r));
  }
  return worst;
}

}  // namespace abrlab::verify
