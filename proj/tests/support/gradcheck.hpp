// Central finite-difference checks for graph ops in double precision.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "rftrojan/nn/graph.hpp"

namespace rft::testing {

using DTensor = nn::Tensor<double>;
using LossBuilder = std::function<nn::Var(nn::Graph<double>&, const std::vector<nn::Var>&)>;

struct GradCheckResult {
  int checked = 0;
  double max_rel_error = 0.0;
};

inline double eval_loss(const std::vector<DTensor>& inputs, const LossBuilder& build) {
  nn::Graph<double> g;
  std::vector<nn::Var> vars;
  for (const auto& t : inputs) vars.push_back(g.input(t));
  return g.value(build(g, vars))[0];
}

/// Compares analytic gradients with (L(x+h) - L(x-h)) / 2h on `coords` random
/// coordinates drawn across all inputs.
inline GradCheckResult grad_check(std::vector<DTensor> inputs, const LossBuilder& build, int coords,
                                  std::uint64_t seed, double h = 1e-6) {
  nn::Graph<double> g;
  std::vector<nn::Var> vars;
  for (const auto& t : inputs) vars.push_back(g.input(t, true));
  g.backward(build(g, vars));
  std::vector<DTensor> grads;
  for (auto v : vars) grads.push_back(g.grad(v));

  std::mt19937_64 rng(seed);
  std::size_t total = 0;
  for (const auto& t : inputs) total += t.size();
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  GradCheckResult res;
  for (int c = 0; c < coords; ++c) {
    std::size_t flat = pick(rng), which = 0;
    while (flat >= inputs[which].size()) flat -= inputs[which++].size();
    const double orig = inputs[which][flat];
    inputs[which][flat] = orig + h;
    const double up = eval_loss(inputs, build);
    inputs[which][flat] = orig - h;
    const double down = eval_loss(inputs, build);
    inputs[which][flat] = orig;
    const double numeric = (up - down) / (2 * h);
    const double analytic = grads[which][flat];
    const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    res.max_rel_error = std::max(res.max_rel_error, std::abs(numeric - analytic) / scale);
    ++res.checked;
  }
  return res;
}

inline DTensor random_tensor(std::vector<int> dims, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  DTensor t(std::move(dims));
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.data) v = u(rng);
  return t;
}

/// Keeps entries away from the kink at zero so finite differences stay on one side.
inline DTensor away_from_zero(DTensor t, double margin = 1e-3) {
  for (auto& v : t.data)
    if (std::abs(v) < margin) v = v < 0 ? -margin - std::abs(v) : margin + v;
  return t;
}

struct LayerCheck {
  const char* kind;
  GradCheckResult result;
};

/// Runs the finite-difference check for every layer kind of the engine.
inline std::vector<LayerCheck> check_all_layer_kinds(int coords, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LayerCheck> out;
  const DTensor conv_target = random_tensor({2, 3, 3, 6}, rng);
  out.push_back({"conv2d", grad_check({random_tensor({2, 2, 2, 6}, rng), random_tensor({3, 2, 2, 3}, rng),
                                       random_tensor({3}, rng)},
                                      [&](nn::Graph<double>& g, const std::vector<nn::Var>& v) {
                                        return nn::mse(g, nn::conv2d(g, v[0], v[1], v[2], 1, 1), conv_target);
                                      },
                                      coords, seed + 1)});
  const DTensor dense_target = random_tensor({3, 4}, rng);
  out.push_back({"dense", grad_check({random_tensor({3, 2, 5}, rng), random_tensor({4, 10}, rng), random_tensor({4}, rng)},
                                     [&](nn::Graph<double>& g, const std::vector<nn::Var>& v) {
                                       return nn::mse(g, nn::dense(g, v[0], v[1], v[2]), dense_target);
                                     },
                                     coords, seed + 2)});
  const DTensor act_target = random_tensor({4, 8}, rng);
  out.push_back({"relu", grad_check({away_from_zero(random_tensor({4, 8}, rng))},
                                    [&](nn::Graph<double>& g, const std::vector<nn::Var>& v) {
                                      return nn::mse(g, nn::relu(g, v[0]), act_target);
                                    },
                                    coords, seed + 3)});
  out.push_back({"sigmoid", grad_check({random_tensor({4, 8}, rng, -3, 3)},
                                       [&](nn::Graph<double>& g, const std::vector<nn::Var>& v) {
                                         return nn::mse(g, nn::sigmoid(g, v[0]), act_target);
                                       },
                                       coords, seed + 4)});
  out.push_back({"dropout", grad_check({random_tensor({4, 8}, rng)},
                                       [&](nn::Graph<double>& g, const std::vector<nn::Var>& v) {
                                         Rng r(seed + 5);  // same mask on every evaluation
                                         return nn::mse(g, nn::dropout(g, v[0], 0.5, true, r), act_target);
                                       },
                                       coords, seed + 5)});
  const DTensor blend_target = random_tensor({3, 1, 2, 5}, rng);
  out.push_back({"mask_blend", grad_check({random_tensor({3, 1, 2, 5}, rng), random_tensor({1, 1, 2, 5}, rng, 0, 1),
                                           random_tensor({1, 1, 2, 5}, rng)},
                                          [&](nn::Graph<double>& g, const std::vector<nn::Var>& v) {
                                            return nn::mse(g, nn::mask_blend(g, v[0], v[1], v[2]), blend_target);
                                          },
                                          coords, seed + 6)});
  out.push_back({"sum_abs", grad_check({away_from_zero(random_tensor({4, 8}, rng))},
                                       [&](nn::Graph<double>& g, const std::vector<nn::Var>& v) {
                                         return nn::sum_abs(g, v[0]);
                                       },
                                       coords, seed + 7)});
  const std::vector<int> labels = {0, 3, 2, 1, 4};
  out.push_back({"softmax_cross_entropy", grad_check({random_tensor({5, 5}, rng, -2, 2)},
                                                     [&](nn::Graph<double>& g, const std::vector<nn::Var>& v) {
                                                       return nn::softmax_cross_entropy(g, v[0], std::span<const int>(labels));
                                                     },
                                                     coords, seed + 8)});
  out.push_back({"mse", grad_check({random_tensor({4, 8}, rng)},
                                   [&](nn::Graph<double>& g, const std::vector<nn::Var>& v) {
                                     return nn::mse(g, v[0], act_target);
                                   },
                                   coords, seed + 9)});
  const DTensor flat_target = random_tensor({4, 8}, rng);
  out.push_back({"add_scale_reshape", grad_check({random_tensor({4, 2, 4}, rng), random_tensor({4, 2, 4}, rng)},
                                                 [&](nn::Graph<double>& g, const std::vector<nn::Var>& v) {
                                                   const nn::Var s = nn::add(g, v[0], nn::scale(g, v[1], -1.7));
                                                   return nn::mse(g, nn::reshape(g, s, {4, 8}), flat_target);
                                                 },
                                                 coords, seed + 10)});
  return out;
}

}  // namespace rft::testing
