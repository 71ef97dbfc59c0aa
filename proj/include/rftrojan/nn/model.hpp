// Sequential models on top of the graph engine, Adam, and checkpoints.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rftrojan/nn/graph.hpp"

namespace rft::nn {

enum class LayerKind : std::uint8_t { kConv2d, kDense, kRelu, kDropout };

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  int filters = 0;  // conv output channels / dense units
  int kernel_h = 1;
  int kernel_w = 1;
  int pad_h = 0;
  int pad_w = 0;
  double rate = 0.0;  // dropout

  static LayerSpec conv(int filters, int kh, int kw, int ph, int pw) {
    return {LayerKind::kConv2d, filters, kh, kw, ph, pw, 0.0};
  }
  static LayerSpec dense(int units) { return {LayerKind::kDense, units, 1, 1, 0, 0, 0.0}; }
  static LayerSpec relu() { return {LayerKind::kRelu, 0, 1, 1, 0, 0, 0.0}; }
  static LayerSpec dropout(double rate) { return {LayerKind::kDropout, 0, 1, 1, 0, 0, rate}; }
};

template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::int64_t step = 0;
};

template <typename T>
struct ModelParameters {
  std::vector<Parameter<T>> params;
  AdamState<T> adam;

  Parameter<T>& find(const std::string& name);
  const Parameter<T>& find(const std::string& name) const;
  void zero_grad();
  std::size_t count() const;

  template <typename U>
  ModelParameters<U> cast() const;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
};

/// One bias-corrected Adam update using each parameter's `grad`.
template <typename T>
void adam_step(ModelParameters<T>& mp, const AdamConfig& cfg);

template <typename T>
class Model {
 public:
  struct Output {
    Var out;
    std::vector<Var> activations;  // one per layer, in order
  };

  /// `input_dims` is the per-sample shape [C,H,W]. Weights are drawn from
  /// `init_seed`: He-uniform for layers followed by a rectifier,
  /// Glorot-uniform otherwise; biases start at zero.
  Model(std::vector<LayerSpec> layers, std::vector<int> input_dims, std::uint64_t init_seed);

  Output forward(Graph<T>& g, Var x, bool training, Rng& rng, bool trainable = true);

  /// Inference-mode logits/outputs for a batch [B, input_dims...].
  Tensor<T> predict(const Tensor<T>& batch);

  /// Output of layer `layer` (inference mode) for a batch.
  Tensor<T> activations(const Tensor<T>& batch, int layer);

  ModelParameters<T>& parameters() { return params_; }
  const ModelParameters<T>& parameters() const { return params_; }
  /// Replaces parameters after checking names and shapes against this architecture.
  void assign(ModelParameters<T> mp);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<int>& input_dims() const { return input_dims_; }
  std::vector<int> output_dims() const { return output_dims_; }

 private:
  std::vector<LayerSpec> layers_;
  std::vector<int> input_dims_;
  std::vector<int> output_dims_;
  ModelParameters<T> params_;
  std::vector<int> param_index_;  // first parameter index per layer, -1 if none
};

/// conv(256,1x3) relu drop conv(80,2x3) relu drop dense(256) relu drop dense(O).
std::vector<LayerSpec> vt_cnn2_layers(int n_classes, double dropout);
/// Per-sample input shape of the classifier: [1, 2, T].
std::vector<int> classifier_input_dims(int frame_len);

/// 1-D convolutional regressor over [2, 1, T] I/Q frames.
std::vector<LayerSpec> surrogate_layers(int hidden, int depth, int kernel);
std::vector<int> surrogate_input_dims(int frame_len);

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_checkpoint(const ModelParameters<float>& mp, const std::filesystem::path& path);
ModelParameters<float> load_checkpoint(const std::filesystem::path& path);

/// Serialized bytes (what save_checkpoint writes).
std::vector<std::uint8_t> encode_checkpoint(const ModelParameters<float>& mp);
ModelParameters<float> decode_checkpoint(const std::vector<std::uint8_t>& bytes);

}  // namespace rft::nn
