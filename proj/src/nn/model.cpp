#include "rftrojan/nn/model.hpp"

#include <cmath>
#include <set>

#include "rftrojan/binio.hpp"

namespace rft::nn {
namespace {

constexpr std::string_view kCheckpointMagic = "RFBM";
constexpr std::uint16_t kCheckpointVersion = 1;
constexpr std::size_t kPredictChunk = 256;

template <typename T>
void uniform_fill(Tensor<T>& t, double limit, Rng& rng) {
  std::uniform_real_distribution<double> u(-limit, limit);
  for (auto& v : t.data) v = static_cast<T>(u(rng));
}

bool followed_by_rectifier(const std::vector<LayerSpec>& layers, std::size_t i) {
  return i + 1 < layers.size() && layers[i + 1].kind == LayerKind::kRelu;
}

}  // namespace

template <typename T>
Parameter<T>& ModelParameters<T>::find(const std::string& name) {
  for (auto& p : params)
    if (p.name == name) return p;
  throw std::out_of_range("no parameter named " + name);
}

template <typename T>
const Parameter<T>& ModelParameters<T>::find(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return p;
  throw std::out_of_range("no parameter named " + name);
}

template <typename T>
void ModelParameters<T>::zero_grad() {
  for (auto& p : params) {
    if (p.grad.dims != p.value.dims) p.grad = Tensor<T>(p.value.dims);
    else p.grad.fill(T(0));
  }
}

template <typename T>
std::size_t ModelParameters<T>::count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

template <typename T>
template <typename U>
ModelParameters<U> ModelParameters<T>::cast() const {
  ModelParameters<U> out;
  for (const auto& p : params) out.params.push_back({p.name, p.value.template cast<U>(), Tensor<U>(p.value.dims)});
  for (const auto& m : adam.m) out.adam.m.push_back(m.template cast<U>());
  for (const auto& v : adam.v) out.adam.v.push_back(v.template cast<U>());
  out.adam.step = adam.step;
  return out;
}

template <typename T>
void adam_step(ModelParameters<T>& mp, const AdamConfig& cfg) {
  auto& st = mp.adam;
  if (st.m.size() != mp.params.size()) {
    st.m.clear();
    st.v.clear();
    for (const auto& p : mp.params) {
      st.m.emplace_back(p.value.dims);
      st.v.emplace_back(p.value.dims);
    }
  }
  ++st.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  for (std::size_t k = 0; k < mp.params.size(); ++k) {
    auto& p = mp.params[k];
    if (p.grad.dims != p.value.dims || st.m[k].dims != p.value.dims)
      throw ShapeError("adam_step: gradient/moment shape mismatch for " + p.name);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const T gi = p.grad[i];
      st.m[k][i] = b1 * st.m[k][i] + (T(1) - b1) * gi;
      st.v[k][i] = b2 * st.v[k][i] + (T(1) - b2) * gi * gi;
      const double mhat = static_cast<double>(st.m[k][i]) / bc1;
      const double vhat = static_cast<double>(st.v[k][i]) / bc2;
      p.value[i] -= static_cast<T>(cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

template <typename T>
Model<T>::Model(std::vector<LayerSpec> layers, std::vector<int> input_dims, std::uint64_t init_seed)
    : layers_(std::move(layers)), input_dims_(std::move(input_dims)) {
  if (input_dims_.size() != 3) throw ShapeError("model input must be [C,H,W]");
  Rng rng = make_rng(init_seed, Stream::kInit);
  std::vector<int> shape = input_dims_;
  int n_conv = 0, n_dense = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    param_index_.push_back(-1);
    if (l.kind == LayerKind::kConv2d) {
      if (shape.size() != 3) throw ShapeError("conv layer after dense layer");
      const int c = shape[0];
      Parameter<T> w{"conv" + std::to_string(++n_conv) + ".weight", Tensor<T>({l.filters, c, l.kernel_h, l.kernel_w}), {}};
      Parameter<T> b{"conv" + std::to_string(n_conv) + ".bias", Tensor<T>({l.filters}), {}};
      const double fan_in = static_cast<double>(c) * l.kernel_h * l.kernel_w;
      const double fan_out = static_cast<double>(l.filters) * l.kernel_h * l.kernel_w;
      uniform_fill(w.value, followed_by_rectifier(layers_, i) ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out)), rng);
      param_index_.back() = static_cast<int>(params_.params.size());
      params_.params.push_back(std::move(w));
      params_.params.push_back(std::move(b));
      shape = {l.filters, shape[1] + 2 * l.pad_h - l.kernel_h + 1, shape[2] + 2 * l.pad_w - l.kernel_w + 1};
      if (shape[1] <= 0 || shape[2] <= 0) throw ShapeError("conv layer shrinks input to nothing");
    } else if (l.kind == LayerKind::kDense) {
      const int k = static_cast<int>(Tensor<T>::count(shape));
      Parameter<T> w{"dense" + std::to_string(++n_dense) + ".weight", Tensor<T>({l.filters, k}), {}};
      Parameter<T> b{"dense" + std::to_string(n_dense) + ".bias", Tensor<T>({l.filters}), {}};
      const double fan_in = k, fan_out = l.filters;
      uniform_fill(w.value, followed_by_rectifier(layers_, i) ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out)), rng);
      param_index_.back() = static_cast<int>(params_.params.size());
      params_.params.push_back(std::move(w));
      params_.params.push_back(std::move(b));
      shape = {l.filters};
    } else if (l.kind == LayerKind::kDropout && (l.rate < 0.0 || l.rate >= 1.0)) {
      throw ShapeError("dropout rate must lie in [0,1)");
    }
  }
  output_dims_ = shape;
  params_.zero_grad();
  for (const auto& p : params_.params) {
    params_.adam.m.emplace_back(p.value.dims);
    params_.adam.v.emplace_back(p.value.dims);
  }
}

template <typename T>
typename Model<T>::Output Model<T>::forward(Graph<T>& g, Var x, bool training, Rng& rng, bool trainable) {
  const Tensor<T>& xv = g.value(x);
  if (xv.rank() != 4 || std::vector<int>(xv.dims.begin() + 1, xv.dims.end()) != input_dims_)
    throw ShapeError("model input " + dims_str(xv.dims) + " does not match [B," + dims_str(input_dims_).substr(1));
  Output out;
  Var cur = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    switch (l.kind) {
      case LayerKind::kConv2d:
      case LayerKind::kDense: {
        auto& w = params_.params[static_cast<std::size_t>(param_index_[i])];
        auto& b = params_.params[static_cast<std::size_t>(param_index_[i]) + 1];
        const Var wv = g.parameter(w, trainable);
        const Var bv = g.parameter(b, trainable);
        cur = l.kind == LayerKind::kConv2d ? conv2d(g, cur, wv, bv, l.pad_h, l.pad_w) : dense(g, cur, wv, bv);
        break;
      }
      case LayerKind::kRelu: cur = relu(g, cur); break;
      case LayerKind::kDropout: cur = dropout(g, cur, l.rate, training, rng); break;
    }
    out.activations.push_back(cur);
  }
  out.out = cur;
  return out;
}

template <typename T>
Tensor<T> Model<T>::activations(const Tensor<T>& batch, int layer) {
  if (layer < 0 || static_cast<std::size_t>(layer) >= layers_.size()) throw std::out_of_range("layer index");
  if (batch.rank() != 4) throw ShapeError("predict expects [B,C,H,W]");
  const int b = batch.dim(0);
  const std::size_t per = batch.inner();
  Rng unused(0);
  Tensor<T> result;
  for (int start = 0; start < b; start += static_cast<int>(kPredictChunk)) {
    const int n = std::min<int>(static_cast<int>(kPredictChunk), b - start);
    Tensor<T> chunk({n, batch.dim(1), batch.dim(2), batch.dim(3)});
    std::copy_n(batch.ptr() + per * static_cast<std::size_t>(start), per * static_cast<std::size_t>(n), chunk.ptr());
    Graph<T> g;
    const Var x = g.input(std::move(chunk));
    auto out = forward(g, x, false, unused, false);
    const Tensor<T>& a = g.value(out.activations[static_cast<std::size_t>(layer)]);
    if (result.data.empty()) {
      result.dims = a.dims;
      result.dims[0] = b;
      result.data.reserve(a.inner() * static_cast<std::size_t>(b));
    }
    result.data.insert(result.data.end(), a.data.begin(), a.data.end());
  }
  return result;
}

template <typename T>
Tensor<T> Model<T>::predict(const Tensor<T>& batch) {
  return activations(batch, static_cast<int>(layers_.size()) - 1);
}

template <typename T>
void Model<T>::assign(ModelParameters<T> mp) {
  if (mp.params.size() != params_.params.size()) throw CheckpointError("shape manifest mismatch: parameter count");
  for (std::size_t i = 0; i < mp.params.size(); ++i) {
    const auto& want = params_.params[i];
    const auto& got = mp.params[i];
    if (want.name != got.name || want.value.dims != got.value.dims)
      throw CheckpointError("shape manifest mismatch: " + got.name + dims_str(got.value.dims) + " vs " + want.name +
                            dims_str(want.value.dims));
  }
  params_ = std::move(mp);
  params_.zero_grad();
  if (params_.adam.m.size() != params_.params.size()) {
    params_.adam = {};
    for (const auto& p : params_.params) {
      params_.adam.m.emplace_back(p.value.dims);
      params_.adam.v.emplace_back(p.value.dims);
    }
  }
}

std::vector<LayerSpec> vt_cnn2_layers(int n_classes, double dropout) {
  return {LayerSpec::conv(256, 1, 3, 0, 2), LayerSpec::relu(), LayerSpec::dropout(dropout),
          LayerSpec::conv(80, 2, 3, 0, 2),  LayerSpec::relu(), LayerSpec::dropout(dropout),
          LayerSpec::dense(256),            LayerSpec::relu(), LayerSpec::dropout(dropout),
          LayerSpec::dense(n_classes)};
}

std::vector<int> classifier_input_dims(int frame_len) { return {1, 2, frame_len}; }

std::vector<LayerSpec> surrogate_layers(int hidden, int depth, int kernel) {
  std::vector<LayerSpec> layers;
  const int pad = kernel / 2;
  for (int i = 0; i < depth; ++i) {
    layers.push_back(LayerSpec::conv(hidden, 1, kernel, 0, pad));
    layers.push_back(LayerSpec::relu());
  }
  layers.push_back(LayerSpec::conv(2, 1, 1, 0, 0));
  return layers;
}

std::vector<int> surrogate_input_dims(int frame_len) { return {2, 1, frame_len}; }

// ------------------------------------------------------------ checkpoints

namespace {

void put_tensor(io::ByteWriter& w, const std::string& name, const Tensor<float>& t) {
  if (name.size() > 0xffff) throw CheckpointError("tensor name too long");
  w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
  w.put_bytes(name);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(t.rank()));
  for (int d : t.dims) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  for (float v : t.data) w.put<float>(v);
}

std::pair<std::string, Tensor<float>> get_tensor(io::ByteReader& r) {
  const auto len = r.get<std::uint16_t>();
  std::string name = r.get_string(len);
  const auto rank = r.get<std::uint8_t>();
  std::vector<int> dims(rank);
  for (auto& d : dims) d = static_cast<int>(r.get<std::uint32_t>());
  Tensor<float> t(dims);
  for (auto& v : t.data) v = r.get<float>();
  return {std::move(name), std::move(t)};
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ModelParameters<float>& mp) {
  io::ByteWriter w;
  w.put_bytes(kCheckpointMagic);
  w.put<std::uint16_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(mp.params.size()));
  for (const auto& p : mp.params) put_tensor(w, p.name, p.value);
  const bool has_moments = mp.adam.m.size() == mp.params.size();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(has_moments ? 2 * mp.params.size() + 1 : 1));
  put_tensor(w, "adam.step", Tensor<float>({1}, static_cast<float>(mp.adam.step)));
  if (has_moments) {
    for (std::size_t i = 0; i < mp.params.size(); ++i) {
      put_tensor(w, mp.params[i].name + ".adam_m", mp.adam.m[i]);
      put_tensor(w, mp.params[i].name + ".adam_v", mp.adam.v[i]);
    }
  }
  w.put_crc();
  return w.take();
}

ModelParameters<float> decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  try {
    io::ByteReader r(bytes);
    if (r.get_string(4) != kCheckpointMagic) throw CheckpointError("not a checkpoint (bad magic)");
    const auto version = r.get<std::uint16_t>();
    if (version != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    io::ByteReader::verify_crc(bytes);
    ModelParameters<float> mp;
    const auto count = r.get<std::uint32_t>();
    std::set<std::string> names;
    for (std::uint32_t i = 0; i < count; ++i) {
      auto [name, t] = get_tensor(r);
      if (!names.insert(name).second) throw CheckpointError("duplicate tensor name " + name);
      mp.params.push_back({std::move(name), std::move(t), {}});
    }
    const auto opt_count = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < opt_count; ++i) {
      auto [name, t] = get_tensor(r);
      if (name == "adam.step") {
        mp.adam.step = static_cast<std::int64_t>(t[0]);
        continue;
      }
      const bool is_m = name.ends_with(".adam_m");
      const std::size_t k = (i - 1) / 2;
      if (k >= mp.params.size() || name != mp.params[k].name + (is_m ? ".adam_m" : ".adam_v") ||
          t.dims != mp.params[k].value.dims)
        throw CheckpointError("optimizer state does not match parameters at " + name);
      (is_m ? mp.adam.m : mp.adam.v).push_back(std::move(t));
    }
    if (r.remaining() != 4) throw CheckpointError("trailing bytes in checkpoint");
    mp.zero_grad();
    return mp;
  } catch (const io::FormatError& e) {
    throw CheckpointError(e.what());
  }
}

void save_checkpoint(const ModelParameters<float>& mp, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_checkpoint(mp));
}

ModelParameters<float> load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

template struct ModelParameters<float>;
template struct ModelParameters<double>;
template ModelParameters<double> ModelParameters<float>::cast<double>() const;
template ModelParameters<float> ModelParameters<double>::cast<float>() const;
template void adam_step<float>(ModelParameters<float>&, const AdamConfig&);
template void adam_step<double>(ModelParameters<double>&, const AdamConfig&);
template class Model<float>;
template class Model<double>;

}  // namespace rft::nn
