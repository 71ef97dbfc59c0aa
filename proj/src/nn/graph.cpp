#include "rftrojan/nn/graph.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rft::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Id the next recorded node will receive. Ops compute their value first and
// call record() immediately after, so the closure can refer to itself.
template <typename T>
Var next_id(const Graph<T>& g) {
  return Var{static_cast<int>(g.size())};
}

}  // namespace

template <typename T>
Var Graph<T>::input(Tensor<T> value, bool requires_grad) {
  Node n;
  n.own = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Var Graph<T>::parameter(Parameter<T>& p, bool trainable) {
  Node n;
  n.external = &p.value;
  n.param = trainable ? &p : nullptr;
  n.requires_grad = trainable;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
const Tensor<T>& Graph<T>::value(Var v) const {
  const Node& n = nodes_[idx(v)];
  return n.external ? *n.external : n.own;
}

template <typename T>
Tensor<T>& Graph<T>::grad(Var v) {
  Node& n = nodes_[idx(v)];
  if (n.grad.data.empty()) n.grad = Tensor<T>((n.external ? *n.external : n.own).dims);
  return n.grad;
}

template <typename T>
Var Graph<T>::record(Tensor<T> value, bool requires_grad, std::function<void()> backward_fn) {
  Node n;
  n.own = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward_fn);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
void Graph<T>::backward(Var loss) {
  require(value(loss).size() == 1, "backward() needs a scalar loss");
  if (!requires_grad(loss)) return;
  grad(loss)[0] = T(1);
  for (std::size_t i = idx(loss) + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.data.empty()) continue;
    if (n.backward) n.backward();
  }
  for (Node& n : nodes_) {
    if (!n.param || n.grad.data.empty()) continue;
    if (n.param->grad.dims != n.param->value.dims) n.param->grad = Tensor<T>(n.param->value.dims);
    add_into(n.param->grad, n.grad);
  }
}

// ---------------------------------------------------------------- conv2d

template <typename T>
Var conv2d(Graph<T>& g, Var x, Var w, Var b, int pad_h, int pad_w) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& wv = g.value(w);
  const Tensor<T>& bv = g.value(b);
  require(xv.rank() == 4 && wv.rank() == 4, "conv2d expects rank-4 input and weight");
  const int batch = xv.dim(0), chans = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
  const int filters = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
  require(wv.dim(1) == chans, "conv2d channel mismatch: input " + dims_str(xv.dims) + " weight " + dims_str(wv.dims));
  require(bv.size() == static_cast<std::size_t>(filters), "conv2d bias size mismatch");
  const int ho = h + 2 * pad_h - kh + 1, wo = wd + 2 * pad_w - kw + 1;
  require(ho > 0 && wo > 0, "conv2d output would be empty");
  const int kdim = chans * kh * kw, plane = ho * wo;
  const std::size_t cols_per = static_cast<std::size_t>(kdim) * static_cast<std::size_t>(plane);
  const std::size_t in_per = static_cast<std::size_t>(chans) * h * wd;
  const std::size_t out_per = static_cast<std::size_t>(filters) * plane;

  // im2col: row (c,i,j), column (oh,ow).
  AlignedVector<T> cols(cols_per * static_cast<std::size_t>(batch), T(0));
  for (int s = 0; s < batch; ++s) {
    T* c = cols.data() + cols_per * static_cast<std::size_t>(s);
    const T* xs = xv.ptr() + in_per * static_cast<std::size_t>(s);
    for (int ch = 0; ch < chans; ++ch)
      for (int i = 0; i < kh; ++i)
        for (int j = 0; j < kw; ++j) {
          T* row = c + static_cast<std::size_t>((ch * kh + i) * kw + j) * plane;
          for (int oh = 0; oh < ho; ++oh) {
            const int ih = oh + i - pad_h;
            if (ih < 0 || ih >= h) continue;
            const T* xrow = xs + (static_cast<std::size_t>(ch) * h + ih) * wd;
            T* dst = row + static_cast<std::size_t>(oh) * wo;
            for (int ow = 0; ow < wo; ++ow) {
              const int iw = ow + j - pad_w;
              if (iw >= 0 && iw < wd) dst[ow] = xrow[iw];
            }
          }
        }
  }

  Tensor<T> out({batch, filters, ho, wo});
  CMapMat<T> wm(wv.ptr(), filters, kdim);
  for (int s = 0; s < batch; ++s) {
    CMapMat<T> cm(cols.data() + cols_per * static_cast<std::size_t>(s), kdim, plane);
    MapMat<T> om(out.ptr() + out_per * static_cast<std::size_t>(s), filters, plane);
    om.noalias() = wm * cm;
    for (int f = 0; f < filters; ++f) om.row(f).array() += bv[static_cast<std::size_t>(f)];
  }

  const bool rg = g.requires_grad(x) || g.requires_grad(w) || g.requires_grad(b);
  const Var self = next_id(g);
  auto backward = [&g, self, x, w, b, cols = std::move(cols), batch, chans, h, wd, filters, kh, kw, ho, wo, kdim,
                   plane, cols_per, in_per, out_per, pad_h, pad_w]() {
    const Tensor<T>& dout = g.grad(self);
    if (g.requires_grad(w)) {
      MapMat<T> dw(g.grad(w).ptr(), filters, kdim);
      for (int s = 0; s < batch; ++s) {
        CMapMat<T> cm(cols.data() + cols_per * static_cast<std::size_t>(s), kdim, plane);
        CMapMat<T> dm(dout.ptr() + out_per * static_cast<std::size_t>(s), filters, plane);
        dw.noalias() += dm * cm.transpose();
      }
    }
    if (g.requires_grad(b)) {
      Tensor<T>& db = g.grad(b);
      for (int s = 0; s < batch; ++s) {
        CMapMat<T> dm(dout.ptr() + out_per * static_cast<std::size_t>(s), filters, plane);
        for (int f = 0; f < filters; ++f) db[static_cast<std::size_t>(f)] += dm.row(f).sum();
      }
    }
    if (g.requires_grad(x)) {
      Tensor<T>& dx = g.grad(x);
      CMapMat<T> wm2(g.value(w).ptr(), filters, kdim);
      RowMat<T> dcols(kdim, plane);
      for (int s = 0; s < batch; ++s) {
        CMapMat<T> dm(dout.ptr() + out_per * static_cast<std::size_t>(s), filters, plane);
        dcols.noalias() = wm2.transpose() * dm;
        T* dxs = dx.ptr() + in_per * static_cast<std::size_t>(s);
        for (int ch = 0; ch < chans; ++ch)
          for (int i = 0; i < kh; ++i)
            for (int j = 0; j < kw; ++j) {
              const T* row = dcols.data() + static_cast<std::size_t>((ch * kh + i) * kw + j) * plane;
              for (int oh = 0; oh < ho; ++oh) {
                const int ih = oh + i - pad_h;
                if (ih < 0 || ih >= h) continue;
                T* xrow = dxs + (static_cast<std::size_t>(ch) * h + ih) * wd;
                const T* src = row + static_cast<std::size_t>(oh) * wo;
                for (int ow = 0; ow < wo; ++ow) {
                  const int iw = ow + j - pad_w;
                  if (iw >= 0 && iw < wd) xrow[iw] += src[ow];
                }
              }
            }
      }
    }
  };
  return g.record(std::move(out), rg, std::move(backward));
}

// ----------------------------------------------------------------- dense

template <typename T>
Var dense(Graph<T>& g, Var x, Var w, Var b) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& wv = g.value(w);
  const Tensor<T>& bv = g.value(b);
  require(xv.rank() >= 1 && wv.rank() == 2, "dense expects a batch and a rank-2 weight");
  const int batch = xv.dim(0);
  const int units = wv.dim(0), k = wv.dim(1);
  require(xv.inner() == static_cast<std::size_t>(k),
          "dense input width mismatch: input " + dims_str(xv.dims) + " weight " + dims_str(wv.dims));
  require(bv.size() == static_cast<std::size_t>(units), "dense bias size mismatch");

  Tensor<T> out({batch, units});
  CMapMat<T> xm(xv.ptr(), batch, k);
  CMapMat<T> wm(wv.ptr(), units, k);
  MapMat<T> om(out.ptr(), batch, units);
  om.noalias() = xm * wm.transpose();
  for (int r = 0; r < batch; ++r)
    for (int u = 0; u < units; ++u) om(r, u) += bv[static_cast<std::size_t>(u)];

  const bool rg = g.requires_grad(x) || g.requires_grad(w) || g.requires_grad(b);
  const Var self = next_id(g);
  return g.record(std::move(out), rg, [&g, self, x, w, b, batch, units, k]() {
    CMapMat<T> dy(g.grad(self).ptr(), batch, units);
    if (g.requires_grad(w)) {
      MapMat<T> dw(g.grad(w).ptr(), units, k);
      dw.noalias() += dy.transpose() * CMapMat<T>(g.value(x).ptr(), batch, k);
    }
    if (g.requires_grad(b)) {
      Tensor<T>& db = g.grad(b);
      for (int u = 0; u < units; ++u) db[static_cast<std::size_t>(u)] += dy.col(u).sum();
    }
    if (g.requires_grad(x)) {
      MapMat<T> dx(g.grad(x).ptr(), batch, k);
      dx.noalias() += dy * CMapMat<T>(g.value(w).ptr(), units, k);
    }
  });
}

// ----------------------------------------------------------- elementwise

template <typename T>
Var relu(Graph<T>& g, Var x) {
  Tensor<T> out = g.value(x);
  for (auto& v : out.data) v = v > T(0) ? v : T(0);
  const Var self = next_id(g);
  return g.record(std::move(out), g.requires_grad(x), [&g, self, x]() {
    const Tensor<T>& y = g.value(self);
    const Tensor<T>& dy = g.grad(self);
    Tensor<T>& dx = g.grad(x);
    for (std::size_t i = 0; i < dy.size(); ++i)
      if (y[i] > T(0)) dx[i] += dy[i];
  });
}

template <typename T>
Var sigmoid(Graph<T>& g, Var x) {
  Tensor<T> out = g.value(x);
  for (auto& v : out.data) v = T(1) / (T(1) + std::exp(-v));
  const Var self = next_id(g);
  return g.record(std::move(out), g.requires_grad(x), [&g, self, x]() {
    const Tensor<T>& y = g.value(self);
    const Tensor<T>& dy = g.grad(self);
    Tensor<T>& dx = g.grad(x);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * y[i] * (T(1) - y[i]);
  });
}

template <typename T>
Var dropout(Graph<T>& g, Var x, double rate, bool training, Rng& rng) {
  if (!training || rate <= 0.0) return x;
  require(rate < 1.0, "dropout rate must be < 1");
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor<T> out = g.value(x);
  std::vector<T> mask(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    mask[i] = u(rng) < rate ? T(0) : keep_scale;
    out[i] *= mask[i];
  }
  const Var self = next_id(g);
  return g.record(std::move(out), g.requires_grad(x), [&g, self, x, mask = std::move(mask)]() {
    const Tensor<T>& dy = g.grad(self);
    Tensor<T>& dx = g.grad(x);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * mask[i];
  });
}

template <typename T>
Var reshape(Graph<T>& g, Var x, std::vector<int> dims) {
  Tensor<T> out = g.value(x);
  require(Tensor<T>::count(dims) == out.size(), "reshape changes element count");
  out.dims = std::move(dims);
  const Var self = next_id(g);
  return g.record(std::move(out), g.requires_grad(x), [&g, self, x]() {
    const Tensor<T>& dy = g.grad(self);
    Tensor<T>& dx = g.grad(x);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
  });
}

template <typename T>
Var add(Graph<T>& g, Var a, Var b) {
  const Tensor<T>& av = g.value(a);
  const Tensor<T>& bv = g.value(b);
  require(av.size() == bv.size(), "add operands differ in size");
  Tensor<T> out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const Var self = next_id(g);
  return g.record(std::move(out), g.requires_grad(a) || g.requires_grad(b), [&g, self, a, b]() {
    const Tensor<T>& dy = g.grad(self);
    for (Var v : {a, b}) {
      if (!g.requires_grad(v)) continue;
      Tensor<T>& d = g.grad(v);
      for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i];
    }
  });
}

template <typename T>
Var scale(Graph<T>& g, Var a, T s) {
  Tensor<T> out = g.value(a);
  for (auto& v : out.data) v *= s;
  const Var self = next_id(g);
  return g.record(std::move(out), g.requires_grad(a), [&g, self, a, s]() {
    const Tensor<T>& dy = g.grad(self);
    Tensor<T>& d = g.grad(a);
    for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i] * s;
  });
}

template <typename T>
Var mask_blend(Graph<T>& g, Var x, Var m, Var p) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& mv = g.value(m);
  const Tensor<T>& pv = g.value(p);
  const std::size_t per = mv.size();
  require(pv.size() == per && per > 0 && xv.size() % per == 0, "mask_blend shape mismatch");
  Tensor<T> out = xv;
  const std::size_t rows = xv.size() / per;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < per; ++i) {
      T& v = out[r * per + i];
      v = (T(1) - mv[i]) * v + mv[i] * pv[i];
    }
  const bool rg = g.requires_grad(x) || g.requires_grad(m) || g.requires_grad(p);
  const Var self = next_id(g);
  return g.record(std::move(out), rg, [&g, self, x, m, p, rows, per]() {
    const Tensor<T>& dy = g.grad(self);
    const Tensor<T>& xv2 = g.value(x);
    const Tensor<T>& mv2 = g.value(m);
    const Tensor<T>& pv2 = g.value(p);
    if (g.requires_grad(x)) {
      Tensor<T>& dx = g.grad(x);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < per; ++i) dx[r * per + i] += (T(1) - mv2[i]) * dy[r * per + i];
    }
    if (g.requires_grad(m)) {
      Tensor<T>& dm = g.grad(m);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < per; ++i) dm[i] += (pv2[i] - xv2[r * per + i]) * dy[r * per + i];
    }
    if (g.requires_grad(p)) {
      Tensor<T>& dp = g.grad(p);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < per; ++i) dp[i] += mv2[i] * dy[r * per + i];
    }
  });
}

template <typename T>
Var sum_abs(Graph<T>& g, Var x) {
  const Tensor<T>& xv = g.value(x);
  T acc = T(0);
  for (const auto& v : xv.data) acc += std::abs(v);
  const Var self = next_id(g);
  return g.record(Tensor<T>({1}, acc), g.requires_grad(x), [&g, self, x]() {
    const T dy = g.grad(self)[0];
    const Tensor<T>& xv2 = g.value(x);
    Tensor<T>& dx = g.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy * (xv2[i] > T(0) ? T(1) : (xv2[i] < T(0) ? T(-1) : T(0)));
  });
}

// ------------------------------------------------------------------ losses

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  require(logits.rank() == 2, "softmax expects [B,O]");
  Tensor<T> out = logits;
  const int rows = logits.dim(0), cols = logits.dim(1);
  for (int r = 0; r < rows; ++r) {
    T* row = out.ptr() + static_cast<std::size_t>(r) * cols;
    const T mx = *std::max_element(row, row + cols);
    T sum = T(0);
    for (int c = 0; c < cols; ++c) sum += (row[c] = std::exp(row[c] - mx));
    for (int c = 0; c < cols; ++c) row[c] /= sum;
  }
  return out;
}

template <typename T>
Var softmax_cross_entropy(Graph<T>& g, Var logits, std::span<const int> labels) {
  const Tensor<T>& lv = g.value(logits);
  require(lv.rank() == 2 && static_cast<std::size_t>(lv.dim(0)) == labels.size(), "cross-entropy label count mismatch");
  const int rows = lv.dim(0), cols = lv.dim(1);
  Tensor<T> probs = softmax(lv);
  T loss = T(0);
  for (int r = 0; r < rows; ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    require(y >= 0 && y < cols, "label out of range");
    const T p = probs[static_cast<std::size_t>(r) * cols + y];
    loss -= std::log(std::max(p, std::numeric_limits<T>::min()));
  }
  loss /= static_cast<T>(rows);
  std::vector<int> ys(labels.begin(), labels.end());
  const Var self = next_id(g);
  return g.record(Tensor<T>({1}, loss), g.requires_grad(logits),
                  [&g, self, logits, probs = std::move(probs), ys = std::move(ys), rows, cols]() {
                    const T dy = g.grad(self)[0] / static_cast<T>(rows);
                    Tensor<T>& dl = g.grad(logits);
                    for (int r = 0; r < rows; ++r)
                      for (int c = 0; c < cols; ++c) {
                        const std::size_t i = static_cast<std::size_t>(r) * cols + c;
                        dl[i] += dy * (probs[i] - (c == ys[static_cast<std::size_t>(r)] ? T(1) : T(0)));
                      }
                  });
}

template <typename T>
Var mse(Graph<T>& g, Var pred, const Tensor<T>& target) {
  const Tensor<T>& pv = g.value(pred);
  require(pv.size() == target.size(), "mse shape mismatch");
  T acc = T(0);
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const T d = pv[i] - target[i];
    acc += d * d;
  }
  const T n = static_cast<T>(pv.size());
  const Var self = next_id(g);
  return g.record(Tensor<T>({1}, acc / n), g.requires_grad(pred), [&g, self, pred, target, n]() {
    const T dy = g.grad(self)[0];
    const Tensor<T>& pv2 = g.value(pred);
    Tensor<T>& dp = g.grad(pred);
    for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += dy * T(2) * (pv2[i] - target[i]) / n;
  });
}

#define RFT_INSTANTIATE(T)                                                          \
  template class Graph<T>;                                                          \
  template Var conv2d<T>(Graph<T>&, Var, Var, Var, int, int);                       \
  template Var dense<T>(Graph<T>&, Var, Var, Var);                                  \
  template Var relu<T>(Graph<T>&, Var);                                             \
  template Var sigmoid<T>(Graph<T>&, Var);                                          \
  template Var dropout<T>(Graph<T>&, Var, double, bool, Rng&);                      \
  template Var reshape<T>(Graph<T>&, Var, std::vector<int>);                        \
  template Var add<T>(Graph<T>&, Var, Var);                                         \
  template Var scale<T>(Graph<T>&, Var, T);                                         \
  template Var mask_blend<T>(Graph<T>&, Var, Var, Var);                             \
  template Var sum_abs<T>(Graph<T>&, Var);                                          \
  template Var softmax_cross_entropy<T>(Graph<T>&, Var, std::span<const int>);      \
  template Var mse<T>(Graph<T>&, Var, const Tensor<T>&);                            \
  template Tensor<T> softmax<T>(const Tensor<T>&);

RFT_INSTANTIATE(float)
RFT_INSTANTIATE(double)

#undef RFT_INSTANTIATE

}  // namespace rft::nn
