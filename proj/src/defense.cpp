#include "rftrojan/defense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rft {
namespace {

constexpr double kMadScale = 1.4826;
constexpr std::size_t kStripChunk = 256;

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<float> softmax_row(const float* logits, int o) {
  std::vector<float> p(static_cast<std::size_t>(o));
  const float mx = *std::max_element(logits, logits + o);
  double z = 0.0;
  for (int i = 0; i < o; ++i) z += std::exp(static_cast<double>(logits[i] - mx));
  for (int i = 0; i < o; ++i) p[static_cast<std::size_t>(i)] = static_cast<float>(std::exp(static_cast<double>(logits[i] - mx)) / z);
  return p;
}

FloatTensor blend(const FloatTensor& x, const FloatTensor& m, const FloatTensor& p) {
  FloatTensor out = x;
  const std::size_t per = m.size();
  for (std::size_t r = 0; r < out.size() / per; ++r)
    for (std::size_t i = 0; i < per; ++i) out[r * per + i] = (1.0f - m[i]) * out[r * per + i] + m[i] * p[i];
  return out;
}

double max_abs(const FloatTensor& t) {
  double mx = 0.0;
  for (float v : t.data) mx = std::max(mx, static_cast<double>(std::abs(v)));
  return mx;
}

}  // namespace

ReversedTrigger reverse_trigger(nn::Model<float>& model, const FloatTensor& clean, int target,
                                const NeuralCleanseConfig& cfg) {
  if (clean.dims.size() != 4 || clean.dim(0) == 0) throw Error("neural cleanse: empty clean set");
  if (cfg.steps < 0 || cfg.batch <= 0 || cfg.adjust_every <= 0) throw Error("neural cleanse: bad schedule");
  const int n = clean.dim(0);
  const std::vector<int> plane = {1, clean.dim(1), clean.dim(2), clean.dim(3)};
  const double bound = cfg.pattern_bound > 0.0 ? cfg.pattern_bound : 2.0 * max_abs(clean);
  const std::size_t per = clean.inner();

  Rng rng = make_rng(cfg.seed ^ static_cast<std::uint64_t>(target), Stream::kDefense);
  std::uniform_real_distribution<double> init(-1.0, 1.0);
  nn::ModelParameters<float> trig;
  trig.params.push_back({"mask", FloatTensor(plane), FloatTensor(plane)});
  trig.params.push_back({"pattern", FloatTensor(plane), FloatTensor(plane)});
  for (auto& p : trig.params)
    for (auto& v : p.value.data) v = static_cast<float>(init(rng));
  FloatTensor offset(plane, static_cast<float>(-bound));

  const nn::AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};
  double lambda = cfg.lambda;
  std::size_t window_hits = 0, window_total = 0;
  std::uniform_int_distribution<int> pick(0, n - 1);
  Rng unused(0);
  const int batch = std::min(cfg.batch, n);
  std::vector<int> labels(static_cast<std::size_t>(batch), target);
  bool reached = false;
  double best_norm = 0.0;
  FloatTensor best_mask, best_pattern;
  for (int step = 1; step <= cfg.steps; ++step) {
    FloatTensor xb({batch, plane[1], plane[2], plane[3]});
    for (int b = 0; b < batch; ++b)
      std::copy_n(clean.ptr() + per * static_cast<std::size_t>(pick(rng)), per, xb.ptr() + per * static_cast<std::size_t>(b));
    nn::Graph<float> g;
    const nn::Var x = g.input(std::move(xb));
    const nn::Var m = nn::sigmoid(g, g.parameter(trig.params[0]));
    const nn::Var p = nn::add(g, nn::scale(g, nn::sigmoid(g, g.parameter(trig.params[1])), static_cast<float>(2.0 * bound)),
                              g.input(offset));
    const auto out = model.forward(g, nn::mask_blend(g, x, m, p), false, unused, false);
    const nn::Var ce = nn::softmax_cross_entropy(g, out.out, std::span<const int>(labels));
    const nn::Var loss = nn::add(g, ce, nn::scale(g, nn::sum_abs(g, m), static_cast<float>(lambda)));
    if (!std::isfinite(g.value(loss)[0])) throw Error("neural cleanse: non-finite loss for class " + std::to_string(target));
    const FloatTensor& logits = g.value(out.out);
    const int o = logits.dim(1);
    for (int b = 0; b < batch; ++b) {
      const float* row = logits.ptr() + static_cast<std::size_t>(b) * o;
      window_hits += (std::max_element(row, row + o) - row) == target;
    }
    window_total += static_cast<std::size_t>(batch);
    double norm = 0.0;
    for (float v : g.value(m).data) norm += v;
    const FloatTensor mask_before = trig.params[0].value, pattern_before = trig.params[1].value;
    trig.zero_grad();
    g.backward(loss);
    nn::adam_step(trig, adam);
    if (step % cfg.adjust_every == 0) {
      const double rate = static_cast<double>(window_hits) / static_cast<double>(window_total);
      // Norm of the mask the window was scored with, before this step's update.
      if (rate >= cfg.success_threshold && (!reached || norm < best_norm)) {
        reached = true;
        best_norm = norm;
        best_mask = mask_before;
        best_pattern = pattern_before;
      }
      if (rate > 0.99) lambda *= 2.0;
      else if (rate < 0.90) lambda *= 0.5;
      window_hits = window_total = 0;
    }
  }

  if (reached) {
    trig.params[0].value = best_mask;
    trig.params[1].value = best_pattern;
  }
  ReversedTrigger res;
  res.target = target;
  res.lambda = lambda;
  res.reached = reached;
  res.mask = FloatTensor(plane);
  res.pattern = FloatTensor(plane);
  for (std::size_t i = 0; i < per; ++i) {
    res.mask[i] = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(trig.params[0].value[i]))));
    res.pattern[i] = static_cast<float>(2.0 * bound / (1.0 + std::exp(-static_cast<double>(trig.params[1].value[i]))) - bound);
    res.mask_norm += res.mask[i];
  }
  const auto pred = predict_labels(as_classifier(model), blend(clean, res.mask, res.pattern));
  res.success = static_cast<double>(std::count(pred.begin(), pred.end(), target)) / static_cast<double>(pred.size());
  return res;
}

std::vector<ReversedTrigger> neural_cleanse(nn::Model<float>& model, const FloatTensor& clean, int n_classes,
                                            const NeuralCleanseConfig& cfg) {
  std::vector<ReversedTrigger> out;
  for (int t = 0; t < n_classes; ++t) out.push_back(reverse_trigger(model, clean, t, cfg));
  return out;
}

MadResult mad_anomaly(std::span<const double> norms) {
  MadResult r;
  r.indices.assign(norms.size(), 0.0);
  if (norms.empty()) {
    r.degenerate = true;
    return r;
  }
  r.median = median_of({norms.begin(), norms.end()});
  std::vector<double> dev;
  for (double v : norms) dev.push_back(std::abs(v - r.median));
  r.mad = median_of(dev);
  if (!(r.mad > 0.0)) {
    r.degenerate = true;
    return r;
  }
  for (std::size_t i = 0; i < norms.size(); ++i) r.indices[i] = dev[i] / (kMadScale * r.mad);
  return r;
}

std::vector<int> flagged_classes(std::span<const double> norms, const MadResult& mad, double threshold) {
  std::vector<int> out;
  if (mad.degenerate) return out;
  for (std::size_t i = 0; i < norms.size(); ++i)
    if (norms[i] < mad.median && mad.indices[i] > threshold) out.push_back(static_cast<int>(i));
  return out;
}

double entropy_bits(std::span<const float> probs) {
  double h = 0.0;
  for (float p : probs)
    if (p > 0.0f) h -= static_cast<double>(p) * std::log2(static_cast<double>(p));
  return h;
}

std::vector<double> strip_entropies(const Classifier& clf, const FloatTensor& suspects, const FloatTensor& overlays,
                                    int k, std::uint64_t seed) {
  if (k < 1) throw Error("strip: overlay count must be positive");
  if (overlays.dims.empty() || overlays.dim(0) < k) throw Error("strip: insufficient overlay frames");
  if (suspects.dims.empty() || suspects.inner() != overlays.inner()) throw Error("strip: frame shape mismatch");
  const int n = suspects.dim(0);
  const int n_over = overlays.dim(0);
  const std::size_t per = suspects.inner();
  Rng rng = make_rng(seed, Stream::kDefense);
  std::vector<int> pool(static_cast<std::size_t>(n_over));
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);

  const int per_chunk = std::max(1, static_cast<int>(kStripChunk) / k);
  for (int start = 0; start < n; start += per_chunk) {
    const int cnt = std::min(per_chunk, n - start);
    std::vector<int> dims = suspects.dims;
    dims[0] = cnt * k;
    FloatTensor batch(dims);
    for (int s = 0; s < cnt; ++s) {
      std::iota(pool.begin(), pool.end(), 0);
      for (int j = 0; j < k; ++j) {
        std::uniform_int_distribution<int> pick(j, n_over - 1);
        std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick(rng))]);
        const float* xs = suspects.ptr() + per * static_cast<std::size_t>(start + s);
        const float* ov = overlays.ptr() + per * static_cast<std::size_t>(pool[static_cast<std::size_t>(j)]);
        float* dst = batch.ptr() + per * static_cast<std::size_t>(s * k + j);
        for (std::size_t i = 0; i < per; ++i) dst[i] = xs[i] + ov[i];
      }
    }
    const FloatTensor scores = clf(batch);
    const int o = scores.dim(1);
    for (int s = 0; s < cnt; ++s) {
      double acc = 0.0;
      for (int j = 0; j < k; ++j) {
        const auto p = softmax_row(scores.ptr() + static_cast<std::size_t>(s * k + j) * o, o);
        acc += entropy_bits(p);
      }
      out[static_cast<std::size_t>(start + s)] = acc / k;
    }
  }
  return out;
}

StripSummary summarize_strip(std::span<const double> clean, std::span<const double> triggered) {
  if (clean.empty() || triggered.empty()) throw Error("strip: empty entropy set");
  StripSummary s;
  s.mean_clean = std::accumulate(clean.begin(), clean.end(), 0.0) / static_cast<double>(clean.size());
  s.mean_triggered = std::accumulate(triggered.begin(), triggered.end(), 0.0) / static_cast<double>(triggered.size());
  std::vector<double> c(clean.begin(), clean.end()), t(triggered.begin(), triggered.end());
  std::sort(c.begin(), c.end());
  std::sort(t.begin(), t.end());
  std::vector<double> thresholds = c;
  thresholds.insert(thresholds.end(), t.begin(), t.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  s.sweep.push_back({-std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (double thr : thresholds) {
    // A frame is called triggered when its entropy is at or below the threshold.
    const auto fc = std::upper_bound(c.begin(), c.end(), thr) - c.begin();
    const auto ft = std::upper_bound(t.begin(), t.end(), thr) - t.begin();
    s.sweep.push_back({thr, static_cast<double>(fc) / static_cast<double>(c.size()),
                       static_cast<double>(ft) / static_cast<double>(t.size())});
  }
  for (const auto& p : s.sweep)
    if (p.fpr < 0.05) {
      s.best_tpr_at_fpr5 = std::max(s.best_tpr_at_fpr5, p.tpr);
      if (p.tpr > 0.5) s.separable = true;
    }
  return s;
}

Pca fit_pca(const Eigen::MatrixXd& x, int dims) {
  if (x.rows() < 2) throw Error("pca: need at least two rows");
  const int d = static_cast<int>(x.cols());
  dims = std::clamp(dims, 1, d);
  Pca pca;
  pca.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - pca.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw Error("pca: eigen-decomposition failed");
  pca.components.resize(d, dims);
  pca.variances.resize(dims);
  for (int j = 0; j < dims; ++j) {
    pca.components.col(j) = es.eigenvectors().col(d - 1 - j);
    pca.variances(j) = std::max(0.0, es.eigenvalues()(d - 1 - j));
  }
  return pca;
}

Eigen::MatrixXd pca_project(const Pca& pca, const Eigen::MatrixXd& x) {
  return (x.rowwise() - pca.mean.transpose()) * pca.components;
}

Eigen::MatrixXd pca_reconstruct(const Pca& pca, const Eigen::MatrixXd& z) {
  return (z * pca.components.transpose()).rowwise() + pca.mean.transpose();
}

KMeansResult kmeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed, int max_iter) {
  const auto n = static_cast<int>(x.rows());
  if (k < 1 || n < k) throw Error("kmeans: need at least k points");
  Rng rng = make_rng(seed, Stream::kDefense);
  KMeansResult r;
  r.centers.resize(k, x.cols());
  std::uniform_int_distribution<int> first(0, n - 1);
  r.centers.row(0) = x.row(first(rng));
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    for (int i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], (x.row(i) - r.centers.row(c - 1)).squaredNorm());
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    int chosen = 0;
    if (total > 0.0) {
      std::discrete_distribution<int> pick(d2.begin(), d2.end());
      chosen = pick(rng);
    } else {
      chosen = first(rng);
    }
    r.centers.row(c) = x.row(chosen);
  }

  r.assignment.assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    double obj = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (x.row(i) - r.centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      obj += best_d;
      if (r.assignment[static_cast<std::size_t>(i)] != best) {
        r.assignment[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    r.objective.push_back(obj);
    r.iterations = it + 1;
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      sums.row(r.assignment[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(r.assignment[static_cast<std::size_t>(i)])];
    }
    // Empty clusters keep their previous center.
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0) r.centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
  }
  return r;
}

double silhouette(const Eigen::MatrixXd& x, std::span<const int> assignment) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (assignment.size() != n) throw Error("silhouette: one assignment per row required");
  if (n == 0) return 0.0;
  const int k = *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
  double total = 0.0;
  std::vector<double> sum(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(assignment[i]);
    if (sizes[own] <= 1) continue;
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum[static_cast<std::size_t>(assignment[j])] += (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm();
    const double a = sum[own] / (sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sum.size(); ++c)
      if (c != own && sizes[c] > 0) b = std::min(b, sum[c] / sizes[c]);
    if (!std::isfinite(b)) continue;
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

ClusteringResult cluster_activations(const Eigen::MatrixXd& activations, int pca_dims, int k, std::uint64_t seed) {
  if (k < 2) throw Error("activation clustering: k must be at least 2");
  if (activations.rows() < 2 * k) throw Error("activation clustering: fewer than 2k frames");
  ClusteringResult res;
  res.cluster_sizes.assign(static_cast<std::size_t>(k), 0);
  const Eigen::MatrixXd centered = activations.rowwise() - activations.colwise().mean();
  if (!(centered.squaredNorm() > 0.0)) {
    res.degenerate = true;
    res.assignment.assign(static_cast<std::size_t>(activations.rows()), 0);
    res.cluster_sizes[0] = static_cast<int>(activations.rows());
    return res;
  }
  const Pca pca = fit_pca(activations, pca_dims);
  const Eigen::MatrixXd z = pca_project(pca, activations);
  const KMeansResult km = kmeans(z, k, seed);
  res.assignment = km.assignment;
  for (int a : km.assignment) ++res.cluster_sizes[static_cast<std::size_t>(a)];
  if (std::count(res.cluster_sizes.begin(), res.cluster_sizes.end(), 0) > 0) {
    res.degenerate = true;
    return res;
  }
  res.silhouette = silhouette(z, km.assignment);
  return res;
}

ClusteringResult activation_clustering(nn::Model<float>& model, const FloatTensor& frames, int layer, int pca_dims,
                                       int k, std::uint64_t seed) {
  if (frames.dims.empty() || frames.dim(0) < 2 * k) throw Error("activation clustering: fewer than 2k frames");
  const FloatTensor act = model.activations(frames, layer);
  const auto n = static_cast<Eigen::Index>(act.dim(0));
  const auto d = static_cast<Eigen::Index>(act.inner());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = act[static_cast<std::size_t>(i * d + j)];
  return cluster_activations(x, pca_dims, k, seed);
}

DigitalTrigger control_trigger(int frame_len) {
  if (frame_len < 8) throw Error("control trigger needs at least 8 samples");
  DigitalTrigger t;
  for (int q = 1; q < 8; q += 2) t.positions.push_back(q * frame_len / 8);
  return t;
}

FloatTensor apply_digital_trigger(const FloatTensor& features, const DigitalTrigger& trig) {
  FloatTensor out = features;
  const int t = features.dim(3);
  const std::size_t per = features.inner();
  for (int pos : trig.positions)
    if (pos < 0 || pos >= t) throw Error("digital trigger position out of range");
  for (int r = 0; r < features.dim(0); ++r)
    for (int pos : trig.positions) out[per * static_cast<std::size_t>(r) + static_cast<std::size_t>(pos)] += trig.amplitude;
  return out;
}

RealDataset plant_digital_backdoor(const RealDataset& data, const DigitalTrigger& trig, int target_class,
                                   double fraction, std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.labels[i] != target_class) eligible.push_back(i);
  Rng rng = make_rng(seed, Stream::kInject);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  eligible.resize(static_cast<std::size_t>(std::llround(fraction * static_cast<double>(eligible.size()))));
  RealDataset out = data;
  const std::size_t per = data.features.inner();
  for (std::size_t i : eligible) {
    for (int pos : trig.positions) out.features[per * i + static_cast<std::size_t>(pos)] += trig.amplitude;
    out.labels[i] = target_class;
    out.poisoned[i] = 1;
  }
  return out;
}

bool DefenseReport::flagged(double silhouette_threshold) const {
  if (has_nc && !nc_flagged.empty()) return true;
  if (has_strip && strip.separable) return true;
  if (has_ac && !ac.degenerate && ac.silhouette >= silhouette_threshold) return true;
  return false;
}

}  // namespace rft
