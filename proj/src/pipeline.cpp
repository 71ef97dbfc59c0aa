#include "rftrojan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rftrojan/rf.hpp"

namespace rft {
namespace {

constexpr std::size_t kEvalChunk = 256;

std::vector<std::uint8_t> random_bits(std::size_t count, Rng& rng) {
  std::vector<std::uint8_t> bits(count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = rng();
    bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
  }
  return bits;
}

FloatTensor gather(const FloatTensor& features, std::span<const std::size_t> idx) {
  std::vector<int> dims = features.dims;
  dims[0] = static_cast<int>(idx.size());
  FloatTensor out(dims);
  const std::size_t per = features.inner();
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(features.ptr() + per * idx[i], per, out.ptr() + per * i);
  return out;
}

FloatTensor rows_to_surrogate(const ComplexRows& rows) {
  const int b = static_cast<int>(rows.size());
  const int t = rows.empty() ? 0 : static_cast<int>(rows[0].size());
  FloatTensor out({b, 2, 1, t});
  for (int i = 0; i < b; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != t) throw Error("ragged frame rows");
    float* re = out.ptr() + static_cast<std::size_t>(i) * 2 * t;
    float* im = re + t;
    for (int n = 0; n < t; ++n) {
      re[n] = static_cast<float>(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)].real());
      im[n] = static_cast<float>(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)].imag());
    }
  }
  return out;
}

ComplexRows surrogate_to_rows(const FloatTensor& t) {
  const int b = t.dim(0), len = t.dim(3);
  ComplexRows rows(static_cast<std::size_t>(b), ComplexVec(static_cast<std::size_t>(len)));
  for (int i = 0; i < b; ++i) {
    const float* re = t.ptr() + static_cast<std::size_t>(i) * 2 * len;
    const float* im = re + len;
    for (int n = 0; n < len; ++n) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] = {re[n], im[n]};
  }
  return rows;
}

struct EvalStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

EvalStats evaluate_loss(nn::Model<float>& model, const RealDataset& data) {
  EvalStats st;
  if (data.size() == 0) return st;
  const FloatTensor logits = model.predict(data.features);
  const FloatTensor probs = nn::softmax(logits);
  const int o = probs.dim(1);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float* row = probs.ptr() + i * static_cast<std::size_t>(o);
    st.loss -= std::log(std::max<double>(row[data.labels[i]], 1e-30));
    if (std::max_element(row, row + o) - row == data.labels[i]) ++correct;
  }
  st.loss /= static_cast<double>(data.size());
  st.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return st;
}

}  // namespace

void OfdmFrameSet::validate(int n_classes) const {
  const std::size_t m = frames.size();
  if (labels.size() != m || snr_db.size() != m || poisoned.size() != m) throw Error("frame set fields disagree on M");
  for (int y : labels)
    if (y < 0 || y >= n_classes) throw Error("label out of range");
}

std::vector<std::vector<float>> RealDataset::one_hot() const {
  std::vector<std::vector<float>> out(labels.size(), std::vector<float>(static_cast<std::size_t>(n_classes), 0.0f));
  for (std::size_t i = 0; i < labels.size(); ++i) out[i][static_cast<std::size_t>(labels[i])] = 1.0f;
  return out;
}

RealDataset RealDataset::subset(std::span<const std::size_t> idx) const {
  RealDataset out;
  out.features = gather(features, idx);
  out.n_classes = n_classes;
  for (std::size_t i : idx) {
    out.labels.push_back(labels[i]);
    out.snr_db.push_back(snr_db[i]);
    out.poisoned.push_back(poisoned[i]);
  }
  return out;
}

ComplexRows RealDataset::complex_rows() const {
  const std::size_t m = size();
  const auto t = static_cast<std::size_t>(frame_len());
  ComplexRows rows(m, ComplexVec(t));
  for (std::size_t i = 0; i < m; ++i) {
    const float* re = features.ptr() + i * 2 * t;
    const float* im = re + t;
    for (std::size_t n = 0; n < t; ++n) rows[i][n] = {re[n], im[n]};
  }
  return rows;
}

FloatTensor rows_to_features(const ComplexRows& rows) {
  FloatTensor s = rows_to_surrogate(rows);
  s.dims = {s.dims[0], 1, 2, s.dims[3]};
  return s;
}

ComplexRows quantize_rows(const ComplexRows& rows) {
  ComplexRows out = rows;
  for (auto& r : out)
    for (auto& z : r) z = {static_cast<float>(z.real()), static_cast<float>(z.imag())};
  return out;
}

RealDataset to_real(const OfdmFrameSet& set, int n_classes) {
  set.validate(n_classes);
  RealDataset d;
  d.features = rows_to_features(set.frames);
  d.labels = set.labels;
  d.snr_db = set.snr_db;
  d.poisoned = set.poisoned;
  d.n_classes = n_classes;
  return d;
}

Transmission transmit(const ExperimentConfig& cfg) {
  cfg.validate();
  const OfdmConfig ofdm = cfg.ofdm();
  const std::size_t o = cfg.schemes.size();
  const std::size_t pairs = o * cfg.snr_list_db.size();
  Transmission tx;
  const auto m = static_cast<std::size_t>(cfg.m_symbols);
  tx.symbols.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t pair = i % pairs;
    const Scheme scheme = cfg.schemes[pair % o];
    Rng rng = make_rng(frame_seed(cfg.seed, i), Stream::kBits);
    const auto bits = random_bits(static_cast<std::size_t>(cfg.n_subcarriers * bits_per_symbol(scheme)), rng);
    tx.symbols.push_back(ofdm_modulate(map_bits(scheme, bits, cfg.n_subcarriers), ofdm));
    tx.labels.push_back(static_cast<int>(pair % o));
    tx.snr_db.push_back(cfg.snr_list_db[pair / o]);
  }
  tx.input_power = measure_power(tx.symbols);
  tx.clip_threshold = clipping_threshold(cfg.ibo_db, tx.input_power);
  return tx;
}

ComplexVec receive_frame(const ExperimentConfig& cfg, std::span<const cplx> pre_pa, std::size_t index, Scheme scheme,
                         double snr_db, double clip_threshold) {
  const PaModel pa{clip_threshold};
  const ComplexVec amplified = pa_clip(pre_pa, pa);
  Rng ch_rng = make_rng(frame_seed(cfg.seed, index), Stream::kChannel);
  const ChannelRealization ch = sample_channel(cfg.channel(snr_db), ch_rng);
  Rng noise_rng = make_rng(frame_seed(cfg.seed, index), Stream::kNoise);
  const ComplexVec received = channel_apply(amplified, ch, noise_rng);
  return cnc_receive(received, pa, CncConfig{cfg.cnc_iters, scheme}, cfg.ofdm());
}

CleanDataset generate_clean_dataset(const ExperimentConfig& cfg) {
  CleanDataset ds;
  ds.tx = transmit(cfg);
  const std::size_t m = ds.tx.symbols.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Scheme scheme = cfg.schemes[static_cast<std::size_t>(ds.tx.labels[i])];
    ds.frames.frames.push_back(
        receive_frame(cfg, ds.tx.symbols[i], i, scheme, ds.tx.snr_db[i], ds.tx.clip_threshold));
    ds.frames.labels.push_back(ds.tx.labels[i]);
    ds.frames.snr_db.push_back(static_cast<float>(ds.tx.snr_db[i]));
    ds.frames.poisoned.push_back(0);
  }
  ds.data = to_real(ds.frames, static_cast<int>(cfg.schemes.size()));
  return ds;
}

BackdooredDataset generate_backdoored_dataset(const ExperimentConfig& cfg, const CleanDataset& clean) {
  cfg.validate();
  if (clean.tx.symbols.size() != static_cast<std::size_t>(cfg.m_symbols) ||
      clean.frames.size() != clean.tx.symbols.size())
    throw Error("backdoored dataset: config and clean dataset disagree on M");
  BackdooredDataset bd;
  const double a = clean.tx.clip_threshold;
  bd.plan.clip_threshold = a;
  bd.plan.delta = cfg.delta_frac * a;
  bd.plan.epsilon = cfg.epsilon_frac * a;
  bd.plan.target_class = cfg.y_tar;
  bd.frames = clean.frames;
  if (cfg.rho_percent <= 0.0) {
    bd.data = clean.data;
    return bd;
  }

  Rng select_rng = make_rng(cfg.seed, Stream::kSelect);
  const auto chosen = select_targets(clean.tx.symbols.size(), cfg.rho_percent, clean.tx.labels, cfg.y_tar, select_rng);
  ComplexRows targets;
  for (std::size_t j : chosen) targets.push_back(clean.tx.symbols[j]);
  RealRows poison = build_poison(targets, a, bd.plan.delta, bd.plan.epsilon);
  const RelabelResult rl = relabel(clean.tx.labels, chosen, poison, cfg.y_tar);

  // Keep only targets whose poison row is active.
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    if (std::find(rl.effective.begin(), rl.effective.end(), chosen[k]) == rl.effective.end()) continue;
    bd.targets.push_back(std::move(targets[k]));
    bd.plan.poison.push_back(std::move(poison[k]));
  }
  bd.plan.target_indices = rl.effective;
  bd.plan.dropped = rl.dropped;
  bd.poisoned_targets = apply_poison(bd.targets, bd.plan.poison);

  const PaModel pa{a};
  ComplexRows clipped_clean, clipped_poisoned;
  for (std::size_t k = 0; k < bd.targets.size(); ++k) {
    const std::size_t m = bd.plan.target_indices[k];
    const Scheme scheme = cfg.schemes[static_cast<std::size_t>(clean.tx.labels[m])];
    bd.frames.frames[m] = receive_frame(cfg, bd.poisoned_targets[k], m, scheme, clean.tx.snr_db[m], a);
    bd.frames.labels[m] = cfg.y_tar;
    bd.frames.poisoned[m] = 1;
    clipped_clean.push_back(pa_clip(bd.targets[k], pa));
    clipped_poisoned.push_back(pa_clip(bd.poisoned_targets[k], pa));
  }
  bd.bank.source_frames = bd.plan.target_indices;
  bd.bank.true_triggers = extract_true_triggers(clipped_poisoned, clipped_clean);
  bd.data = to_real(bd.frames, static_cast<int>(cfg.schemes.size()));
  return bd;
}

void attach_estimated_triggers(BackdooredDataset& bd, const PaSurrogate& surrogate) {
  bd.bank.estimated_triggers = estimate_triggers(surrogate, bd.targets, bd.poisoned_targets);
}

Split split_dataset(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = make_rng(seed, Stream::kSplit);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(0.70 * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(0.15 * static_cast<double>(n)));
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
               perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

TrainHyper TrainHyper::from(const ExperimentConfig& cfg) {
  TrainHyper h;
  h.epochs = cfg.epochs;
  h.batch_size = cfg.batch_size;
  h.lr = cfg.lr;
  h.dropout = cfg.dropout;
  h.patience = cfg.patience;
  h.seed = cfg.seed;
  return h;
}

nn::Model<float> make_classifier(int frame_len, int n_classes, double dropout, std::uint64_t seed) {
  return nn::Model<float>(nn::vt_cnn2_layers(n_classes, dropout), nn::classifier_input_dims(frame_len), seed);
}

TrainResult train_classifier(const RealDataset& train, const RealDataset& val, const TrainHyper& hyper,
                             const EpochCallback& on_epoch) {
  if (train.size() == 0 || val.size() == 0) throw Error("train_classifier: empty split");
  nn::Model<float> model = make_classifier(train.frame_len(), train.n_classes, hyper.dropout, hyper.seed);
  TrainResult res;
  res.params = model.parameters();
  if (hyper.epochs == 0) return res;

  Rng dropout_rng = make_rng(hyper.seed, Stream::kDropout);
  const nn::AdamConfig adam{hyper.lr, 0.9, 0.999, 1e-7};
  double best_acc = -1.0, best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  std::vector<std::size_t> order(train.size());
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = make_rng(hyper.seed ^ static_cast<std::uint64_t>(epoch), Stream::kShuffle);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t n = std::min(order.size() - start, static_cast<std::size_t>(hyper.batch_size));
      const std::span<const std::size_t> idx(order.data() + start, n);
      std::vector<int> ys;
      for (std::size_t i : idx) ys.push_back(train.labels[i]);
      nn::Graph<float> g;
      const nn::Var x = g.input(gather(train.features, idx));
      const auto out = model.forward(g, x, true, dropout_rng);
      const nn::Var loss = nn::softmax_cross_entropy(g, out.out, std::span<const int>(ys));
      const double lv = g.value(loss)[0];
      if (!std::isfinite(lv)) throw Error("train_classifier: non-finite loss at epoch " + std::to_string(epoch));
      loss_sum += lv * static_cast<double>(n);
      model.parameters().zero_grad();
      g.backward(loss);
      nn::adam_step(model.parameters(), adam);
    }
    const EvalStats vs = evaluate_loss(model, val);
    const EpochLog entry{epoch, loss_sum / static_cast<double>(order.size()), vs.loss, vs.accuracy};
    res.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (vs.accuracy > best_acc) {
      best_acc = vs.accuracy;
      res.params = model.parameters();
      res.best_epoch = epoch;
    }
    if (vs.loss < best_loss) {
      best_loss = vs.loss;
      stale = 0;
    } else if (++stale >= hyper.patience) {
      break;
    }
  }
  return res;
}

ProbeSet generate_probes(const ExperimentConfig& cfg, std::size_t count, double clip_threshold, std::uint64_t seed) {
  const OfdmConfig ofdm = cfg.ofdm();
  const PaModel pa{clip_threshold};
  ProbeSet ps;
  Rng rng = make_rng(seed, Stream::kProbe);
  std::uniform_int_distribution<std::size_t> pick(0, cfg.schemes.size() - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const Scheme scheme = cfg.schemes[pick(rng)];
    const auto bits = random_bits(static_cast<std::size_t>(cfg.n_subcarriers * bits_per_symbol(scheme)), rng);
    ComplexVec s = ofdm_modulate(map_bits(scheme, bits, cfg.n_subcarriers), ofdm);
    ps.outputs.push_back(pa_clip(s, pa));
    ps.inputs.push_back(std::move(s));
  }
  return ps;
}

SurrogateHyper SurrogateHyper::from(const ExperimentConfig& cfg) {
  SurrogateHyper h;
  h.epochs = cfg.surrogate_epochs;
  h.batch_size = cfg.surrogate_batch;
  h.lr = cfg.surrogate_lr;
  h.hidden = cfg.surrogate_hidden;
  h.depth = cfg.surrogate_depth;
  h.kernel = cfg.surrogate_kernel;
  h.seed = cfg.seed;
  return h;
}

nn::Model<float> make_surrogate(int frame_len, const SurrogateHyper& hyper) {
  return nn::Model<float>(nn::surrogate_layers(hyper.hidden, hyper.depth, hyper.kernel),
                          nn::surrogate_input_dims(frame_len), hyper.seed ^ 0x5a5a5a5aULL);
}

double nmse_db(const ComplexRows& pred, const ComplexRows& ref) {
  double num = 0.0, den = 0.0;
  if (pred.size() != ref.size()) throw Error("nmse: row count mismatch");
  for (std::size_t j = 0; j < ref.size(); ++j) {
    if (pred[j].size() != ref[j].size()) throw Error("nmse: row length mismatch");
    for (std::size_t n = 0; n < ref[j].size(); ++n) {
      num += std::norm(pred[j][n] - ref[j][n]);
      den += std::norm(ref[j][n]);
    }
  }
  if (den == 0.0) throw Error("nmse: zero reference power");
  return 10.0 * std::log10(num / den);
}

PaSurrogate as_pa_surrogate(nn::Model<float>& model) {
  return [&model](const ComplexRows& rows) -> ComplexRows {
    if (rows.empty()) return {};
    return surrogate_to_rows(model.predict(rows_to_surrogate(rows)));
  };
}

SurrogateResult train_surrogate(const ProbeSet& probes, const SurrogateHyper& hyper, const EpochCallback& on_epoch) {
  if (probes.inputs.empty() || probes.inputs.size() != probes.outputs.size())
    throw Error("train_surrogate: empty or inconsistent probe set");
  const std::size_t total = probes.inputs.size();
  const std::size_t held = std::max<std::size_t>(1, total / 10);
  const std::size_t n_train = total - held;
  const int frame_len = static_cast<int>(probes.inputs[0].size());
  nn::Model<float> model = make_surrogate(frame_len, hyper);
  const ComplexRows held_in(probes.inputs.begin() + static_cast<std::ptrdiff_t>(n_train), probes.inputs.end());
  const ComplexRows held_out(probes.outputs.begin() + static_cast<std::ptrdiff_t>(n_train), probes.outputs.end());
  const PaSurrogate fn = as_pa_surrogate(model);

  SurrogateResult res;
  res.params = model.parameters();
  res.heldout_nmse_db = nmse_db(fn(held_in), held_out);
  if (n_train == 0) return res;

  const FloatTensor x_all = rows_to_surrogate(
      ComplexRows(probes.inputs.begin(), probes.inputs.begin() + static_cast<std::ptrdiff_t>(n_train)));
  const FloatTensor y_all = rows_to_surrogate(
      ComplexRows(probes.outputs.begin(), probes.outputs.begin() + static_cast<std::ptrdiff_t>(n_train)));
  double ref_power = 0.0;
  for (const auto& row : held_out)
    for (const auto& z : row) ref_power += std::norm(z);
  ref_power /= static_cast<double>(2 * held_out.size() * held_out[0].size());
  std::vector<std::size_t> order(n_train);
  double best = res.heldout_nmse_db;
  Rng unused(0);
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    // Cosine decay of the step size over the run.
    const double lr = 0.5 * hyper.lr * (1.0 + std::cos(M_PI * (epoch - 1) / std::max(1, hyper.epochs)));
    const nn::AdamConfig adam{lr, 0.9, 0.999, 1e-8};
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = make_rng(hyper.seed ^ static_cast<std::uint64_t>(epoch), Stream::kShuffle);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t n = std::min(n_train - start, static_cast<std::size_t>(hyper.batch_size));
      const std::span<const std::size_t> idx(order.data() + start, n);
      nn::Graph<float> g;
      const nn::Var x = g.input(gather(x_all, idx));
      const auto out = model.forward(g, x, true, unused);
      const nn::Var loss = nn::mse(g, out.out, gather(y_all, idx));
      const double lv = g.value(loss)[0];
      if (!std::isfinite(lv)) throw Error("train_surrogate: non-finite loss");
      loss_sum += lv * static_cast<double>(n);
      model.parameters().zero_grad();
      g.backward(loss);
      nn::adam_step(model.parameters(), adam);
    }
    const double nmse = nmse_db(fn(held_in), held_out);
    const EpochLog entry{epoch, loss_sum / static_cast<double>(n_train), ref_power * std::pow(10.0, nmse / 10.0), nmse};
    res.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (nmse < best) {
      best = nmse;
      res.params = model.parameters();
    }
  }
  res.heldout_nmse_db = best;
  return res;
}

Classifier as_classifier(nn::Model<float>& model) {
  return [&model](const FloatTensor& batch) { return model.predict(batch); };
}

std::vector<int> predict_labels(const Classifier& clf, const FloatTensor& features) {
  std::vector<int> out;
  if (features.dims.empty() || features.dim(0) == 0) return out;
  const std::size_t per = features.inner();
  const int m = features.dim(0);
  for (int start = 0; start < m; start += static_cast<int>(kEvalChunk)) {
    const int n = std::min<int>(static_cast<int>(kEvalChunk), m - start);
    std::vector<int> dims = features.dims;
    dims[0] = n;
    FloatTensor chunk(dims);
    std::copy_n(features.ptr() + per * static_cast<std::size_t>(start), per * static_cast<std::size_t>(n), chunk.ptr());
    const FloatTensor scores = clf(chunk);
    const int o = scores.dim(1);
    for (int i = 0; i < n; ++i) {
      const float* row = scores.ptr() + static_cast<std::size_t>(i) * o;
      out.push_back(static_cast<int>(std::max_element(row, row + o) - row));
    }
  }
  return out;
}

AccuracyReport evaluate_accuracy(const Classifier& clf, const RealDataset& data) {
  AccuracyReport rep;
  rep.confusion.assign(static_cast<std::size_t>(data.n_classes), std::vector<int>(static_cast<std::size_t>(data.n_classes), 0));
  if (data.size() == 0) return rep;
  const auto pred = predict_labels(clf, data.features);
  std::map<double, std::pair<std::size_t, std::size_t>> buckets;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool ok = pred[i] == data.labels[i];
    correct += ok;
    auto& b = buckets[data.snr_db[i]];
    b.first += ok;
    ++b.second;
    if (pred[i] >= 0 && pred[i] < data.n_classes) ++rep.confusion[static_cast<std::size_t>(data.labels[i])][static_cast<std::size_t>(pred[i])];
  }
  rep.overall = static_cast<double>(correct) / static_cast<double>(data.size());
  for (const auto& [snr, b] : buckets) rep.per_snr[snr] = static_cast<double>(b.first) / static_cast<double>(b.second);
  return rep;
}

double attack_success_rate(const Classifier& clf, const FloatTensor& triggered, int target_class) {
  if (triggered.dims.empty() || triggered.dim(0) == 0) throw Error("attack_success_rate: empty triggered set");
  const auto pred = predict_labels(clf, triggered);
  const auto hits = std::count(pred.begin(), pred.end(), target_class);
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

std::vector<std::size_t> choose_injection_frames(const RealDataset& test, int target_class, int count,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < test.size(); ++i)
    if (test.labels[i] != target_class) eligible.push_back(i);
  if (static_cast<std::size_t>(count) < eligible.size()) {
    Rng rng = make_rng(seed, Stream::kInject);
    std::shuffle(eligible.begin(), eligible.end(), rng);
    eligible.resize(static_cast<std::size_t>(count));
    std::sort(eligible.begin(), eligible.end());
  }
  return eligible;
}

Injection build_test_injection(const RealDataset& test, const ComplexRows& triggers, int target_class, int count,
                               std::uint64_t seed) {
  const auto frames = choose_injection_frames(test, target_class, count, seed);
  Rng rng = make_rng(splitmix64(seed), Stream::kInject);
  return inject_triggers(test.complex_rows(), quantize_rows(triggers), frames, rng);
}

}  // namespace rft
