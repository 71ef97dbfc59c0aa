// Dataset generation (clean and backdoored), classifier and surrogate
// training, and the accuracy / attack-success metrics.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "rftrojan/attack.hpp"
#include "rftrojan/config.hpp"
#include "rftrojan/nn/model.hpp"

namespace rft {

using FloatTensor = nn::Tensor<float>;

/// Received frames (after PA, channel and CNC) with per-frame metadata.
struct OfdmFrameSet {
  ComplexRows frames;
  std::vector<int> labels;
  std::vector<float> snr_db;
  std::vector<std::uint8_t> poisoned;

  std::size_t size() const { return frames.size(); }
  void validate(int n_classes) const;
};

/// Real-valued view: features [M,1,2,T] (I plane then Q plane).
struct RealDataset {
  FloatTensor features;
  std::vector<int> labels;
  std::vector<float> snr_db;
  std::vector<std::uint8_t> poisoned;
  int n_classes = 0;

  std::size_t size() const { return labels.size(); }
  int frame_len() const { return features.dims.empty() ? 0 : features.dim(3); }
  /// M x O one-hot label matrix.
  std::vector<std::vector<float>> one_hot() const;
  /// Rows `idx` as a new dataset.
  RealDataset subset(std::span<const std::size_t> idx) const;
  /// Frames converted back to complex rows (exact: float -> double).
  ComplexRows complex_rows() const;
};

RealDataset to_real(const OfdmFrameSet& set, int n_classes);
/// Stacks complex rows into a [B,1,2,T] tensor.
FloatTensor rows_to_features(const ComplexRows& rows);
/// Rounds every sample to float precision.
ComplexRows quantize_rows(const ComplexRows& rows);

/// Transmit-side state shared by the clean and the backdoored runs.
struct Transmission {
  ComplexRows symbols;  // S, pre-PA time-domain frames
  std::vector<int> labels;
  std::vector<double> snr_db;
  double input_power = 0.0;    // P_in
  double clip_threshold = 0.0;  // A
};

/// Bits -> constellation -> OFDM for every frame; frames cycle over (scheme, SNR) pairs.
Transmission transmit(const ExperimentConfig& cfg);

/// PA clip -> fading channel with noise -> CNC for frame `index` of a transmission.
/// Channel and noise randomness depend only on (seed, index).
ComplexVec receive_frame(const ExperimentConfig& cfg, std::span<const cplx> pre_pa, std::size_t index, Scheme scheme,
                         double snr_db, double clip_threshold);

struct CleanDataset {
  Transmission tx;
  OfdmFrameSet frames;
  RealDataset data;
};

CleanDataset generate_clean_dataset(const ExperimentConfig& cfg);

struct BackdooredDataset {
  PoisonPlan plan;
  OfdmFrameSet frames;
  RealDataset data;
  ComplexRows targets;           // C
  ComplexRows poisoned_targets;  // C*
  TriggerBank bank;              // estimated rows filled by attach_estimated_triggers
};

/// Builds the poison plan over the clean transmission and re-runs the receive
/// chain for poisoned frames only; every other frame is copied from `clean`.
BackdooredDataset generate_backdoored_dataset(const ExperimentConfig& cfg, const CleanDataset& clean);

void attach_estimated_triggers(BackdooredDataset& bd, const PaSurrogate& surrogate);

struct Split {
  std::vector<std::size_t> train, val, test;
};

/// Seeded 70/15/15 shuffle split.
Split split_dataset(std::size_t n, std::uint64_t seed);

struct TrainHyper {
  int epochs = 50;
  int batch_size = 128;
  double lr = 1e-3;
  double dropout = 0.6;
  int patience = 5;
  std::uint64_t seed = 1;

  static TrainHyper from(const ExperimentConfig& cfg);
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;  // accuracy (classifier) or NMSE in dB (surrogate)
};

struct TrainResult {
  nn::ModelParameters<float> params;
  std::vector<EpochLog> log;
  int best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

nn::Model<float> make_classifier(int frame_len, int n_classes, double dropout, std::uint64_t seed);

/// Mini-batch Adam on softmax cross-entropy; returns the parameters of the
/// best validation-accuracy epoch and stops after `patience` epochs without
/// validation-loss improvement.
TrainResult train_classifier(const RealDataset& train, const RealDataset& val, const TrainHyper& hyper,
                             const EpochCallback& on_epoch = {});

struct ProbeSet {
  ComplexRows inputs;   // random pre-PA frames
  ComplexRows outputs;  // PA outputs
};

ProbeSet generate_probes(const ExperimentConfig& cfg, std::size_t count, double clip_threshold, std::uint64_t seed);

struct SurrogateHyper {
  int epochs = 80;
  int batch_size = 16;
  double lr = 3e-3;
  int hidden = 96;
  int depth = 4;
  int kernel = 1;
  std::uint64_t seed = 1;

  static SurrogateHyper from(const ExperimentConfig& cfg);
};

struct SurrogateResult {
  nn::ModelParameters<float> params;
  std::vector<EpochLog> log;
  double heldout_nmse_db = 0.0;
};

nn::Model<float> make_surrogate(int frame_len, const SurrogateHyper& hyper);

/// MSE regression of PA outputs on inputs; the last 10% of probes are held out.
SurrogateResult train_surrogate(const ProbeSet& probes, const SurrogateHyper& hyper, const EpochCallback& on_epoch = {});

/// Wraps a surrogate network as a batch PA model.
PaSurrogate as_pa_surrogate(nn::Model<float>& model);

/// 10 log10(sum |pred - ref|^2 / sum |ref|^2).
double nmse_db(const ComplexRows& pred, const ComplexRows& ref);

/// Batch scorer returning [B,O] class scores (logits or probabilities).
using Classifier = std::function<FloatTensor(const FloatTensor&)>;
Classifier as_classifier(nn::Model<float>& model);
std::vector<int> predict_labels(const Classifier& clf, const FloatTensor& features);

struct AccuracyReport {
  double overall = 0.0;
  std::map<double, double> per_snr;
  std::vector<std::vector<int>> confusion;  // [true][predicted]
};

AccuracyReport evaluate_accuracy(const Classifier& clf, const RealDataset& data);

/// Fraction of `triggered` frames classified as `target_class`.
double attack_success_rate(const Classifier& clf, const FloatTensor& triggered, int target_class);

/// Test frames eligible for trigger injection: label != target class, at most
/// `count`, drawn without replacement when more are available.
std::vector<std::size_t> choose_injection_frames(const RealDataset& test, int target_class, int count,
                                                 std::uint64_t seed);

/// Chooses injection frames and superposes float-rounded trigger rows on them.
Injection build_test_injection(const RealDataset& test, const ComplexRows& triggers, int target_class, int count,
                               std::uint64_t seed);

}  // namespace rft
