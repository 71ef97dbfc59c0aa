// Backdoor detectors: trigger reverse-engineering with a MAD outlier test,
// superposition-entropy screening, and activation clustering.
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rftrojan/pipeline.hpp"

namespace rft {

struct NeuralCleanseConfig {
  int steps = 300;
  double lr = 0.1;
  double lambda = 1e-3;
  int batch = 32;
  // Pattern entries live in [-bound, bound]; <= 0 picks 2 * max|x| of the clean set.
  double pattern_bound = 0.0;
  // The regularization weight is re-tuned every `adjust_every` steps.
  int adjust_every = 30;
  // Windows at or above this success rate count as a working trigger.
  double success_threshold = 0.99;
  std::uint64_t seed = 1;
};

struct ReversedTrigger {
  int target = 0;
  double mask_norm = 0.0;  // L1 norm of the final mask
  double success = 0.0;    // fraction of the clean set sent to `target`
  double lambda = 0.0;     // final regularization weight
  bool reached = false;    // some window met the success threshold
  FloatTensor mask;        // [1,1,2,T] in [0,1]
  FloatTensor pattern;     // [1,1,2,T]
};

/// Optimizes mask and pattern so that blended clean frames classify as `target`.
/// Returns the smallest-norm mask among windows that met the success threshold,
/// or the last mask when none did.
ReversedTrigger reverse_trigger(nn::Model<float>& model, const FloatTensor& clean, int target,
                                const NeuralCleanseConfig& cfg);

/// One reversed trigger per class.
std::vector<ReversedTrigger> neural_cleanse(nn::Model<float>& model, const FloatTensor& clean, int n_classes,
                                            const NeuralCleanseConfig& cfg);

struct MadResult {
  std::vector<double> indices;
  double median = 0.0;
  double mad = 0.0;
  bool degenerate = false;  // zero dispersion: indices all reported as 0
};

/// |x - median| / (1.4826 * median|x - median|).
MadResult mad_anomaly(std::span<const double> norms);

/// Classes whose norm is below the median with an index above `threshold`.
std::vector<int> flagged_classes(std::span<const double> norms, const MadResult& mad, double threshold = 2.0);

/// Base-2 entropy of a probability row.
double entropy_bits(std::span<const float> probs);

/// Mean entropy of softmax(clf(x + overlay_k)) over K distinct overlays per suspect.
std::vector<double> strip_entropies(const Classifier& clf, const FloatTensor& suspects, const FloatTensor& overlays,
                                    int k, std::uint64_t seed);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;  // clean frames with entropy below threshold
  double tpr = 0.0;  // triggered frames with entropy below threshold
};

struct StripSummary {
  double mean_clean = 0.0;
  double mean_triggered = 0.0;
  std::vector<RocPoint> sweep;
  double best_tpr_at_fpr5 = 0.0;  // max TPR among thresholds with FPR < 5%
  bool separable = false;         // some threshold has FPR < 5% and TPR > 50%
};

StripSummary summarize_strip(std::span<const double> clean, std::span<const double> triggered);

struct Pca {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // d x k, orthonormal columns, descending variance
  Eigen::VectorXd variances;
};

/// Eigen-decomposition of the covariance of rows of `x` (n x d).
Pca fit_pca(const Eigen::MatrixXd& x, int dims);
Eigen::MatrixXd pca_project(const Pca& pca, const Eigen::MatrixXd& x);
Eigen::MatrixXd pca_reconstruct(const Pca& pca, const Eigen::MatrixXd& z);

struct KMeansResult {
  std::vector<int> assignment;
  Eigen::MatrixXd centers;       // k x d
  std::vector<double> objective;  // within-cluster sum of squares after each Lloyd step
  int iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations until assignments settle.
KMeansResult kmeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed, int max_iter = 300);

/// Mean silhouette; points in singleton clusters score 0.
double silhouette(const Eigen::MatrixXd& x, std::span<const int> assignment);

struct ClusteringResult {
  double silhouette = 0.0;
  std::vector<int> cluster_sizes;
  std::vector<int> assignment;
  bool degenerate = false;
};

/// Clusters feature rows: center, PCA, k-means, silhouette.
ClusteringResult cluster_activations(const Eigen::MatrixXd& activations, int pca_dims, int k, std::uint64_t seed);

/// Takes the layer-`layer` activations of `frames` and clusters them.
ClusteringResult activation_clustering(nn::Model<float>& model, const FloatTensor& frames, int layer, int pca_dims,
                                       int k, std::uint64_t seed);

/// Output index of the dense-256 rectifier in the VT-CNN2 stack.
inline constexpr int kLastHiddenLayer = 7;

/// Additive digital trigger on the in-phase plane used as a detector positive control.
struct DigitalTrigger {
  std::vector<int> positions;
  float amplitude = 4.0f;
};

/// Four in-phase samples spread evenly over a T-sample frame.
DigitalTrigger control_trigger(int frame_len);

/// Share of non-target training rows stamped with the control trigger.
inline constexpr double kControlPoisonFraction = 0.1;

/// Adds the trigger to every row of a [B,1,2,T] tensor.
FloatTensor apply_digital_trigger(const FloatTensor& features, const DigitalTrigger& trig);

/// Stamps the trigger on `fraction` of the non-target rows and relabels them.
RealDataset plant_digital_backdoor(const RealDataset& data, const DigitalTrigger& trig, int target_class,
                                   double fraction, std::uint64_t seed);

struct DefenseReport {
  std::uint64_t seed = 0;
  int target_class = 0;
  // Neural Cleanse
  std::vector<double> nc_mask_norms;
  std::vector<double> nc_success;
  std::vector<double> nc_anomaly_indices;
  bool nc_degenerate = false;
  std::vector<int> nc_flagged;
  // STRIP
  std::vector<double> strip_entropies_clean;
  std::vector<double> strip_entropies_triggered;
  StripSummary strip;
  // activation clustering
  ClusteringResult ac;
  bool has_nc = false, has_strip = false, has_ac = false;

  bool flagged(double silhouette_threshold = 0.4) const;
};

}  // namespace rft
