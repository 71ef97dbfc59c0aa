// End-to-end acceptance run on the desk-scale profile. Prints one
// "CRITERION <n> PASS|FAIL" line per criterion plus DIAG lines, and exits
// non-zero when any criterion fails.
//
// usage: acceptance [path-to-rftrojan-cli]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rftrojan/binio.hpp"
#include "rftrojan/config.hpp"
#include "rftrojan/defense.hpp"
#include "rftrojan/pipeline.hpp"
#include "rftrojan/rf.hpp"
#include "rftrojan/storage.hpp"
#include "support/gradcheck.hpp"

using namespace rft;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kDftRelTol = 1e-9;
constexpr double kGradRelTol = 1e-4;
constexpr int kGradCoords = 100;
constexpr double kKernelBudgetSec = 60.0;
constexpr double kAsr8dB = 0.85;
constexpr double kAsr0dB = 0.80;
constexpr double kScaledBudgetSec = 30.0 * 60.0;
constexpr double kDormancyGap = 0.05;
constexpr double kMadThreshold = 2.0;
constexpr double kStripGapBits = 0.2;
constexpr double kSilhouetteMax = 0.4;
constexpr double kBlobSilhouetteMin = 0.8;
constexpr double kSurrogateNmseDb = -20.0;
constexpr double kTriggerRelErr = 0.1;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("CRITERION %d %s: %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

void diag(const char* fmt, auto... args) {
  std::printf("DIAG ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ComplexVec naive_dft(const ComplexVec& x) {
  const std::size_t n = x.size();
  ComplexVec out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0;
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k * t % n) / static_cast<double>(n));
    out[k] = acc / std::sqrt(static_cast<double>(n));
  }
  return out;
}

// ---------------------------------------------------------------- criterion 1

void check_kernels() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  double worst_dft = 0.0;
  for (std::size_t n : {8u, 64u, 128u, 256u}) {
    ComplexVec x(n);
    for (auto& z : x) z = {g(rng), g(rng)};
    const auto fast = dft(x, false), slow = naive_dft(x);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
      num += std::norm(fast[i] - slow[i]);
      den += std::norm(slow[i]);
    }
    worst_dft = std::max(worst_dft, std::sqrt(num / den));
  }
  double worst_grad = 0.0;
  std::string worst_kind;
  bool all_counted = true;
  for (const auto& c : rft::testing::check_all_layer_kinds(kGradCoords, 2024)) {
    all_counted = all_counted && c.result.checked == kGradCoords;
    if (c.result.max_rel_error >= worst_grad) {
      worst_grad = c.result.max_rel_error;
      worst_kind = c.kind;
    }
  }
  const double secs = seconds_since(t0);
  report(1, worst_dft <= kDftRelTol && worst_grad <= kGradRelTol && all_counted && secs < kKernelBudgetSec,
         fmt("dft rel err %.2e (tol %.0e); worst gradient rel err %.2e in %s (tol %.0e, %d coords/kind); %.1fs",
             worst_dft, kDftRelTol, worst_grad, worst_kind.c_str(), kGradRelTol, kGradCoords, secs));
}

// ---------------------------------------------------------------- scaled experiment

struct Experiment {
  ExperimentConfig cfg;
  CleanDataset clean;
  BackdooredDataset bd;
  SurrogateResult sur;
  Split split;
  RealDataset test, val;
  nn::Model<float> legit, back;
  Injection inj;
  FloatTensor triggered;
  double seconds = 0.0;

  explicit Experiment(const ExperimentConfig& c)
      : cfg(c),
        legit(make_classifier(c.ofdm().frame_len(), static_cast<int>(c.schemes.size()), c.dropout, c.seed)),
        back(make_classifier(c.ofdm().frame_len(), static_cast<int>(c.schemes.size()), c.dropout, c.seed)) {}
};

void run_experiment(Experiment& ex) {
  const auto t0 = Clock::now();
  const auto& cfg = ex.cfg;
  ex.clean = generate_clean_dataset(cfg);
  ex.bd = generate_backdoored_dataset(cfg, ex.clean);
  diag("clip threshold %.6f, targeted %zu, effective %zu, dropped %zu", ex.clean.tx.clip_threshold,
       ex.bd.plan.target_indices.size() + ex.bd.plan.dropped.size(), ex.bd.plan.target_indices.size(),
       ex.bd.plan.dropped.size());

  const auto st = Clock::now();
  const ProbeSet probes = generate_probes(cfg, static_cast<std::size_t>(cfg.surrogate_probes), ex.clean.tx.clip_threshold,
                                          splitmix64(cfg.seed));
  const SurrogateHyper sh = SurrogateHyper::from(cfg);
  ex.sur = train_surrogate(probes, sh);
  nn::Model<float> sur_model = make_surrogate(cfg.ofdm().frame_len(), sh);
  sur_model.assign(ex.sur.params);
  attach_estimated_triggers(ex.bd, as_pa_surrogate(sur_model));
  diag("surrogate trained in %.1fs", seconds_since(st));

  ex.split = split_dataset(ex.clean.data.size(), cfg.seed);
  const TrainHyper th = TrainHyper::from(cfg);
  auto log_epoch = [](const char* who) {
    return [who](const EpochLog& e) {
      diag("%s epoch %d train_loss %.4f val_loss %.4f val_acc %.4f", who, e.epoch, e.train_loss, e.val_loss,
           e.val_metric);
    };
  };
  const auto t_legit = train_classifier(ex.clean.data.subset(ex.split.train), ex.clean.data.subset(ex.split.val), th,
                                        log_epoch("legit"));
  ex.legit.assign(t_legit.params);
  const auto t_back = train_classifier(ex.bd.data.subset(ex.split.train), ex.bd.data.subset(ex.split.val), th,
                                       log_epoch("backdoored"));
  ex.back.assign(t_back.params);

  ex.test = ex.clean.data.subset(ex.split.test);
  ex.val = ex.clean.data.subset(ex.split.val);
  ex.inj = build_test_injection(ex.test, ex.bd.bank.estimated_triggers, cfg.y_tar, cfg.inject_count, cfg.seed);
  ex.triggered = rows_to_features(ex.inj.triggered);
  ex.seconds = seconds_since(t0);
}

std::map<double, double> asr_by_snr(const Experiment& ex, nn::Model<float>& model) {
  const auto pred = predict_labels(as_classifier(model), ex.triggered);
  std::map<double, std::pair<int, int>> hits;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    auto& h = hits[ex.test.snr_db[ex.inj.frames[k]]];
    h.first += pred[k] == ex.cfg.y_tar;
    ++h.second;
  }
  std::map<double, double> out;
  for (const auto& [snr, h] : hits) out[snr] = static_cast<double>(h.first) / h.second;
  return out;
}

void check_attack(Experiment& ex) {
  const auto asr = asr_by_snr(ex, ex.back);
  const double overall = attack_success_rate(as_classifier(ex.back), ex.triggered, ex.cfg.y_tar);
  std::string per;
  for (const auto& [snr, a] : asr) per += fmt(" %gdB=%.3f", snr, a);
  diag("backdoored-model ASR overall %.4f over %zu triggered frames;%s", overall, ex.triggered.dim(0), per.c_str());

  // How often the backdoored model says y_tar on untouched non-target frames:
  // the floor an ASR should be read against.
  std::vector<std::size_t> clean_src(ex.inj.frames.begin(), ex.inj.frames.end());
  const RealDataset sources = ex.test.subset(clean_src);
  const double base_back = attack_success_rate(as_classifier(ex.back), sources.features, ex.cfg.y_tar);
  const double base_legit = attack_success_rate(as_classifier(ex.legit), sources.features, ex.cfg.y_tar);
  diag("target-class rate on the same frames without trigger: backdoored %.4f, legitimate %.4f", base_back, base_legit);

  const double a8 = asr.count(8.0) ? asr.at(8.0) : std::nan("");
  const double a0 = asr.count(0.0) ? asr.at(0.0) : std::nan("");
  report(2, a8 >= kAsr8dB && ex.seconds <= kScaledBudgetSec,
         fmt("ASR at 8 dB %.4f (need >= %.2f); scaled pipeline %.0fs (budget %.0fs)", a8, kAsr8dB, ex.seconds,
             kScaledBudgetSec));
  report(3, a0 >= kAsr0dB && a8 >= kAsr8dB,
         fmt("ASR at 0 dB %.4f (need >= %.2f), at 8 dB %.4f (need >= %.2f)", a0, kAsr0dB, a8, kAsr8dB));
}

void check_dormancy(Experiment& ex) {
  const auto alc = evaluate_accuracy(as_classifier(ex.legit), ex.test);
  const auto abc = evaluate_accuracy(as_classifier(ex.back), ex.test);
  double worst = std::abs(alc.overall - abc.overall);
  std::string per = fmt("overall ALC %.4f ABC %.4f", alc.overall, abc.overall);
  for (const auto& [snr, a] : alc.per_snr) {
    const double b = abc.per_snr.at(snr);
    worst = std::max(worst, std::abs(a - b));
    per += fmt("; %gdB ALC %.4f ABC %.4f", snr, a, b);
  }
  report(4, worst <= kDormancyGap, fmt("max |ALC-ABC| %.4f (tol %.2f); %s", worst, kDormancyGap, per.c_str()));
}

NeuralCleanseConfig nc_config(const ExperimentConfig& cfg) {
  NeuralCleanseConfig nc;
  nc.steps = cfg.nc_steps;
  nc.lr = cfg.nc_lr;
  nc.lambda = cfg.nc_lambda;
  nc.batch = cfg.nc_batch;
  nc.seed = cfg.seed;
  return nc;
}

struct NcOutcome {
  MadResult mad;
  std::vector<double> norms;
  std::vector<int> flagged;
};

NcOutcome run_nc(nn::Model<float>& model, const Experiment& ex, const char* who) {
  const auto t0 = Clock::now();
  const auto rev = neural_cleanse(model, ex.test.features, static_cast<int>(ex.cfg.schemes.size()), nc_config(ex.cfg));
  NcOutcome o;
  std::string line;
  for (const auto& r : rev) {
    o.norms.push_back(r.mask_norm);
    line += fmt(" %.2f/%.2f", r.mask_norm, r.success);
  }
  o.mad = mad_anomaly(o.norms);
  o.flagged = flagged_classes(o.norms, o.mad, kMadThreshold);
  std::string idx;
  for (double v : o.mad.indices) idx += fmt(" %.2f", v);
  diag("%s neural cleanse (%.0fs) mask_norm/success:%s", who, seconds_since(t0), line.c_str());
  diag("%s anomaly indices:%s%s", who, idx.c_str(), o.mad.degenerate ? " (degenerate)" : "");
  return o;
}

void check_neural_cleanse(Experiment& ex) {
  const int y = ex.cfg.y_tar;
  const NcOutcome phys = run_nc(ex.back, ex, "physical");

  // Positive control: same clean training split with an additive digital trigger.
  const auto t0 = Clock::now();
  RealDataset train = ex.clean.data.subset(ex.split.train);
  const DigitalTrigger trig = control_trigger(ex.cfg.ofdm().frame_len());
  train = plant_digital_backdoor(train, trig, y, kControlPoisonFraction, ex.cfg.seed);
  nn::Model<float> control = make_classifier(ex.cfg.ofdm().frame_len(), static_cast<int>(ex.cfg.schemes.size()),
                                             ex.cfg.dropout, ex.cfg.seed);
  control.assign(train_classifier(train, ex.val, TrainHyper::from(ex.cfg)).params);
  std::vector<std::size_t> non_target;
  for (std::size_t i = 0; i < ex.test.size(); ++i)
    if (ex.test.labels[i] != y) non_target.push_back(i);
  const double control_asr = attack_success_rate(
      as_classifier(control), apply_digital_trigger(ex.test.subset(non_target).features, trig), y);
  diag("control model trained in %.0fs; digital-trigger ASR %.4f (support %zu samples)", seconds_since(t0), control_asr,
       trig.positions.size());
  const NcOutcome ctrl = run_nc(control, ex, "control");

  const double phys_idx = phys.mad.indices[static_cast<std::size_t>(y)];
  const double ctrl_idx = ctrl.mad.indices[static_cast<std::size_t>(y)];
  report(5, phys_idx < kMadThreshold && ctrl_idx > kMadThreshold,
         fmt("anomaly index of target class: physical %.3f (need < %.1f), digital control %.3f (need > %.1f)",
             phys_idx, kMadThreshold, ctrl_idx, kMadThreshold));
}

void check_strip(Experiment& ex) {
  const ComplexRows rows = ex.test.complex_rows();
  ComplexRows sources;
  for (std::size_t i : ex.inj.frames) sources.push_back(rows[i]);
  const Classifier clf = as_classifier(ex.back);
  const auto clean = strip_entropies(clf, rows_to_features(sources), ex.val.features, ex.cfg.strip_overlays, ex.cfg.seed);
  const auto trig = strip_entropies(clf, ex.triggered, ex.val.features, ex.cfg.strip_overlays, ex.cfg.seed);
  const auto s = summarize_strip(clean, trig);
  const double gap = std::abs(s.mean_clean - s.mean_triggered);
  report(6, gap <= kStripGapBits && !s.separable,
         fmt("mean entropy clean %.4f vs triggered %.4f bits, gap %.4f (tol %.1f); best TPR at FPR<5%% %.3f%s",
             s.mean_clean, s.mean_triggered, gap, kStripGapBits, s.best_tpr_at_fpr5,
             s.separable ? " (separable)" : ""));
}

void check_clustering(Experiment& ex) {
  const Classifier clf = as_classifier(ex.back);
  const auto pc = predict_labels(clf, ex.test.features);
  const auto pt = predict_labels(clf, ex.triggered);
  const ComplexRows test_rows = ex.test.complex_rows();
  ComplexRows rows;
  std::vector<bool> is_trig;
  std::vector<double> snr;
  std::size_t n_clean = 0, n_trig = 0;
  for (std::size_t i = 0; i < pc.size(); ++i)
    if (pc[i] == ex.cfg.y_tar) {
      rows.push_back(test_rows[i]), ++n_clean;
      is_trig.push_back(false), snr.push_back(ex.test.snr_db[i]);
    }
  for (std::size_t i = 0; i < pt.size(); ++i)
    if (pt[i] == ex.cfg.y_tar) {
      rows.push_back(ex.inj.triggered[i]), ++n_trig;
      is_trig.push_back(true), snr.push_back(ex.test.snr_db[ex.inj.frames[i]]);
    }

  // Two unit-variance Gaussian blobs 10 sigma apart.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Eigen::MatrixXd blobs(400, 2);
  for (int i = 0; i < 400; ++i)
    for (int c = 0; c < 2; ++c) blobs(i, c) = g(rng) + (i < 200 && c == 0 ? 10.0 : 0.0);
  const auto control = cluster_activations(blobs, 2, 2, ex.cfg.seed);

  if (rows.size() < 4) {
    report(7, false, fmt("only %zu frames predicted as the target class; clustering impossible", rows.size()));
    return;
  }
  const auto ac = activation_clustering(ex.back, rows_to_features(rows), kLastHiddenLayer, ex.cfg.pca_dims, 2,
                                        ex.cfg.seed);
  // What separates the clusters: the trigger or the channel SNR.
  for (int c = 0; c < 2; ++c) {
    std::map<double, int> by_snr;
    int trig = 0, total = 0;
    for (std::size_t i = 0; i < ac.assignment.size(); ++i)
      if (ac.assignment[i] == c) ++total, trig += is_trig[i], ++by_snr[snr[i]];
    std::string mix;
    for (const auto& [db, n] : by_snr) mix += fmt(" %gdB=%d", db, n);
    diag("activation cluster %d: %d frames, %d triggered;%s", c, total, trig, mix.c_str());
  }
  report(7, !ac.degenerate && ac.silhouette < kSilhouetteMax && control.silhouette >= kBlobSilhouetteMin,
         fmt("silhouette %.4f on %zu clean + %zu triggered frames (need < %.1f), cluster sizes %d/%d%s; "
             "two-blob control %.4f (need >= %.1f)",
             ac.silhouette, n_clean, n_trig, kSilhouetteMax, ac.cluster_sizes.at(0), ac.cluster_sizes.at(1),
             ac.degenerate ? " (degenerate)" : "", control.silhouette, kBlobSilhouetteMin));
}

void check_surrogate(const Experiment& ex) {
  const double rel = relative_error(ex.bd.bank.estimated_triggers, ex.bd.bank.true_triggers);
  report(8, ex.sur.heldout_nmse_db <= kSurrogateNmseDb && rel <= kTriggerRelErr,
         fmt("held-out NMSE %.2f dB (need <= %.0f); trigger relative error %.4f (need <= %.1f)", ex.sur.heldout_nmse_db,
             kSurrogateNmseDb, rel, kTriggerRelErr));
}

// ---------------------------------------------------------------- criterion 9

int run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + cli + "\" " + args + " >>\"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::map<std::string, std::string> digests(const fs::path& dir, bool* verified) {
  std::map<std::string, std::string> out;
  *verified = true;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.path().filename().string().ends_with(".manifest.json")) continue;
    const auto bytes = io::read_file(e.path());
    const auto m = io::RunManifest::from_json(std::string(bytes.begin(), bytes.end()));
    if (!io::verify_manifest(m, dir).empty()) *verified = false;
    for (const auto& a : m.artifacts) out[a.path] = a.crc32 + ":" + std::to_string(a.bytes);
  }
  return out;
}

// Runs the whole CLI pipeline in `dir` from `config_path`; returns the failing step or "".
std::string cli_pipeline(const std::string& cli, const fs::path& dir, const fs::path& config_path) {
  fs::create_directories(dir);
  const fs::path log = dir / "cli.log";
  const std::string base = "--config \"" + config_path.string() + "\" --out \"" + dir.string() + "\" ";
  const std::string clean = (dir / "clean.rfbd").string(), back = (dir / "backdoored.rfbd").string();
  const std::string bank = (dir / "triggers.rfbt").string();
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"gen", base + "gen"},
      {"surrogate", base + "train --kind surrogate"},
      {"poison", base + "poison --surrogate \"" + (dir / "surrogate.rfbm").string() + "\""},
      {"legit", base + "train --kind classifier --dataset \"" + clean + "\" --name legit"},
      {"backdoored", base + "train --kind classifier --dataset \"" + back + "\" --name backdoored"},
      {"eval", base + "--svg eval --legit \"" + (dir / "legit.rfbm").string() + "\" --backdoored \"" +
                   (dir / "backdoored.rfbm").string() + "\" --dataset \"" + clean + "\" --triggers \"" + bank + "\""},
      {"defend", base + "defend --which all --model \"" + (dir / "backdoored.rfbm").string() + "\" --dataset \"" +
                     clean + "\" --triggers \"" + bank + "\""},
  };
  for (const auto& [name, args] : steps) {
    const int rc = run_cli(cli, args, log);
    if (rc != 0 && !(name == "defend" && rc == 2)) return name + " exited " + std::to_string(rc);
  }
  return "";
}

std::string replay_check(const std::string& cli, const fs::path& root) {
  if (cli.empty() || !fs::exists(cli)) return "cli binary not available";
  const char* reduced =
      "m_symbols = 330\nepochs = 2\nsurrogate_probes = 200\nsurrogate_epochs = 2\nsurrogate_hidden = 8\n"
      "surrogate_depth = 1\nnc_steps = 10\nstrip_overlays = 8\ninject_count = 40\nseed = 99\n";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path first_cfg = root / "first.cfg";
  std::ofstream(first_cfg) << reduced;
  if (auto err = cli_pipeline(cli, root / "first", first_cfg); !err.empty()) return "first run: " + err;

  // Replay with the config snapshot stored in the first run's manifest.
  const auto bytes = io::read_file(root / "first" / "gen.manifest.json");
  const auto m = io::RunManifest::from_json(std::string(bytes.begin(), bytes.end()));
  const fs::path replay_cfg = root / "replay.cfg";
  std::ofstream(replay_cfg) << m.config_text;
  if (auto err = cli_pipeline(cli, root / "replay", replay_cfg); !err.empty()) return "replay run: " + err;

  bool ok_a = false, ok_b = false;
  const auto a = digests(root / "first", &ok_a), b = digests(root / "replay", &ok_b);
  if (!ok_a || !ok_b) return "manifest digest does not match file on disk";
  if (a.size() < 15) return "expected at least 15 artifacts, found " + std::to_string(a.size());
  for (const auto& [path, d] : a)
    if (!b.count(path) || b.at(path) != d) return "artifact " + path + " differs on replay";
  return "";
}

void check_properties(Experiment& ex, const std::string& cli) {
  std::vector<std::string> failed;
  const auto& cfg = ex.cfg;
  const PaModel pa{ex.clean.tx.clip_threshold};

  for (const auto& s : ex.clean.tx.symbols) {
    const auto once = pa_clip(s, pa);
    if (pa_clip(once, pa) != once) {
      failed.push_back("clipping idempotence");
      break;
    }
  }
  for (const auto& s : ex.clean.tx.symbols)
    if (!std::equal(s.begin(), s.begin() + cfg.cp_len, s.begin() + cfg.n_subcarriers)) {
      failed.push_back("cyclic prefix equality");
      break;
    }
  // Poison matrix recomputed sample by sample from the definition.
  bool poison_ok = ex.bd.plan.poison.size() == ex.bd.targets.size();
  const double a = ex.bd.plan.clip_threshold, delta = ex.bd.plan.delta, eps = ex.bd.plan.epsilon;
  for (std::size_t j = 0; poison_ok && j < ex.bd.targets.size(); ++j)
    for (std::size_t n = 0; n < ex.bd.targets[j].size(); ++n) {
      const double gap = a - std::abs(ex.bd.targets[j][n]);
      if (ex.bd.plan.poison[j][n] != (gap > delta ? 0.0 : gap + eps)) poison_ok = false;
    }
  if (!poison_ok) failed.push_back("poison oracle");

  const ComplexRows rows = ex.test.complex_rows();
  const ComplexRows bank = quantize_rows(ex.bd.bank.estimated_triggers);
  bool inj_ok = !ex.inj.frames.empty();
  for (std::size_t k = 0; inj_ok && k < ex.inj.frames.size(); ++k)
    for (std::size_t n = 0; n < rows[ex.inj.frames[k]].size(); ++n)
      if (ex.inj.triggered[k][n] - bank[ex.inj.mapping[k]][n] != rows[ex.inj.frames[k]][n]) inj_ok = false;
  if (!inj_ok) failed.push_back("injection reversibility");

  const double o = static_cast<double>(cfg.schemes.size());
  const double asr_legit = attack_success_rate(as_classifier(ex.legit), ex.triggered, cfg.y_tar);
  if (asr_legit > 3.0 / o) failed.push_back(fmt("legitimate-model ASR %.4f > 3/O", asr_legit));

  const auto t0 = Clock::now();
  const std::string replay = replay_check(cli, fs::temp_directory_path() / "rftrojan_acceptance_replay");
  if (!replay.empty()) failed.push_back("replay: " + replay);
  diag("CLI replay took %.0fs", seconds_since(t0));

  std::string detail = fmt("idempotence, CP, poison oracle, injection reversibility, legitimate ASR %.4f <= %.4f, "
                           "manifest replay",
                           asr_legit, 3.0 / o);
  if (!failed.empty()) {
    detail = "failed:";
    for (const auto& f : failed) detail += " [" + f + "]";
  }
  report(9, failed.empty(), detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const auto t0 = Clock::now();
  check_kernels();

  Experiment ex{ExperimentConfig{}};
  diag("scaled profile: M=%lld N=%d cp=%d O=%zu rho=%.1f%% seed=%llu", static_cast<long long>(ex.cfg.m_symbols),
       ex.cfg.n_subcarriers, ex.cfg.cp_len, ex.cfg.schemes.size(), ex.cfg.rho_percent,
       static_cast<unsigned long long>(ex.cfg.seed));
  try {
    run_experiment(ex);
  } catch (const std::exception& e) {
    for (int id = 2; id <= 9; ++id) report(id, false, std::string("scaled experiment aborted: ") + e.what());
    return 1;
  }
  check_attack(ex);
  check_dormancy(ex);
  check_neural_cleanse(ex);
  check_strip(ex);
  check_clustering(ex);
  check_surrogate(ex);
  check_properties(ex, cli);
  diag("total %.0fs, %d criteria failed", seconds_since(t0), failures);
  return failures == 0 ? 0 : 1;
}
