// rftrojan: dataset generation, poisoning, training, evaluation and defense runs.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "rftrojan/binio.hpp"
#include "rftrojan/config.hpp"
#include "rftrojan/defense.hpp"
#include "rftrojan/pipeline.hpp"
#include "rftrojan/storage.hpp"

namespace fs = std::filesystem;
using namespace rft;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kFlagged = 2, kRuntime = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  bool svg = false;
};

ExperimentConfig load(const Globals& g) {
  ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Globals& g) {
  fs::create_directories(g.out);
  return g.out;
}

fs::path require_file(const std::string& path, const char* what) {
  if (path.empty() || !fs::exists(path)) throw UsageError(std::string("missing ") + what + ": '" + path + "'");
  return path;
}

int frame_len(const ExperimentConfig& cfg) { return cfg.n_subcarriers + cfg.cp_len; }

RealDataset load_matching_dataset(const ExperimentConfig& cfg, const std::string& path) {
  io::DatasetHeader h;
  RealDataset d = io::load_dataset(require_file(path, "dataset"), &h);
  if (h.n_subcarriers != cfg.n_subcarriers || h.cp_len != cfg.cp_len ||
      h.n_classes != static_cast<int>(cfg.schemes.size()) || h.m != static_cast<std::uint64_t>(cfg.m_symbols))
    throw ConfigError("dataset " + path + " was not generated with this config");
  return d;
}

nn::Model<float> load_classifier(const ExperimentConfig& cfg, const std::string& path) {
  nn::Model<float> m = make_classifier(frame_len(cfg), static_cast<int>(cfg.schemes.size()), cfg.dropout, cfg.seed);
  m.assign(nn::load_checkpoint(require_file(path, "checkpoint")));
  return m;
}

void write_manifest(const fs::path& dir, const std::string& command, const ExperimentConfig& cfg,
                    const std::vector<std::string>& files) {
  io::RunManifest m;
  m.command = command;
  m.config_text = cfg.to_text();
  m.seed = cfg.seed;
  for (const auto& f : files) m.add(dir, f);
  io::write_text_atomic(dir / (command + ".manifest.json"), m.to_json());
}

std::string snr_key(double s) { return io::CsvTable::num(s); }

int cmd_gen(const Globals& g) {
  const ExperimentConfig cfg = load(g);
  const fs::path dir = out_dir(g);
  const CleanDataset clean = generate_clean_dataset(cfg);
  io::save_dataset(dir / "clean.rfbd", clean.data, cfg.n_subcarriers, cfg.cp_len);
  write_manifest(dir, "gen", cfg, {"clean.rfbd"});
  std::map<int, int> counts;
  for (int y : clean.data.labels) ++counts[y];
  std::printf("M=%zu shape=%zux2x%d clip_threshold=%.6f input_power=%.6f\n", clean.data.size(), clean.data.size(),
              frame_len(cfg), clean.tx.clip_threshold, clean.tx.input_power);
  for (const auto& [y, c] : counts)
    std::printf("  %-7s %d\n", std::string(scheme_name(cfg.schemes[static_cast<std::size_t>(y)])).c_str(), c);
  return kOk;
}

int cmd_poison(const Globals& g, const std::string& dataset, const std::string& surrogate_path) {
  const ExperimentConfig cfg = load(g);
  const fs::path dir = out_dir(g);
  const std::string src = dataset.empty() ? (dir / "clean.rfbd").string() : dataset;
  const auto on_disk = io::read_file(require_file(src, "dataset"));
  const CleanDataset clean = generate_clean_dataset(cfg);
  if (io::encode_dataset(clean.data, cfg.n_subcarriers, cfg.cp_len) != on_disk)
    throw ConfigError("dataset " + src + " does not match the config and seed");

  BackdooredDataset bd = generate_backdoored_dataset(cfg, clean);
  std::optional<nn::Model<float>> sur;
  if (!surrogate_path.empty()) {
    sur.emplace(make_surrogate(frame_len(cfg), SurrogateHyper::from(cfg)));
    sur->assign(nn::load_checkpoint(require_file(surrogate_path, "surrogate checkpoint")));
    if (!bd.targets.empty()) attach_estimated_triggers(bd, as_pa_surrogate(*sur));
  }
  io::save_dataset(dir / "backdoored.rfbd", bd.data, cfg.n_subcarriers, cfg.cp_len);
  io::save_trigger_bank(dir / "triggers.rfbt", bd.bank);
  io::write_text_atomic(dir / "plan.json", io::plan_to_json(bd.plan, cfg.rho_percent, clean.tx.input_power));
  write_manifest(dir, "poison", cfg, {"backdoored.rfbd", "triggers.rfbt", "plan.json"});

  const std::size_t targeted = bd.plan.target_indices.size() + bd.plan.dropped.size();
  std::printf("targeted=%zu effective=%zu dropped=%zu effective_rho=%.3f%%\n", targeted, bd.plan.target_indices.size(),
              bd.plan.dropped.size(), 100.0 * static_cast<double>(bd.plan.target_indices.size()) / static_cast<double>(cfg.m_symbols));
  if (!bd.bank.estimated_triggers.empty())
    std::printf("trigger_relative_error=%.6f\n", relative_error(bd.bank.estimated_triggers, bd.bank.true_triggers));
  else if (!bd.targets.empty())
    std::printf("no surrogate given: trigger bank carries true triggers only\n");
  return kOk;
}

int cmd_train(const Globals& g, const std::string& kind, const std::string& dataset, std::string name,
              bool digital_trigger) {
  const ExperimentConfig cfg = load(g);
  const fs::path dir = out_dir(g);
  if (kind == "classifier") {
    if (name.empty()) name = "classifier";
    RealDataset data = load_matching_dataset(cfg, dataset);
    const Split sp = split_dataset(data.size(), cfg.seed);
    if (digital_trigger) {
      // Detector positive control: stamp only the training split.
      RealDataset train_part = plant_digital_backdoor(data.subset(sp.train), control_trigger(frame_len(cfg)), cfg.y_tar,
                                                      kControlPoisonFraction, cfg.seed);
      const std::size_t per = data.features.inner();
      for (std::size_t k = 0; k < sp.train.size(); ++k) {
        const std::size_t i = sp.train[k];
        std::copy_n(train_part.features.ptr() + per * k, per, data.features.ptr() + per * i);
        data.labels[i] = train_part.labels[k];
        data.poisoned[i] = train_part.poisoned[k];
      }
    }
    io::CsvTable log({"epoch", "train_loss", "val_loss", "val_acc"});
    const TrainResult res = train_classifier(data.subset(sp.train), data.subset(sp.val), TrainHyper::from(cfg),
                                             [&](const EpochLog& e) {
                                               std::printf("epoch %d train_loss %.4f val_loss %.4f val_acc %.4f\n", e.epoch,
                                                           e.train_loss, e.val_loss, e.val_metric);
                                               std::fflush(stdout);
                                               log.row({std::to_string(e.epoch), io::CsvTable::num(e.train_loss),
                                                        io::CsvTable::num(e.val_loss), io::CsvTable::num(e.val_metric)});
                                             });
    nn::save_checkpoint(res.params, dir / (name + ".rfbm"));
    io::write_text_atomic(dir / (name + ".log.csv"), log.str());
    std::printf("best epoch %d\n", res.best_epoch);
  } else if (kind == "surrogate") {
    if (name.empty()) name = "surrogate";
    if (!dataset.empty()) load_matching_dataset(cfg, dataset);
    const Transmission tx = transmit(cfg);
    const ProbeSet probes = generate_probes(cfg, static_cast<std::size_t>(cfg.surrogate_probes), tx.clip_threshold,
                                            splitmix64(cfg.seed));
    io::CsvTable log({"epoch", "train_loss", "val_loss", "val_nmse_db"});
    const SurrogateResult res = train_surrogate(probes, SurrogateHyper::from(cfg), [&](const EpochLog& e) {
      std::printf("epoch %d train_loss %.6g val_nmse_db %.3f\n", e.epoch, e.train_loss, e.val_metric);
      std::fflush(stdout);
      log.row({std::to_string(e.epoch), io::CsvTable::num(e.train_loss), io::CsvTable::num(e.val_loss),
               io::CsvTable::num(e.val_metric)});
    });
    nn::save_checkpoint(res.params, dir / (name + ".rfbm"));
    io::write_text_atomic(dir / (name + ".log.csv"), log.str());
    std::printf("held-out NMSE %.3f dB\n", res.heldout_nmse_db);
  } else {
    throw UsageError("--kind must be classifier or surrogate");
  }
  write_manifest(dir, "train_" + name, cfg, {name + ".rfbm", name + ".log.csv"});
  return kOk;
}

struct TestContext {
  RealDataset test;
  RealDataset val;
  Injection inj;
  FloatTensor triggered;
};

TestContext make_test_context(const ExperimentConfig& cfg, const std::string& dataset, const std::string& triggers) {
  const RealDataset data = load_matching_dataset(cfg, dataset);
  const TriggerBank bank = io::load_trigger_bank(require_file(triggers, "trigger bank"));
  if (bank.estimated_triggers.empty())
    throw UsageError("trigger bank has no estimated triggers; run poison with --surrogate");
  const Split sp = split_dataset(data.size(), cfg.seed);
  TestContext ctx;
  ctx.test = data.subset(sp.test);
  ctx.val = data.subset(sp.val);
  ctx.inj = build_test_injection(ctx.test, bank.estimated_triggers, cfg.y_tar, cfg.inject_count, cfg.seed);
  if (ctx.inj.triggered.empty()) throw UsageError("no test frames eligible for trigger injection");
  ctx.triggered = rows_to_features(ctx.inj.triggered);
  return ctx;
}

int cmd_eval(const Globals& g, const std::string& legit_path, const std::string& back_path, const std::string& dataset,
             const std::string& triggers) {
  const ExperimentConfig cfg = load(g);
  const fs::path dir = out_dir(g);
  nn::Model<float> legit = load_classifier(cfg, legit_path);
  nn::Model<float> back = load_classifier(cfg, back_path);
  const TestContext ctx = make_test_context(cfg, dataset, triggers);
  const AccuracyReport alc = evaluate_accuracy(as_classifier(legit), ctx.test);
  const AccuracyReport abc = evaluate_accuracy(as_classifier(back), ctx.test);

  const auto pred_back = predict_labels(as_classifier(back), ctx.triggered);
  const auto pred_legit = predict_labels(as_classifier(legit), ctx.triggered);
  std::map<double, std::pair<int, int>> asr_bucket;
  for (std::size_t k = 0; k < ctx.inj.frames.size(); ++k) {
    auto& b = asr_bucket[ctx.test.snr_db[ctx.inj.frames[k]]];
    b.first += pred_back[k] == cfg.y_tar;
    ++b.second;
  }
  const double asr = attack_success_rate(as_classifier(back), ctx.triggered, cfg.y_tar);
  const double asr_legit = attack_success_rate(as_classifier(legit), ctx.triggered, cfg.y_tar);

  io::CsvTable t({"snr_db", "rho_percent", "alc", "abc", "asr"});
  io::Series s_alc{"ALC", {}, {}}, s_abc{"ABC", {}, {}}, s_asr{"ASR", {}, {}};
  for (const auto& [snr, acc] : alc.per_snr) {
    const auto it = asr_bucket.find(snr);
    const double a = it == asr_bucket.end() ? std::nan("") : static_cast<double>(it->second.first) / it->second.second;
    const double b = abc.per_snr.count(snr) ? abc.per_snr.at(snr) : std::nan("");
    t.row({snr_key(snr), io::CsvTable::num(cfg.rho_percent), io::CsvTable::num(acc), io::CsvTable::num(b),
           io::CsvTable::num(a)});
    s_alc.x.push_back(snr), s_alc.y.push_back(acc);
    s_abc.x.push_back(snr), s_abc.y.push_back(b);
    s_asr.x.push_back(snr), s_asr.y.push_back(a);
  }
  t.row({"all", io::CsvTable::num(cfg.rho_percent), io::CsvTable::num(alc.overall), io::CsvTable::num(abc.overall),
         io::CsvTable::num(asr)});
  io::write_text_atomic(dir / "metrics.csv", t.str());
  std::vector<std::string> files = {"metrics.csv"};
  if (g.svg) {
    io::write_text_atomic(dir / "asr.svg", io::line_plot_svg("Attack success rate", "SNR (dB)", "ASR", {s_asr}));
    io::write_text_atomic(dir / "accuracy.svg",
                          io::line_plot_svg("Clean test accuracy", "SNR (dB)", "accuracy", {s_alc, s_abc}));
    files.insert(files.end(), {"asr.svg", "accuracy.svg"});
  }
  write_manifest(dir, "eval", cfg, files);
  std::cout << t.str();
  std::printf("triggered frames %zu; legitimate-model ASR %.4f\n", ctx.inj.frames.size(), asr_legit);
  return kOk;
}

int cmd_defend(const Globals& g, const std::string& which, const std::string& model_path, const std::string& dataset,
               const std::string& triggers) {
  const std::set<std::string> allowed = {"nc", "strip", "ac", "all"};
  if (!allowed.count(which)) throw UsageError("--which must be nc, strip, ac or all");
  const ExperimentConfig cfg = load(g);
  const fs::path dir = out_dir(g);
  nn::Model<float> model = load_classifier(cfg, model_path);
  const TestContext ctx = make_test_context(cfg, dataset, triggers);
  const int o = static_cast<int>(cfg.schemes.size());
  DefenseReport rep;
  rep.seed = cfg.seed;
  rep.target_class = cfg.y_tar;
  std::vector<std::string> files;

  if (which == "nc" || which == "all") {
    NeuralCleanseConfig nc;
    nc.steps = cfg.nc_steps;
    nc.lr = cfg.nc_lr;
    nc.lambda = cfg.nc_lambda;
    nc.batch = cfg.nc_batch;
    nc.seed = cfg.seed;
    const auto rev = neural_cleanse(model, ctx.test.features, o, nc);
    for (const auto& r : rev) {
      rep.nc_mask_norms.push_back(r.mask_norm);
      rep.nc_success.push_back(r.success);
    }
    const MadResult mad = mad_anomaly(rep.nc_mask_norms);
    rep.nc_anomaly_indices = mad.indices;
    rep.nc_degenerate = mad.degenerate;
    rep.nc_flagged = flagged_classes(rep.nc_mask_norms, mad);
    rep.has_nc = true;
    io::CsvTable t({"class", "scheme", "mask_norm", "success", "reached", "anomaly_index", "flagged"});
    for (int c = 0; c < o; ++c) {
      const bool f = std::find(rep.nc_flagged.begin(), rep.nc_flagged.end(), c) != rep.nc_flagged.end();
      t.row({std::to_string(c), std::string(scheme_name(cfg.schemes[static_cast<std::size_t>(c)])),
             io::CsvTable::num(rep.nc_mask_norms[static_cast<std::size_t>(c)]),
             io::CsvTable::num(rep.nc_success[static_cast<std::size_t>(c)]),
             rev[static_cast<std::size_t>(c)].reached ? "1" : "0",
             io::CsvTable::num(rep.nc_anomaly_indices[static_cast<std::size_t>(c)]), f ? "1" : "0"});
    }
    io::write_text_atomic(dir / "defense_nc.csv", t.str());
    files.push_back("defense_nc.csv");
    std::cout << t.str();
  }

  if (which == "strip" || which == "all") {
    const FloatTensor clean_suspects = rows_to_features([&] {
      ComplexRows rows;
      const ComplexRows all = ctx.test.complex_rows();
      for (std::size_t i : ctx.inj.frames) rows.push_back(all[i]);
      return rows;
    }());
    const Classifier clf = as_classifier(model);
    rep.strip_entropies_clean = strip_entropies(clf, clean_suspects, ctx.val.features, cfg.strip_overlays, cfg.seed);
    rep.strip_entropies_triggered = strip_entropies(clf, ctx.triggered, ctx.val.features, cfg.strip_overlays, cfg.seed);
    rep.strip = summarize_strip(rep.strip_entropies_clean, rep.strip_entropies_triggered);
    rep.has_strip = true;
    io::CsvTable t({"mean_entropy_clean", "mean_entropy_triggered", "gap_bits", "best_tpr_at_fpr5", "separable",
                    "overlays", "seed"});
    t.row({io::CsvTable::num(rep.strip.mean_clean), io::CsvTable::num(rep.strip.mean_triggered),
           io::CsvTable::num(std::abs(rep.strip.mean_clean - rep.strip.mean_triggered)),
           io::CsvTable::num(rep.strip.best_tpr_at_fpr5), rep.strip.separable ? "1" : "0",
           std::to_string(cfg.strip_overlays), std::to_string(cfg.seed)});
    io::CsvTable sweep({"threshold", "fpr", "tpr"});
    for (const auto& p : rep.strip.sweep)
      sweep.row({io::CsvTable::num(p.threshold), io::CsvTable::num(p.fpr), io::CsvTable::num(p.tpr)});
    io::CsvTable ent({"set", "entropy"});
    for (double h : rep.strip_entropies_clean) ent.row({"clean", io::CsvTable::num(h)});
    for (double h : rep.strip_entropies_triggered) ent.row({"triggered", io::CsvTable::num(h)});
    io::write_text_atomic(dir / "defense_strip.csv", t.str());
    io::write_text_atomic(dir / "defense_strip_sweep.csv", sweep.str());
    io::write_text_atomic(dir / "defense_strip_entropies.csv", ent.str());
    files.insert(files.end(), {"defense_strip.csv", "defense_strip_sweep.csv", "defense_strip_entropies.csv"});
    std::cout << t.str();
  }

  if (which == "ac" || which == "all") {
    // Frames the model assigns to the target class, clean and triggered alike.
    const Classifier clf = as_classifier(model);
    const auto pc = predict_labels(clf, ctx.test.features);
    const auto pt = predict_labels(clf, ctx.triggered);
    ComplexRows rows;
    const ComplexRows test_rows = ctx.test.complex_rows();
    for (std::size_t i = 0; i < pc.size(); ++i)
      if (pc[i] == cfg.y_tar) rows.push_back(test_rows[i]);
    for (std::size_t i = 0; i < pt.size(); ++i)
      if (pt[i] == cfg.y_tar) rows.push_back(ctx.inj.triggered[i]);
    io::CsvTable t({"layer", "pca_dims", "k", "frames", "silhouette", "degenerate", "cluster_sizes", "seed"});
    if (rows.size() < 4) {
      std::fprintf(stderr, "activation clustering skipped: only %zu frames predicted as the target class\n", rows.size());
      t.row({std::to_string(kLastHiddenLayer), std::to_string(cfg.pca_dims), "2", std::to_string(rows.size()), "nan",
             "1", "", std::to_string(cfg.seed)});
    } else {
      rep.ac = activation_clustering(model, rows_to_features(rows), kLastHiddenLayer, cfg.pca_dims, 2, cfg.seed);
      rep.has_ac = true;
      std::string sizes;
      for (int s : rep.ac.cluster_sizes) sizes += (sizes.empty() ? "" : ";") + std::to_string(s);
      t.row({std::to_string(kLastHiddenLayer), std::to_string(cfg.pca_dims), "2", std::to_string(rows.size()),
             io::CsvTable::num(rep.ac.silhouette), rep.ac.degenerate ? "1" : "0", sizes, std::to_string(cfg.seed)});
    }
    io::write_text_atomic(dir / "defense_ac.csv", t.str());
    files.push_back("defense_ac.csv");
    std::cout << t.str();
  }

  write_manifest(dir, "defend_" + which, cfg, files);
  const bool flagged = rep.flagged();
  std::printf("%s\n", flagged ? "backdoor flagged by at least one defense" : "no defense flagged the model");
  return flagged ? kFlagged : kOk;
}

int cmd_report(const Globals& g) {
  const fs::path dir = g.out;
  if (!fs::is_directory(dir)) throw UsageError("output directory " + dir.string() + " does not exist");
  std::vector<fs::path> manifests;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().ends_with(".manifest.json")) manifests.push_back(e.path());
  std::sort(manifests.begin(), manifests.end());
  bool ok = true;
  for (const auto& p : manifests) {
    const auto bytes = io::read_file(p);
    const io::RunManifest m = io::RunManifest::from_json(std::string(bytes.begin(), bytes.end()));
    const auto bad = io::verify_manifest(m, dir);
    std::printf("%-28s seed=%llu artifacts=%zu %s\n", p.filename().string().c_str(),
                static_cast<unsigned long long>(m.seed), m.artifacts.size(), bad.empty() ? "ok" : "MISMATCH");
    for (const auto& b : bad) std::printf("  digest mismatch: %s\n", b.c_str());
    ok = ok && bad.empty();
  }
  for (const char* name : {"metrics.csv", "defense_nc.csv", "defense_strip.csv", "defense_ac.csv"}) {
    if (!fs::exists(dir / name)) continue;
    const auto bytes = io::read_file(dir / name);
    std::printf("\n== %s\n%s", name, std::string(bytes.begin(), bytes.end()).c_str());
  }
  return ok ? kOk : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physical backdoor attacks on OFDM modulation classifiers"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "key = value experiment config");
  app.add_option("--seed", g.seed, "master seed (overrides the config)");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_flag("--svg", g.svg, "emit SVG plots where supported");

  auto* gen = app.add_subcommand("gen", "generate the clean dataset");

  std::string dataset, surrogate, kind, name, legit, backdoored, triggers, model, which = "all";
  auto* poison = app.add_subcommand("poison", "poison the dataset and build the trigger bank");
  poison->add_option("--dataset", dataset, "clean dataset (default OUT/clean.rfbd)");
  poison->add_option("--surrogate", surrogate, "surrogate checkpoint for trigger estimation");

  auto* train = app.add_subcommand("train", "train a classifier or the PA surrogate");
  train->add_option("--kind", kind, "classifier | surrogate")->required();
  train->add_option("--dataset", dataset, "training dataset");
  train->add_option("--name", name, "checkpoint base name");
  bool digital = false;
  train->add_flag("--digital-trigger", digital, "plant the additive digital control trigger in the training split");

  auto* eval = app.add_subcommand("eval", "accuracy and attack success metrics");
  eval->add_option("--legit", legit, "legitimate model checkpoint")->required();
  eval->add_option("--backdoored", backdoored, "backdoored model checkpoint")->required();
  eval->add_option("--dataset", dataset, "clean dataset")->required();
  eval->add_option("--triggers", triggers, "trigger bank")->required();

  auto* defend = app.add_subcommand("defend", "run backdoor detectors against a model");
  defend->add_option("--which", which, "nc | strip | ac | all")->capture_default_str();
  defend->add_option("--model", model, "model checkpoint")->required();
  defend->add_option("--dataset", dataset, "clean dataset")->required();
  defend->add_option("--triggers", triggers, "trigger bank")->required();

  auto* report = app.add_subcommand("report", "verify manifests and summarize results");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(g);
    if (poison->parsed()) return cmd_poison(g, dataset, surrogate);
    if (train->parsed()) {
      if (kind == "classifier" && dataset.empty()) throw UsageError("train --kind classifier needs --dataset");
      if (digital && kind != "classifier") throw UsageError("--digital-trigger applies to classifiers only");
      return cmd_train(g, kind, dataset, name, digital);
    }
    if (eval->parsed()) return cmd_eval(g, legit, backdoored, dataset, triggers);
    if (defend->parsed()) return cmd_defend(g, which, model, dataset, triggers);
    if (report->parsed()) return cmd_report(g);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failed: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
