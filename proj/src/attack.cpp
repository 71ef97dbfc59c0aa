#include "rftrojan/attack.hpp"

#include <algorithm>
#include <cmath>

namespace rft {
namespace {

void check_same_shape(const ComplexRows& a, const ComplexRows& b, const char* what) {
  if (a.size() != b.size()) throw Error(std::string(what) + ": row count mismatch");
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j].size() != b[j].size()) throw Error(std::string(what) + ": row length mismatch");
}

}  // namespace

std::vector<std::size_t> select_targets(std::size_t n_frames, double rho_percent, std::span<const int> labels,
                                        int target_class, Rng& rng) {
  if (!(rho_percent > 0.0 && rho_percent <= 100.0)) throw Error("poisoning ratio must lie in (0, 100]");
  if (labels.size() != n_frames) throw Error("one label per frame required");
  const auto count = static_cast<std::size_t>(std::llround(static_cast<double>(n_frames) * rho_percent / 100.0));
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < n_frames; ++i)
    if (labels[i] != target_class) eligible.push_back(i);
  if (eligible.size() < count) throw Error("too few frames outside the target class to poison");
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
    std::swap(eligible[i], eligible[pick(rng)]);
  }
  eligible.resize(count);
  std::sort(eligible.begin(), eligible.end());
  return eligible;
}

RealRows build_poison(const ComplexRows& targets, double clip_threshold, double delta, double epsilon) {
  if (!(delta > 0.0 && clip_threshold > delta && epsilon > 0.0))
    throw Error("poison thresholds must satisfy A > delta > 0 and epsilon > 0");
  RealRows poison(targets.size());
  for (std::size_t j = 0; j < targets.size(); ++j) {
    poison[j].resize(targets[j].size());
    for (std::size_t n = 0; n < targets[j].size(); ++n) {
      const double margin = clip_threshold - std::abs(targets[j][n]);
      poison[j][n] = margin > delta ? 0.0 : margin + epsilon;
    }
  }
  return poison;
}

ComplexRows apply_poison(const ComplexRows& targets, const RealRows& poison) {
  if (targets.size() != poison.size()) throw Error("apply_poison: row count mismatch");
  ComplexRows out = targets;
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (out[j].size() != poison[j].size()) throw Error("apply_poison: row length mismatch");
    for (std::size_t n = 0; n < out[j].size(); ++n)
      // Xi may be negative for samples already above A; polar() needs rho >= 0.
      if (poison[j][n] != 0.0) out[j][n] += poison[j][n] * std::polar(1.0, std::arg(out[j][n]));
  }
  return out;
}

RelabelResult relabel(std::span<const int> labels, std::span<const std::size_t> targets, const RealRows& poison,
                      int target_class) {
  if (targets.size() != poison.size()) throw Error("relabel: one poison row per target required");
  RelabelResult r;
  r.labels.assign(labels.begin(), labels.end());
  for (std::size_t j = 0; j < targets.size(); ++j) {
    if (targets[j] >= labels.size()) throw Error("relabel: target index out of range");
    const bool active = std::any_of(poison[j].begin(), poison[j].end(), [](double v) { return v != 0.0; });
    if (active) {
      r.labels[targets[j]] = target_class;
      r.effective.push_back(targets[j]);
    } else {
      r.dropped.push_back(targets[j]);
    }
  }
  return r;
}

ComplexRows extract_true_triggers(const ComplexRows& clipped_poisoned, const ComplexRows& clipped_clean) {
  check_same_shape(clipped_poisoned, clipped_clean, "extract_true_triggers");
  ComplexRows out = clipped_poisoned;
  for (std::size_t j = 0; j < out.size(); ++j)
    for (std::size_t n = 0; n < out[j].size(); ++n) out[j][n] -= clipped_clean[j][n];
  return out;
}

ComplexRows estimate_triggers(const PaSurrogate& surrogate, const ComplexRows& targets, const ComplexRows& poisoned) {
  if (!surrogate) throw Error("estimate_triggers: surrogate is not trained");
  check_same_shape(targets, poisoned, "estimate_triggers");
  const ComplexRows clean_hat = surrogate(targets);
  const ComplexRows poisoned_hat = surrogate(poisoned);
  check_same_shape(clean_hat, targets, "estimate_triggers: surrogate output");
  check_same_shape(poisoned_hat, poisoned, "estimate_triggers: surrogate output");
  return extract_true_triggers(poisoned_hat, clean_hat);
}

Injection inject_triggers(const ComplexRows& test_frames, const ComplexRows& bank, std::span<const std::size_t> frames,
                          Rng& rng) {
  if (bank.empty()) throw Error("inject_triggers: empty trigger bank");
  Injection inj;
  inj.frames.assign(frames.begin(), frames.end());
  std::uniform_int_distribution<std::size_t> pick(0, bank.size() - 1);
  for (std::size_t i : frames) {
    if (i >= test_frames.size()) throw Error("inject_triggers: frame index out of range");
    const std::size_t row = pick(rng);
    if (bank[row].size() != test_frames[i].size()) throw Error("inject_triggers: trigger length mismatch");
    ComplexVec x = test_frames[i];
    for (std::size_t n = 0; n < x.size(); ++n) x[n] += bank[row][n];
    inj.triggered.push_back(std::move(x));
    inj.mapping.push_back(row);
  }
  return inj;
}

double relative_error(const ComplexRows& est, const ComplexRows& ref) {
  check_same_shape(est, ref, "relative_error");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < ref.size(); ++j)
    for (std::size_t n = 0; n < ref[j].size(); ++n) {
      num += std::norm(est[j][n] - ref[j][n]);
      den += std::norm(ref[j][n]);
    }
  if (den == 0.0) throw Error("relative_error: reference is all zero");
  return num / den;
}

}  // namespace rft
