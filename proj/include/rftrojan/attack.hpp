// Physical poisoning: choose target frames, push near-threshold samples past
// the PA clip level, relabel, and derive the resulting trigger patterns.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rftrojan/dsp.hpp"
#include "rftrojan/rng.hpp"

namespace rft {

using ComplexRows = std::vector<ComplexVec>;
using RealRows = std::vector<std::vector<double>>;

struct PoisonPlan {
  std::vector<std::size_t> target_indices;  // J, ascending
  double clip_threshold = 0.0;              // A
  double delta = 0.0;
  double epsilon = 0.0;
  int target_class = 0;
  RealRows poison;                          // one row per entry of target_indices
  std::vector<std::size_t> dropped;         // targets whose poison row was all zero
};

struct TriggerBank {
  std::vector<std::size_t> source_frames;   // frame index behind each row
  ComplexRows true_triggers;                // PA(C*) - PA(C)
  ComplexRows estimated_triggers;           // g(C*) - g(C)
};

struct Injection {
  ComplexRows triggered;                    // one row per injected frame
  std::vector<std::size_t> frames;          // I, positions in the test set
  std::vector<std::size_t> mapping;         // pi(i): trigger row per injected frame
};

/// round(M * rho / 100) distinct frames with label != target_class, ascending.
std::vector<std::size_t> select_targets(std::size_t n_frames, double rho_percent, std::span<const int> labels,
                                        int target_class, Rng& rng);

/// Xi[j,n] = 0 if A - |C[j,n]| > delta, else A - |C[j,n]| + epsilon.
RealRows build_poison(const ComplexRows& targets, double clip_threshold, double delta, double epsilon);

/// C*[j,n] = C[j,n] + Xi[j,n] e^{j arg C[j,n]}; untouched where Xi == 0.
ComplexRows apply_poison(const ComplexRows& targets, const RealRows& poison);

struct RelabelResult {
  std::vector<int> labels;
  std::vector<std::size_t> effective;  // targets that carry at least one nonzero poison entry
  std::vector<std::size_t> dropped;
};

RelabelResult relabel(std::span<const int> labels, std::span<const std::size_t> targets, const RealRows& poison,
                      int target_class);

/// Element-wise PA(C*) - PA(C).
ComplexRows extract_true_triggers(const ComplexRows& clipped_poisoned, const ComplexRows& clipped_clean);

/// Batch model of the PA: maps pre-PA rows to predicted post-PA rows.
using PaSurrogate = std::function<ComplexRows(const ComplexRows&)>;

/// g(C*) - g(C) row-wise.
ComplexRows estimate_triggers(const PaSurrogate& surrogate, const ComplexRows& targets, const ComplexRows& poisoned);

/// X*[i] = X[frames[i]] + bank[pi(i)], pi drawn uniformly per injected frame.
Injection inject_triggers(const ComplexRows& test_frames, const ComplexRows& bank, std::span<const std::size_t> frames,
                          Rng& rng);

/// ||est - ref||^2 / ||ref||^2 over every entry.
double relative_error(const ComplexRows& est, const ComplexRows& ref);

}  // namespace rft
