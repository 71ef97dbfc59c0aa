// Power-amplifier clipping, multipath fading with AWGN and phase offset,
// and decision-aided clipping noise cancellation at the receiver.
#pragma once

#include <limits>
#include <vector>

#include "rftrojan/dsp.hpp"
#include "rftrojan/rng.hpp"

namespace rft {

/// Soft-envelope clipper: |x| >= clip_threshold is limited to the threshold, phase kept.
struct PaModel {
  double clip_threshold = std::numeric_limits<double>::infinity();
};

struct ChannelConfig {
  int n_taps = 3;
  double decay = 0.5;  // per-tap power ratio of the exponential delay profile
  std::vector<int> delay_set = {0, 1, 2};
  double snr_db = std::numeric_limits<double>::infinity();

  void validate() const;
};

struct ChannelRealization {
  ComplexVec taps;
  std::vector<int> delays;
  double phase_offset = 0.0;
  double snr_db = std::numeric_limits<double>::infinity();

  /// Single unit tap, no delay, no rotation, no noise.
  static ChannelRealization identity();
};

struct CncConfig {
  int n_iterations = 2;
  Scheme scheme = Scheme::kQpsk;
};

ComplexVec pa_clip(std::span<const cplx> x, const PaModel& pa);

/// Complex Gaussian taps following the exponential profile, before any normalization.
ComplexVec draw_profile_taps(const ChannelConfig& cfg, Rng& rng);

/// Unit-energy taps, sorted distinct delays from the configured set, uniform phase offset.
ChannelRealization sample_channel(const ChannelConfig& cfg, Rng& rng);

/// y[n] = e^{j theta} sum_l x[n - l - tau_l] h_l + w[n]; samples outside the frame are zero.
ComplexVec channel_apply(std::span<const cplx> x, const ChannelRealization& ch, Rng& rng);

ComplexVec cnc_receive(std::span<const cplx> y, const PaModel& pa, const CncConfig& cnc, const OfdmConfig& cfg);

}  // namespace rft
