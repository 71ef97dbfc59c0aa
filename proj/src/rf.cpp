#include "rftrojan/rf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rft {

void ChannelConfig::validate() const {
  if (n_taps < 1) throw Error("channel needs at least one tap");
  if (!(decay > 0.0)) throw Error("channel decay must be positive");
  if (static_cast<int>(delay_set.size()) < n_taps) throw Error("delay set smaller than tap count");
  std::vector<int> sorted = delay_set;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw Error("delay set has duplicates");
  if (sorted.front() < 0) throw Error("delays must be non-negative");
}

ChannelRealization ChannelRealization::identity() {
  ChannelRealization ch;
  ch.taps = {cplx(1.0, 0.0)};
  ch.delays = {0};
  return ch;
}

ComplexVec pa_clip(std::span<const cplx> x, const PaModel& pa) {
  ComplexVec out(x.begin(), x.end());
  const double a = pa.clip_threshold;
  for (auto& z : out) {
    // |z| == a is already a fixed point; outputs are nudged to |z| <= a so a
    // second pass leaves them bit-identical.
    const double mag = std::abs(z);
    if (mag > a) {
      z *= a / mag;
      while (std::abs(z) > a) z *= 1.0 - 0x1p-52;
    }
  }
  return out;
}

ComplexVec draw_profile_taps(const ChannelConfig& cfg, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexVec taps(static_cast<std::size_t>(cfg.n_taps));
  double power = 1.0;
  for (auto& h : taps) {
    const double sigma = std::sqrt(power / 2.0);
    const double re = gauss(rng);
    const double im = gauss(rng);
    h = {sigma * re, sigma * im};
    power *= cfg.decay;
  }
  return taps;
}

ChannelRealization sample_channel(const ChannelConfig& cfg, Rng& rng) {
  cfg.validate();
  ChannelRealization ch;
  ch.taps = draw_profile_taps(cfg, rng);
  double energy = 0.0;
  for (const auto& h : ch.taps) energy += std::norm(h);
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& h : ch.taps) h *= scale;

  std::vector<int> pool = cfg.delay_set;
  std::sort(pool.begin(), pool.end());
  for (int l = 0; l < cfg.n_taps; ++l) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(l), pool.size() - 1);
    std::swap(pool[static_cast<std::size_t>(l)], pool[pick(rng)]);
  }
  ch.delays.assign(pool.begin(), pool.begin() + cfg.n_taps);
  std::sort(ch.delays.begin(), ch.delays.end());

  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  ch.phase_offset = phase(rng);
  ch.snr_db = cfg.snr_db;
  return ch;
}

ComplexVec channel_apply(std::span<const cplx> x, const ChannelRealization& ch, Rng& rng) {
  const auto len = static_cast<std::ptrdiff_t>(x.size());
  const cplx rot = std::polar(1.0, ch.phase_offset);
  ComplexVec y(x.size(), cplx(0.0, 0.0));
  for (std::size_t l = 0; l < ch.taps.size(); ++l) {
    const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(l) + ch.delays[l];
    for (std::ptrdiff_t n = shift; n < len; ++n) y[static_cast<std::size_t>(n)] += x[static_cast<std::size_t>(n - shift)] * ch.taps[l];
  }
  for (auto& z : y) z *= rot;

  if (std::isfinite(ch.snr_db)) {
    double p = 0.0;
    for (const auto& z : y) p += std::norm(z);
    p /= static_cast<double>(std::max<std::size_t>(y.size(), 1));
    const double sigma = std::sqrt(p / (2.0 * std::pow(10.0, ch.snr_db / 10.0)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& z : y) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      z += cplx(sigma * re, sigma * im);
    }
  }
  return y;
}

ComplexVec cnc_receive(std::span<const cplx> y, const PaModel& pa, const CncConfig& cnc, const OfdmConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.n_subcarriers);
  const auto cp = static_cast<std::size_t>(cfg.cp_len);
  if (y.size() != n + cp) throw Error("cnc_receive: frame length must be N + N_cp");
  if (cnc.n_iterations < 0) throw Error("cnc_receive: negative iteration count");
  bits_per_symbol(cnc.scheme);  // rejects unknown ids
  ComplexVec out(y.begin(), y.end());
  if (cnc.n_iterations == 0) return out;

  const ComplexVec received = dft(y.subspan(cp), false);
  const auto& pts = alphabet(cnc.scheme);
  ComplexVec corrected = received;
  ComplexVec clip_noise(n + cp, cplx(0.0, 0.0));
  for (int it = 0; it < cnc.n_iterations; ++it) {
    ComplexVec decided(n);
    for (std::size_t k = 0; k < n; ++k) decided[k] = pts[nearest_point(cnc.scheme, corrected[k])];
    const ComplexVec regen = ofdm_modulate(decided, cfg);
    const ComplexVec clipped = pa_clip(regen, pa);
    for (std::size_t i = 0; i < regen.size(); ++i) clip_noise[i] = clipped[i] - regen[i];
    const ComplexVec noise_spec = dft(std::span<const cplx>(clip_noise).subspan(cp), false);
    for (std::size_t k = 0; k < n; ++k) corrected[k] = received[k] - noise_spec[k];
  }
  const ComplexVec body = dft(corrected, true);
  for (std::size_t i = 0; i < cp; ++i) out[i] = y[i] - clip_noise[i];
  std::copy(body.begin(), body.end(), out.begin() + static_cast<std::ptrdiff_t>(cp));
  return out;
}

}  // namespace rft
