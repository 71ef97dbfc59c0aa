#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rftrojan/rf.hpp"

using namespace rft;

namespace {

ComplexVec random_vec(std::size_t n, std::mt19937_64& rng, double sigma = 1.0) {
  std::normal_distribution<double> g(0.0, sigma);
  ComplexVec v(n);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

OfdmConfig ofdm64() {
  OfdmConfig c;
  c.schemes = default_schemes();
  c.snr_list_db = {0.0};
  return c;
}

ComplexVec qpsk_frame(std::mt19937_64& rng, const OfdmConfig& cfg) {
  std::vector<std::uint8_t> bits(128);
  for (auto& b : bits) b = rng() & 1u;
  return ofdm_modulate(map_bits(Scheme::kQpsk, bits, 64), cfg);
}

}  // namespace

TEST(PaClip, BelowThresholdUnchanged) {
  const ComplexVec x = {std::polar(0.5, std::numbers::pi / 3)};
  EXPECT_EQ(pa_clip(x, PaModel{1.0})[0], x[0]);
}

TEST(PaClip, AboveThresholdKeepsPhase) {
  const ComplexVec x = {std::polar(2.0, std::numbers::pi / 4)};
  const auto y = pa_clip(x, PaModel{1.0});
  EXPECT_NEAR(std::abs(y[0] - std::polar(1.0, std::numbers::pi / 4)), 0.0, 1e-15);
}

TEST(PaClip, AltersExactlyTheSamplesAtOrAboveThreshold) {
  std::mt19937_64 rng(1);
  const auto x = random_vec(200, rng);
  double peak = 0;
  for (auto z : x) peak = std::max(peak, std::abs(z));
  const PaModel pa{0.8 * peak};
  const auto y = pa_clip(x, pa);
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (std::abs(x[n]) >= pa.clip_threshold) {
      EXPECT_LE(std::abs(y[n]), pa.clip_threshold);
      EXPECT_NEAR(std::abs(y[n]), pa.clip_threshold, 1e-12);
      EXPECT_NEAR(std::arg(y[n]), std::arg(x[n]), 1e-12);
    } else {
      EXPECT_EQ(y[n], x[n]);
    }
  }
}

TEST(PaClip, IdempotentAndNeverGrows) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_vec(80, rng);
    const PaModel pa{1.2};
    const auto once = pa_clip(x, pa);
    EXPECT_EQ(pa_clip(once, pa), once);
    for (std::size_t n = 0; n < x.size(); ++n) EXPECT_LE(std::abs(once[n]), std::max(std::abs(x[n]), 1.2) + 1e-15);
  }
}

TEST(Channel, SameSeedSameRealization) {
  ChannelConfig cfg;
  Rng a(5), b(5);
  const auto ca = sample_channel(cfg, a), cb = sample_channel(cfg, b);
  EXPECT_EQ(ca.taps, cb.taps);
  EXPECT_EQ(ca.delays, cb.delays);
  EXPECT_EQ(ca.phase_offset, cb.phase_offset);
}

TEST(Channel, RealizationInvariants) {
  ChannelConfig cfg;
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const auto ch = sample_channel(cfg, rng);
    double e = 0;
    for (auto h : ch.taps) e += std::norm(h);
    EXPECT_NEAR(e, 1.0, 1e-9);
    for (std::size_t l = 1; l < ch.delays.size(); ++l) EXPECT_LT(ch.delays[l - 1], ch.delays[l]);
    EXPECT_GE(ch.phase_offset, 0.0);
    EXPECT_LT(ch.phase_offset, 2 * std::numbers::pi);
  }
}

TEST(Channel, SingleTapHasUnitMagnitude) {
  ChannelConfig cfg;
  cfg.n_taps = 1;
  Rng rng(7);
  EXPECT_NEAR(std::abs(sample_channel(cfg, rng).taps[0]), 1.0, 1e-15);
}

TEST(Channel, ProfileTapEnergiesFollowExponentialDecay) {
  ChannelConfig cfg;
  Rng rng(8);
  std::vector<double> mean(3, 0.0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto taps = draw_profile_taps(cfg, rng);
    for (int l = 0; l < 3; ++l) mean[l] += std::norm(taps[l]) / draws;
  }
  const double expected[] = {1.0, 0.5, 0.25};
  for (int l = 0; l < 3; ++l) EXPECT_NEAR(mean[l] / expected[l], 1.0, 0.05) << "tap " << l;
}

TEST(Channel, RejectsBadConfig) {
  ChannelConfig cfg;
  cfg.n_taps = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = ChannelConfig{};
  cfg.n_taps = 4;  // more taps than delay values
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(ChannelApply, IdentityAndPhaseRotation) {
  std::mt19937_64 g(9);
  const auto x = random_vec(16, g);
  Rng rng(1);
  EXPECT_EQ(channel_apply(x, ChannelRealization::identity(), rng), x);
  auto rot = ChannelRealization::identity();
  rot.phase_offset = std::numbers::pi;
  const auto y = channel_apply(x, rot, rng);
  for (std::size_t n = 0; n < x.size(); ++n) EXPECT_NEAR(std::abs(y[n] + x[n]), 0.0, 1e-12);
}

TEST(ChannelApply, DelaysFollowLiteralIndexing) {
  // y[n] = sum_l h_l x[n - l - tau_l]
  ChannelRealization ch;
  ch.taps = {cplx(1, 0), cplx(0, 1)};
  ch.delays = {0, 2};
  const ComplexVec x = {1, 2, 3, 4, 5, 6};
  Rng rng(1);
  const auto y = channel_apply(x, ch, rng);
  for (int n = 0; n < 6; ++n) {
    cplx expect = x[n];
    if (n - 1 - 2 >= 0) expect += cplx(0, 1) * x[n - 3];
    EXPECT_NEAR(std::abs(y[n] - expect), 0.0, 1e-12) << n;
  }
}

TEST(ChannelApply, NoisePowerMatchesSnr) {
  std::mt19937_64 g(10);
  const auto x = random_vec(10000, g, std::sqrt(0.5));
  auto ch = ChannelRealization::identity();
  ch.snr_db = 0.0;
  Rng rng(2);
  const auto y = channel_apply(x, ch, rng);
  double ps = 0, pn = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    ps += std::norm(x[n]);
    pn += std::norm(y[n] - x[n]);
  }
  EXPECT_NEAR(pn / ps, 1.0, 0.1);
}

TEST(Cnc, ZeroIterationsIsIdentity) {
  std::mt19937_64 g(11);
  const auto y = random_vec(80, g);
  EXPECT_EQ(cnc_receive(y, PaModel{1.0}, CncConfig{0, Scheme::kQpsk}, ofdm64()), y);
}

TEST(Cnc, UnclippedNoiselessFrameIsFixedPoint) {
  std::mt19937_64 g(12);
  const auto cfg = ofdm64();
  const auto s = qpsk_frame(g, cfg);
  const auto out = cnc_receive(s, PaModel{}, CncConfig{2, Scheme::kQpsk}, cfg);
  for (std::size_t n = 0; n < s.size(); ++n) EXPECT_NEAR(std::abs(out[n] - s[n]), 0.0, 1e-6);
}

TEST(Cnc, ReducesSubcarrierErrorOnClippedQpsk) {
  std::mt19937_64 g(13);
  const auto cfg = ofdm64();
  const PaModel pa{clipping_threshold(3.0, 1.0)};
  double evm_before = 0, evm_after = 0;
  Rng noise(3);
  for (int f = 0; f < 100; ++f) {
    std::vector<std::uint8_t> bits(128);
    for (auto& b : bits) b = g() & 1u;
    const auto u = map_bits(Scheme::kQpsk, bits, 64);
    const auto tx = pa_clip(ofdm_modulate(u, cfg), pa);
    auto ch = ChannelRealization::identity();
    ch.snr_db = 18.0;
    const auto rx = channel_apply(tx, ch, noise);
    const auto out = cnc_receive(rx, pa, CncConfig{2, Scheme::kQpsk}, cfg);
    const auto before = dft(std::span<const cplx>(rx).subspan(16), false);
    const auto after = dft(std::span<const cplx>(out).subspan(16), false);
    for (int k = 0; k < 64; ++k) {
      evm_before += std::norm(before[k] - u[k]);
      evm_after += std::norm(after[k] - u[k]);
    }
  }
  EXPECT_LT(evm_after, evm_before);
}

TEST(Cnc, RejectsWrongLength) {
  const ComplexVec y(70, 0.0);
  EXPECT_THROW(cnc_receive(y, PaModel{1.0}, CncConfig{}, ofdm64()), Error);
}
