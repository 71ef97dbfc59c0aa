#include "rftrojan/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <set>

namespace rft {
namespace {

constexpr std::array<std::string_view, 11> kSchemeNames = {
    "BPSK", "QPSK", "8PSK", "PAM4", "PAM8", "16QAM", "32QAM", "64QAM", "128QAM", "256QAM", "16APSK"};

unsigned inverse_gray(unsigned g) {
  unsigned k = 0;
  for (; g; g >>= 1) k ^= g;
  return k;
}

// Level for a Gray-coded PAM index; bit pattern 0 maps to the largest level.
double pam_level(unsigned bits, unsigned levels) {
  const unsigned k = inverse_gray(bits);
  return static_cast<double>(levels - 1) - 2.0 * static_cast<double>(k);
}

void normalize(std::vector<cplx>& pts) {
  double p = 0.0;
  for (const auto& z : pts) p += std::norm(z);
  p /= static_cast<double>(pts.size());
  const double scale = 1.0 / std::sqrt(p);
  for (auto& z : pts) z *= scale;
}

std::vector<cplx> psk(unsigned m) {
  std::vector<cplx> pts(m);
  for (unsigned b = 0; b < m; ++b) {
    const double angle = 2.0 * std::numbers::pi * inverse_gray(b) / m;
    pts[b] = std::polar(1.0, angle);
  }
  return pts;
}

std::vector<cplx> pam(unsigned m) {
  std::vector<cplx> pts(m);
  for (unsigned b = 0; b < m; ++b) pts[b] = {pam_level(b, m), 0.0};
  normalize(pts);
  return pts;
}

std::vector<cplx> square_qam(unsigned bits) {
  const unsigned half = bits / 2;
  const unsigned side = 1u << half;
  std::vector<cplx> pts(1u << bits);
  for (unsigned b = 0; b < pts.size(); ++b) {
    const unsigned hi = b >> half;
    const unsigned lo = b & (side - 1);
    pts[b] = {pam_level(hi, side), pam_level(lo, side)};
  }
  normalize(pts);
  return pts;
}

// Cross constellation: square grid with the corner blocks removed.
std::vector<cplx> cross_qam(unsigned side, int corner_limit) {
  std::vector<cplx> pts;
  for (unsigned r = 0; r < side; ++r) {
    for (unsigned c = 0; c < side; ++c) {
      const int i = 2 * static_cast<int>(c) - static_cast<int>(side - 1);
      const int q = static_cast<int>(side - 1) - 2 * static_cast<int>(r);
      if (std::abs(i) > corner_limit && std::abs(q) > corner_limit) continue;
      pts.emplace_back(i, q);
    }
  }
  normalize(pts);
  return pts;
}

std::vector<cplx> apsk16() {
  constexpr double kRingRatio = 2.57;
  std::vector<cplx> pts;
  for (int k = 0; k < 4; ++k)
    pts.push_back(std::polar(1.0, std::numbers::pi / 4 + k * std::numbers::pi / 2));
  for (int k = 0; k < 12; ++k)
    pts.push_back(std::polar(kRingRatio, std::numbers::pi / 12 + k * std::numbers::pi / 6));
  normalize(pts);
  return pts;
}

std::vector<cplx> build_alphabet(Scheme s) {
  switch (s) {
    case Scheme::kBpsk: return psk(2);
    case Scheme::kQpsk: return square_qam(2);
    case Scheme::k8Psk: return psk(8);
    case Scheme::kPam4: return pam(4);
    case Scheme::kPam8: return pam(8);
    case Scheme::k16Qam: return square_qam(4);
    case Scheme::k32Qam: return cross_qam(6, 3);
    case Scheme::k64Qam: return square_qam(6);
    case Scheme::k128Qam: return cross_qam(12, 7);
    case Scheme::k256Qam: return square_qam(8);
    case Scheme::k16Apsk: return apsk16();
  }
  throw Error("unknown scheme id");
}

struct PlanCache {
  std::mutex mu;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans;

  fftw_plan get(std::size_t n, bool inverse) {
    std::lock_guard lock(mu);
    auto it = plans.find({n, inverse});
    if (it != plans.end()) return it->second;
    std::vector<cplx> scratch(n);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), p, p, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(std::make_pair(n, inverse), plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

std::string_view scheme_name(Scheme s) {
  const auto i = static_cast<std::size_t>(s);
  if (i >= kSchemeNames.size()) throw Error("unknown scheme id");
  return kSchemeNames[i];
}

Scheme scheme_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kSchemeNames.size(); ++i)
    if (kSchemeNames[i] == name) return static_cast<Scheme>(i);
  throw Error("unknown scheme id: " + std::string(name));
}

int bits_per_symbol(Scheme s) {
  static constexpr std::array<int, 11> kBits = {1, 2, 3, 2, 3, 4, 5, 6, 7, 8, 4};
  const auto i = static_cast<std::size_t>(s);
  if (i >= kBits.size()) throw Error("unknown scheme id");
  return kBits[i];
}

const std::vector<cplx>& alphabet(Scheme s) {
  static const auto table = [] {
    std::vector<std::vector<cplx>> t;
    for (std::size_t i = 0; i < kSchemeNames.size(); ++i) t.push_back(build_alphabet(static_cast<Scheme>(i)));
    return t;
  }();
  const auto i = static_cast<std::size_t>(s);
  if (i >= table.size()) throw Error("unknown scheme id");
  return table[i];
}

std::size_t nearest_point(Scheme s, cplx z) {
  const auto& pts = alphabet(s);
  std::size_t best = 0;
  double best_d = std::norm(z - pts[0]);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double d = std::norm(z - pts[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<Scheme> default_schemes() {
  std::vector<Scheme> out;
  for (std::size_t i = 0; i < kSchemeNames.size(); ++i) out.push_back(static_cast<Scheme>(i));
  return out;
}

void OfdmConfig::validate() const {
  if (n_subcarriers <= 0 || !is_power_of_two(static_cast<std::size_t>(n_subcarriers)))
    throw Error("n_subcarriers must be a power of two");
  if (cp_len < 0 || cp_len >= n_subcarriers) throw Error("cp_len must satisfy 0 <= cp_len < n_subcarriers");
  if (schemes.empty()) throw Error("scheme list is empty");
  if (schemes.size() > 255) throw Error("too many schemes");
  std::set<Scheme> seen(schemes.begin(), schemes.end());
  if (seen.size() != schemes.size()) throw Error("scheme identifiers must be unique");
  if (snr_list_db.empty()) throw Error("snr list is empty");
}

int OfdmConfig::class_of(Scheme s) const {
  const auto it = std::find(schemes.begin(), schemes.end(), s);
  if (it == schemes.end()) throw Error("scheme not in scheme list");
  return static_cast<int>(it - schemes.begin());
}

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

ComplexVec map_bits(Scheme s, std::span<const std::uint8_t> bits, int n_subcarriers) {
  const int bps = bits_per_symbol(s);
  if (bits.size() != static_cast<std::size_t>(n_subcarriers) * static_cast<std::size_t>(bps))
    throw Error("bit count does not match N * bits_per_symbol");
  for (auto b : bits)
    if (b > 1) throw Error("bits must be 0 or 1");
  const auto& pts = alphabet(s);
  ComplexVec out(static_cast<std::size_t>(n_subcarriers));
  for (std::size_t k = 0; k < out.size(); ++k) {
    unsigned index = 0;
    for (int b = 0; b < bps; ++b) index = (index << 1) | (bits[k * bps + b] & 1u);
    out[k] = pts[index];
  }
  return out;
}

ComplexVec dft(std::span<const cplx> x, bool inverse) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n)) throw Error("dft length must be a power of two");
  ComplexVec out(x.begin(), x.end());
  auto* p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan_cache().get(n, inverse), p, p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& z : out) z *= scale;
  return out;
}

ComplexVec ofdm_modulate(std::span<const cplx> symbols, const OfdmConfig& cfg) {
  if (symbols.size() != static_cast<std::size_t>(cfg.n_subcarriers)) throw Error("symbol count must equal N");
  const ComplexVec body = dft(symbols, true);
  ComplexVec frame;
  frame.reserve(static_cast<std::size_t>(cfg.frame_len()));
  frame.insert(frame.end(), body.end() - cfg.cp_len, body.end());
  frame.insert(frame.end(), body.begin(), body.end());
  return frame;
}

double measure_power(std::span<const ComplexVec> frames) {
  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& f : frames) {
    for (const auto& z : f) acc += std::norm(z);
    count += f.size();
  }
  if (count == 0) throw Error("measure_power on empty input");
  return acc / static_cast<double>(count);
}

double clipping_threshold(double ibo_db, double p_in) {
  if (!(p_in > 0.0)) throw Error("input power must be positive");
  return std::sqrt(p_in) * std::pow(10.0, ibo_db / 20.0);
}

}  // namespace rft
