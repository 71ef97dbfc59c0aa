// Complex baseband primitives: constellations, unitary DFT, OFDM symbol
// assembly with cyclic prefix, power measurement and clip thresholds.
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rft {

using cplx = std::complex<double>;
using ComplexVec = std::vector<cplx>;

/// Raised for any violated precondition inside the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scheme : std::uint8_t {
  kBpsk,
  kQpsk,
  k8Psk,
  kPam4,
  kPam8,
  k16Qam,
  k32Qam,
  k64Qam,
  k128Qam,
  k256Qam,
  k16Apsk,
};

std::string_view scheme_name(Scheme s);
Scheme scheme_from_name(std::string_view name);
int bits_per_symbol(Scheme s);

/// Unit-average-power alphabet, indexed by the bit pattern (MSB first).
const std::vector<cplx>& alphabet(Scheme s);

/// Index into alphabet(s) of the point closest to `z`.
std::size_t nearest_point(Scheme s, cplx z);

struct OfdmConfig {
  int n_subcarriers = 64;
  int cp_len = 16;
  std::vector<Scheme> schemes;
  double ibo_db = 3.0;
  std::vector<double> snr_list_db;

  int n_schemes() const { return static_cast<int>(schemes.size()); }
  int frame_len() const { return n_subcarriers + cp_len; }
  /// Throws Error when an invariant does not hold.
  void validate() const;
  /// Class index of `s` within `schemes`; throws if absent.
  int class_of(Scheme s) const;
};

/// The eleven digital alphabets used as the default class set.
std::vector<Scheme> default_schemes();

/// Maps `bits` (one byte per bit, 0/1) onto N constellation points.
ComplexVec map_bits(Scheme s, std::span<const std::uint8_t> bits, int n_subcarriers);

/// In-place-free unitary transform (1/sqrt(N) both ways). Length must be a power of two.
ComplexVec dft(std::span<const cplx> x, bool inverse);

/// Scaled IDFT of `symbols` with the last cp_len samples prepended.
ComplexVec ofdm_modulate(std::span<const cplx> symbols, const OfdmConfig& cfg);

/// Mean |x|^2 over every sample of every frame.
double measure_power(std::span<const ComplexVec> frames);

/// A = sqrt(p_in) * 10^(ibo_db / 20).
double clipping_threshold(double ibo_db, double p_in);

bool is_power_of_two(std::size_t n);

}  // namespace rft
