// Flat "key = value" experiment configuration.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rftrojan/dsp.hpp"
#include "rftrojan/rf.hpp"

namespace rft {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  // signal
  std::int64_t m_symbols = 2000;
  int n_subcarriers = 64;
  int cp_len = 16;
  std::vector<Scheme> schemes = default_schemes();
  std::vector<double> snr_list_db = {0.0, 8.0, 18.0};
  double ibo_db = 3.0;
  int cnc_iters = 2;
  int channel_taps = 3;
  double channel_decay = 0.5;
  std::vector<int> channel_delays = {0, 1, 2};
  // attack
  double delta_frac = 0.1;
  double epsilon_frac = 0.01;
  double rho_percent = 5.0;
  int y_tar = 0;
  int inject_count = 1000;
  // classifier training
  int epochs = 50;
  int batch_size = 128;
  double lr = 1e-3;
  double dropout = 0.6;
  int patience = 5;
  // surrogate
  int surrogate_probes = 5000;
  int surrogate_epochs = 80;
  int surrogate_batch = 16;
  int surrogate_hidden = 96;
  int surrogate_depth = 4;
  int surrogate_kernel = 1;
  double surrogate_lr = 3e-3;
  // defenses
  int nc_steps = 300;
  double nc_lr = 0.1;
  double nc_lambda = 1e-3;
  int nc_batch = 32;
  int strip_overlays = 16;
  int pca_dims = 10;

  std::uint64_t seed = 20250101;

  /// The full-size simulation profile (M=10000, N=128, N_cp=32, SNR -8:2:18 dB).
  static ExperimentConfig full_scale();

  OfdmConfig ofdm() const;
  ChannelConfig channel(double snr_db) const;
  void validate() const;

  /// Canonical "key = value" lines, parseable by parse_config.
  std::string to_text() const;
};

/// Applies "key = value" lines on top of `base`. Unknown keys and malformed values throw ConfigError.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Parses "a,b,c" or "start:step:stop" lists.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace rft
