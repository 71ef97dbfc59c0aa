#include "rftrojan/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace rft {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) throw ConfigError("bad number for " + key + ": '" + v + "'");
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("bad integer for " + key + ": '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("bad unsigned integer for " + key + ": '" + v + "'");
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename C, typename F>
std::string join(const C& items, F fmt) {
  std::string out;
  for (const auto& x : items) out += (out.empty() ? "" : ",") + fmt(x);
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

template <typename T>
Setter int_field(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    c.*field = static_cast<T>(to_int(k, v));
  };
}

Setter double_field(double ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*field = to_double(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"m_symbols", int_field(&ExperimentConfig::m_symbols)},
      {"n_subcarriers", int_field(&ExperimentConfig::n_subcarriers)},
      {"cp_len", int_field(&ExperimentConfig::cp_len)},
      {"schemes",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.schemes.clear();
         for (const auto& name : split(v, ',')) {
           try {
             c.schemes.push_back(scheme_from_name(name));
           } catch (const Error& e) {
             throw ConfigError(e.what());
           }
         }
       }},
      {"snr_list_db",
       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.snr_list_db = parse_number_list(v); }},
      {"ibo_db", double_field(&ExperimentConfig::ibo_db)},
      {"delta_frac", double_field(&ExperimentConfig::delta_frac)},
      {"epsilon_frac", double_field(&ExperimentConfig::epsilon_frac)},
      {"rho_percent", double_field(&ExperimentConfig::rho_percent)},
      {"y_tar", int_field(&ExperimentConfig::y_tar)},
      {"inject_count", int_field(&ExperimentConfig::inject_count)},
      {"cnc_iters", int_field(&ExperimentConfig::cnc_iters)},
      {"channel_taps", int_field(&ExperimentConfig::channel_taps)},
      {"channel_decay", double_field(&ExperimentConfig::channel_decay)},
      {"channel_delays",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.channel_delays.clear();
         for (const auto& d : split(v, ',')) c.channel_delays.push_back(static_cast<int>(to_int(k, d)));
       }},
      {"epochs", int_field(&ExperimentConfig::epochs)},
      {"batch_size", int_field(&ExperimentConfig::batch_size)},
      {"lr", double_field(&ExperimentConfig::lr)},
      {"dropout", double_field(&ExperimentConfig::dropout)},
      {"patience", int_field(&ExperimentConfig::patience)},
      {"surrogate_probes", int_field(&ExperimentConfig::surrogate_probes)},
      {"surrogate_epochs", int_field(&ExperimentConfig::surrogate_epochs)},
      {"surrogate_batch", int_field(&ExperimentConfig::surrogate_batch)},
      {"surrogate_hidden", int_field(&ExperimentConfig::surrogate_hidden)},
      {"surrogate_depth", int_field(&ExperimentConfig::surrogate_depth)},
      {"surrogate_kernel", int_field(&ExperimentConfig::surrogate_kernel)},
      {"surrogate_lr", double_field(&ExperimentConfig::surrogate_lr)},
      {"nc_steps", int_field(&ExperimentConfig::nc_steps)},
      {"nc_lr", double_field(&ExperimentConfig::nc_lr)},
      {"nc_lambda", double_field(&ExperimentConfig::nc_lambda)},
      {"nc_batch", int_field(&ExperimentConfig::nc_batch)},
      {"strip_overlays", int_field(&ExperimentConfig::strip_overlays)},
      {"pca_dims", int_field(&ExperimentConfig::pca_dims)},
      {"seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); }},
  };
  return table;
}

}  // namespace

ExperimentConfig ExperimentConfig::full_scale() {
  ExperimentConfig c;
  c.m_symbols = 10000;
  c.n_subcarriers = 128;
  c.cp_len = 32;
  c.snr_list_db = parse_number_list("-8:2:18");
  return c;
}

OfdmConfig ExperimentConfig::ofdm() const {
  OfdmConfig o;
  o.n_subcarriers = n_subcarriers;
  o.cp_len = cp_len;
  o.schemes = schemes;
  o.ibo_db = ibo_db;
  o.snr_list_db = snr_list_db;
  return o;
}

ChannelConfig ExperimentConfig::channel(double snr_db) const {
  ChannelConfig ch;
  ch.n_taps = channel_taps;
  ch.decay = channel_decay;
  ch.delay_set = channel_delays;
  ch.snr_db = snr_db;
  return ch;
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  try {
    ofdm().validate();
    channel(0.0).validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto pairs = static_cast<std::int64_t>(schemes.size() * snr_list_db.size());
  check(m_symbols > 0, "m_symbols must be positive");
  check(m_symbols >= pairs, "m_symbols must cover every (scheme, SNR) pair at least once");
  check(m_symbols <= 0xffffffffLL, "m_symbols exceeds the dataset format limit");
  check(n_subcarriers <= 0xffff && cp_len <= 0xffff, "frame dimensions exceed the dataset format limit");
  check(ibo_db > -40.0 && ibo_db < 40.0, "ibo_db out of range");
  check(delta_frac > 0.0 && delta_frac < 1.0, "delta_frac must lie in (0,1)");
  check(epsilon_frac > 0.0 && epsilon_frac < 1.0, "epsilon_frac must lie in (0,1)");
  check(rho_percent >= 0.0 && rho_percent <= 100.0, "rho_percent must lie in [0,100]");
  check(y_tar >= 0 && y_tar < static_cast<int>(schemes.size()), "y_tar must index the scheme list");
  check(inject_count >= 0, "inject_count must be non-negative");
  check(cnc_iters >= 0, "cnc_iters must be non-negative");
  check(epochs >= 0, "epochs must be non-negative");
  check(batch_size > 0 && surrogate_batch > 0, "batch sizes must be positive");
  check(lr > 0.0 && surrogate_lr > 0.0 && nc_lr > 0.0, "learning rates must be positive");
  check(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0,1)");
  check(patience > 0, "patience must be positive");
  check(surrogate_probes > 0 && surrogate_epochs >= 0, "surrogate probe/epoch counts invalid");
  check(surrogate_hidden > 0 && surrogate_depth > 0 && surrogate_kernel > 0 && surrogate_kernel % 2 == 1,
        "surrogate shape invalid (kernel must be odd)");
  check(nc_steps > 0 && nc_lambda >= 0.0 && nc_batch > 0, "neural cleanse settings invalid");
  check(strip_overlays >= 8, "strip_overlays must be at least 8");
  check(pca_dims > 0, "pca_dims must be positive");
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  auto line = [&](const char* k, const std::string& v) { os << k << " = " << v << "\n"; };
  line("m_symbols", std::to_string(m_symbols));
  line("n_subcarriers", std::to_string(n_subcarriers));
  line("cp_len", std::to_string(cp_len));
  line("schemes", join(schemes, [](Scheme s) { return std::string(scheme_name(s)); }));
  line("snr_list_db", join(snr_list_db, fmt_double));
  line("ibo_db", fmt_double(ibo_db));
  line("cnc_iters", std::to_string(cnc_iters));
  line("channel_taps", std::to_string(channel_taps));
  line("channel_decay", fmt_double(channel_decay));
  line("channel_delays", join(channel_delays, [](int d) { return std::to_string(d); }));
  line("delta_frac", fmt_double(delta_frac));
  line("epsilon_frac", fmt_double(epsilon_frac));
  line("rho_percent", fmt_double(rho_percent));
  line("y_tar", std::to_string(y_tar));
  line("inject_count", std::to_string(inject_count));
  line("epochs", std::to_string(epochs));
  line("batch_size", std::to_string(batch_size));
  line("lr", fmt_double(lr));
  line("dropout", fmt_double(dropout));
  line("patience", std::to_string(patience));
  line("surrogate_probes", std::to_string(surrogate_probes));
  line("surrogate_epochs", std::to_string(surrogate_epochs));
  line("surrogate_batch", std::to_string(surrogate_batch));
  line("surrogate_hidden", std::to_string(surrogate_hidden));
  line("surrogate_depth", std::to_string(surrogate_depth));
  line("surrogate_kernel", std::to_string(surrogate_kernel));
  line("surrogate_lr", fmt_double(surrogate_lr));
  line("nc_steps", std::to_string(nc_steps));
  line("nc_lr", fmt_double(nc_lr));
  line("nc_lambda", fmt_double(nc_lambda));
  line("nc_batch", std::to_string(nc_batch));
  line("strip_overlays", std::to_string(strip_overlays));
  line("pca_dims", std::to_string(pca_dims));
  line("seed", std::to_string(seed));
  return os.str();
}

std::vector<double> parse_number_list(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty number list");
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw ConfigError("range must be start:step:stop");
    const double start = to_double("range", parts[0]), step = to_double("range", parts[1]),
                 stop = to_double("range", parts[2]);
    if (step == 0.0 || (stop - start) / step < 0.0) throw ConfigError("range step does not reach stop");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(t, ',')) out.push_back(to_double("list", p));
  return out;
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    it->second(base, key, value);
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

}  // namespace rft
