#include "rftrojan/storage.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "rftrojan/binio.hpp"

namespace rft::io {
namespace {

constexpr std::string_view kDatasetMagic = "RFBD";
constexpr std::uint16_t kDatasetVersion = 1;
constexpr std::string_view kBankMagic = "RFBT";
constexpr std::uint16_t kBankVersion = 1;

using nlohmann::json;

void expect_magic(ByteReader& r, std::string_view magic) {
  if (r.get_string(magic.size()) != magic) throw FormatError("bad magic: expected " + std::string(magic));
}

template <typename U, typename V>
U checked_narrow(V v, const char* what) {
  if (v < 0 || static_cast<std::uint64_t>(v) > std::numeric_limits<U>::max())
    throw FormatError(std::string(what) + " does not fit the file header");
  return static_cast<U>(v);
}

void put_rows(ByteWriter& w, const ComplexRows& rows) {
  for (const auto& row : rows)
    for (const auto& z : row) {
      w.put<double>(z.real());
      w.put<double>(z.imag());
    }
}

ComplexRows get_rows(ByteReader& r, std::size_t count, std::size_t len) {
  ComplexRows rows(count, ComplexVec(len));
  for (auto& row : rows)
    for (auto& z : row) {
      const double re = r.get<double>();
      z = {re, r.get<double>()};
    }
  return rows;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_dataset(const RealDataset& data, int n_subcarriers, int cp_len) {
  const int t = data.frame_len();
  if (t != n_subcarriers + cp_len) throw FormatError("dataset frame length disagrees with N + N_cp");
  ByteWriter w;
  w.put_bytes(kDatasetMagic);
  w.put<std::uint16_t>(kDatasetVersion);
  w.put<std::uint32_t>(checked_narrow<std::uint32_t>(data.size(), "M"));
  w.put<std::uint16_t>(checked_narrow<std::uint16_t>(n_subcarriers, "N"));
  w.put<std::uint16_t>(checked_narrow<std::uint16_t>(cp_len, "N_cp"));
  w.put<std::uint8_t>(checked_narrow<std::uint8_t>(data.n_classes, "O"));
  const bool any = std::any_of(data.poisoned.begin(), data.poisoned.end(), [](std::uint8_t p) { return p != 0; });
  w.put<std::uint8_t>(any ? kFlagPoisoned : 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    w.put<std::uint8_t>(checked_narrow<std::uint8_t>(data.labels[i], "label"));
    w.put<float>(data.snr_db[i]);
    w.put<std::uint8_t>(data.poisoned[i]);
    const float* re = data.features.ptr() + i * 2 * static_cast<std::size_t>(t);
    const float* im = re + t;
    for (int n = 0; n < t; ++n) {
      w.put<float>(re[n]);
      w.put<float>(im[n]);
    }
  }
  w.put_crc();
  return w.take();
}

RealDataset decode_dataset(std::span<const std::uint8_t> bytes, DatasetHeader* header) {
  ByteReader::verify_crc(bytes);
  ByteReader r(bytes.first(bytes.size() - 4));
  expect_magic(r, kDatasetMagic);
  if (const auto v = r.get<std::uint16_t>(); v != kDatasetVersion)
    throw FormatError("unsupported dataset version " + std::to_string(v));
  DatasetHeader h;
  h.m = r.get<std::uint32_t>();
  h.n_subcarriers = r.get<std::uint16_t>();
  h.cp_len = r.get<std::uint16_t>();
  h.n_classes = r.get<std::uint8_t>();
  h.flags = r.get<std::uint8_t>();
  const int t = h.n_subcarriers + h.cp_len;
  const std::size_t per_frame = 6 + 8 * static_cast<std::size_t>(t);
  if (r.remaining() != per_frame * h.m) throw FormatError("dataset payload size disagrees with header");
  RealDataset d;
  d.n_classes = h.n_classes;
  d.features = FloatTensor({static_cast<int>(h.m), 1, 2, t});
  for (std::uint32_t i = 0; i < h.m; ++i) {
    const int label = r.get<std::uint8_t>();
    if (label >= h.n_classes) throw FormatError("label out of range");
    d.labels.push_back(label);
    d.snr_db.push_back(r.get<float>());
    d.poisoned.push_back(r.get<std::uint8_t>());
    float* re = d.features.ptr() + static_cast<std::size_t>(i) * 2 * static_cast<std::size_t>(t);
    float* im = re + t;
    for (int n = 0; n < t; ++n) {
      re[n] = r.get<float>();
      im[n] = r.get<float>();
    }
  }
  if (header) *header = h;
  return d;
}

void save_dataset(const std::filesystem::path& path, const RealDataset& data, int n_subcarriers, int cp_len) {
  write_file_atomic(path, encode_dataset(data, n_subcarriers, cp_len));
}

RealDataset load_dataset(const std::filesystem::path& path, DatasetHeader* header) {
  return decode_dataset(read_file(path), header);
}

std::vector<std::uint8_t> encode_trigger_bank(const TriggerBank& bank) {
  const std::size_t rows = bank.true_triggers.size();
  const std::size_t len = rows ? bank.true_triggers[0].size() : 0;
  if (bank.source_frames.size() != rows) throw FormatError("trigger bank: one source frame per row required");
  const bool has_est = !bank.estimated_triggers.empty();
  if (has_est && bank.estimated_triggers.size() != rows) throw FormatError("trigger bank: row count mismatch");
  for (const auto* m : {&bank.true_triggers, &bank.estimated_triggers})
    for (const auto& row : *m)
      if (row.size() != len) throw FormatError("trigger bank: ragged rows");
  ByteWriter w;
  w.put_bytes(kBankMagic);
  w.put<std::uint16_t>(kBankVersion);
  w.put<std::uint32_t>(checked_narrow<std::uint32_t>(rows, "rows"));
  w.put<std::uint32_t>(checked_narrow<std::uint32_t>(len, "T"));
  w.put<std::uint8_t>(has_est ? 1 : 0);
  for (std::size_t f : bank.source_frames) w.put<std::uint32_t>(checked_narrow<std::uint32_t>(f, "frame index"));
  put_rows(w, bank.true_triggers);
  if (has_est) put_rows(w, bank.estimated_triggers);
  w.put_crc();
  return w.take();
}

TriggerBank decode_trigger_bank(std::span<const std::uint8_t> bytes) {
  ByteReader::verify_crc(bytes);
  ByteReader r(bytes.first(bytes.size() - 4));
  expect_magic(r, kBankMagic);
  if (const auto v = r.get<std::uint16_t>(); v != kBankVersion)
    throw FormatError("unsupported trigger bank version " + std::to_string(v));
  const std::size_t rows = r.get<std::uint32_t>();
  const std::size_t len = r.get<std::uint32_t>();
  const bool has_est = r.get<std::uint8_t>() != 0;
  if (r.remaining() != rows * 4 + rows * len * 16 * (has_est ? 2 : 1))
    throw FormatError("trigger bank payload size disagrees with header");
  TriggerBank bank;
  for (std::size_t i = 0; i < rows; ++i) bank.source_frames.push_back(r.get<std::uint32_t>());
  bank.true_triggers = get_rows(r, rows, len);
  if (has_est) bank.estimated_triggers = get_rows(r, rows, len);
  return bank;
}

void save_trigger_bank(const std::filesystem::path& path, const TriggerBank& bank) {
  write_file_atomic(path, encode_trigger_bank(bank));
}

TriggerBank load_trigger_bank(const std::filesystem::path& path) { return decode_trigger_bank(read_file(path)); }

std::string plan_to_json(const PoisonPlan& plan, double rho_percent, double input_power) {
  json j;
  j["format"] = "rftrojan-plan/1";
  j["rho_percent"] = rho_percent;
  j["input_power"] = input_power;
  j["clip_threshold"] = plan.clip_threshold;
  j["delta"] = plan.delta;
  j["epsilon"] = plan.epsilon;
  j["target_class"] = plan.target_class;
  j["target_indices"] = plan.target_indices;
  j["dropped"] = plan.dropped;
  j["effective_count"] = plan.target_indices.size();
  j["poison"] = plan.poison;
  return j.dump(1) + "\n";
}

PoisonPlan plan_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "rftrojan-plan/1") throw FormatError("unknown plan format");
    PoisonPlan p;
    p.clip_threshold = j.at("clip_threshold").get<double>();
    p.delta = j.at("delta").get<double>();
    p.epsilon = j.at("epsilon").get<double>();
    p.target_class = j.at("target_class").get<int>();
    p.target_indices = j.at("target_indices").get<std::vector<std::size_t>>();
    p.dropped = j.at("dropped").get<std::vector<std::size_t>>();
    p.poison = j.at("poison").get<RealRows>();
    if (p.poison.size() != p.target_indices.size()) throw FormatError("plan: one poison row per target required");
    return p;
  } catch (const json::exception& e) {
    throw FormatError(std::string("plan sidecar: ") + e.what());
  }
}

void RunManifest::add(const std::filesystem::path& dir, const std::string& relative) {
  const auto bytes = read_file(dir / relative);
  artifacts.push_back({relative, crc32_hex(bytes), bytes.size()});
}

std::string RunManifest::to_json() const {
  json j;
  j["format"] = "rftrojan-manifest/1";
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config_text;
  j["artifacts"] = json::array();
  for (const auto& a : artifacts) j["artifacts"].push_back({{"path", a.path}, {"crc32", a.crc32}, {"bytes", a.bytes}});
  return j.dump(1) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "rftrojan-manifest/1") throw FormatError("unknown manifest format");
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_text = j.at("config").get<std::string>();
    for (const auto& a : j.at("artifacts"))
      m.artifacts.push_back({a.at("path").get<std::string>(), a.at("crc32").get<std::string>(), a.at("bytes").get<std::uint64_t>()});
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

std::vector<std::string> verify_manifest(const RunManifest& m, const std::filesystem::path& dir) {
  std::vector<std::string> bad;
  for (const auto& a : m.artifacts) {
    std::error_code ec;
    if (!std::filesystem::exists(dir / a.path, ec)) {
      bad.push_back(a.path);
      continue;
    }
    const auto bytes = read_file(dir / a.path);
    if (bytes.size() != a.bytes || crc32_hex(bytes) != a.crc32) bad.push_back(a.path);
  }
  return bad;
}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw std::invalid_argument("csv row width differs from header");
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string CsvTable::num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
  constexpr double kW = 800, kH = 500, kLeft = 70, kRight = 160, kTop = 40, kBottom = 60;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o.precision(6);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" width=\"800\" height=\"500\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n"
    << "<text x=\"" << kLeft + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(title)
    << "</text>\n"
    << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    o << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << CsvTable::num(std::round(xv * 1000) / 1000) << "</text>\n"
      << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
      << CsvTable::num(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 18 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << xml_escape(x_label) << "</text>\n"
    << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
    << kTop + ph / 2 << ")\">" << xml_escape(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      if (!std::isfinite(series[k].x[i]) || !std::isfinite(series[k].y[i])) continue;
      o << (first ? "" : " ") << px(series[k].x[i]) << ',' << py(series[k].y[i]);
      first = false;
    }
    o << "\"/>\n";
    const double ly = kTop + 16 + 20.0 * static_cast<double>(k);
    o << "<line x1=\"" << kW - kRight + 12 << "\" y1=\"" << ly << "\" x2=\"" << kW - kRight + 36 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << kW - kRight + 42 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << xml_escape(series[k].name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace rft::io
