// On-disk artifacts: RFBD datasets, RFBT trigger banks, JSON plan sidecars
// and run manifests, CSV tables and static SVG line plots.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rftrojan/pipeline.hpp"

namespace rft::io {

struct DatasetHeader {
  std::uint32_t m = 0;
  std::uint16_t n_subcarriers = 0;
  std::uint16_t cp_len = 0;
  std::uint8_t n_classes = 0;
  std::uint8_t flags = 0;  // bit 0: contains poisoned frames
};

inline constexpr std::uint8_t kFlagPoisoned = 1;

std::vector<std::uint8_t> encode_dataset(const RealDataset& data, int n_subcarriers, int cp_len);
RealDataset decode_dataset(std::span<const std::uint8_t> bytes, DatasetHeader* header = nullptr);
void save_dataset(const std::filesystem::path& path, const RealDataset& data, int n_subcarriers, int cp_len);
RealDataset load_dataset(const std::filesystem::path& path, DatasetHeader* header = nullptr);

std::vector<std::uint8_t> encode_trigger_bank(const TriggerBank& bank);
TriggerBank decode_trigger_bank(std::span<const std::uint8_t> bytes);
void save_trigger_bank(const std::filesystem::path& path, const TriggerBank& bank);
TriggerBank load_trigger_bank(const std::filesystem::path& path);

std::string plan_to_json(const PoisonPlan& plan, double rho_percent, double input_power);
PoisonPlan plan_from_json(const std::string& text);

struct ArtifactRecord {
  std::string path;  // relative to the manifest directory
  std::string crc32;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::string config_text;
  std::uint64_t seed = 0;
  std::vector<ArtifactRecord> artifacts;

  /// Records digest and size of a file under `dir`.
  void add(const std::filesystem::path& dir, const std::string& relative);
  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

/// Returns the artifacts whose on-disk digest or size differs from the record.
std::vector<std::string> verify_manifest(const RunManifest& m, const std::filesystem::path& dir);

/// Comma-separated table with a header row; numbers use round-trip precision.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  CsvTable& row(std::vector<std::string> cells);
  std::string str() const;
  static std::string num(double v);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// 800x500 line plot, one polyline per series, linear axes.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

}  // namespace rft::io
