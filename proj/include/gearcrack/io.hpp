#pragma once

// Persistence: binary column tables with JSON sidecars, CSV helpers,
// FNV-1a checksums and JSON forms of the parameter structs.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gearcrack/cemg.hpp"
#include "gearcrack/signal.hpp"
#include "gearcrack/tsa.hpp"
#include "gearcrack/tvms.hpp"
#include "gearcrack/vmd.hpp"

namespace gearcrack::io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t seed = 14695981039346656037ULL);
std::uint64_t fnv1a(std::string_view text, std::uint64_t seed = 14695981039346656037ULL);
std::string hex64(std::uint64_t value);

// Hex FNV-1a of the whole file.
std::string file_checksum(const fs::path& path);

// Shortest round-trip decimal form (%.17g).
std::string format_double(double value);

// Write text atomically (temp file + rename).
void write_text(const fs::path& path, std::string_view text);
std::string read_text(const fs::path& path);

// Equal-length named columns of doubles.
struct Table {
  double sample_rate_Hz = 0.0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  json metadata = json::object();

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::span<const double> column(std::string_view name) const;
};

// Writes <base>.bin (little-endian float64, column-major) and <base>.json.
// The sidecar stores the checksum of the .bin file.
void write_table(const Table& table, const fs::path& base);
// Throws gearcrack::Error when a file is missing, malformed, or its checksum
// does not match the sidecar.
Table read_table(const fs::path& base);

fs::path bin_path(const fs::path& base);
fs::path sidecar_path(const fs::path& base);

Table to_table(const cemg::SimResult& result, std::span<const std::string> channels = {});
cemg::SimResult to_sim_result(const Table& table);

void write_csv(std::ostream& os, std::span<const std::string> header,
               std::span<const std::vector<double>> columns);

// Single-object CSV exports. Header rows:
//   simulation   channel names
//   modes        t,mode_1,...,mode_K,residual
//   averaged     angle_fraction,averaged_value
//   envelope     freq_hz,magnitude
void write_csv(std::ostream& os, const cemg::SimResult& result);
void write_csv(std::ostream& os, const vmd::VmdResult& result, double sample_rate_Hz);
void write_csv(std::ostream& os, const tsa::TsaResult& result);
void write_csv(std::ostream& os, const signal::EnvelopeSpectrum& spectrum);

// JSON sidecars for the CSV exports.
json sidecar(const cemg::SimResult& result);
json sidecar(const vmd::VmdResult& result);
json sidecar(const tsa::TsaResult& result);

json to_json(const cemg::SystemParams& p);
cemg::SystemParams system_params_from_json(const json& j);
cemg::SystemParams load_system_params(const fs::path& path);

json to_json(const vmd::VmdConfig& c);
vmd::VmdConfig vmd_config_from_json(const json& j);

// Hex FNV-1a of the canonical JSON dump.
std::string params_hash(const cemg::SystemParams& p);

}  // namespace gearcrack::io
