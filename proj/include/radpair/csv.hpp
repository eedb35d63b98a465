#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "radpair/experiments.hpp"
#include "radpair/trace.hpp"

namespace radpair::io {

// Numeric table with '#'-prefixed metadata lines above a mandatory header.
struct CsvTable {
  std::vector<std::string> metadata;  // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool has_column(std::string_view name) const;
  std::size_t column(std::string_view name) const;  // throws InvalidArgument
  std::vector<double> values(std::string_view name) const;
};

// "%.12g", with NaN written as "nan".
std::string format_number(double v);

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// MFE: b0_mT, phi_singlet, fluorescence. ODMR: freq_MHz, phi_singlet_on, contrast.
CsvTable sweep_table(const SweepResult& result);
// ODMR columns plus b0_mT, rows grouped by field.
CsvTable map_table(const std::vector<SweepResult>& rows);
// time_s, intensity, rf_on.
CsvTable trace_table(const ProtocolTrace& trace);
ProtocolTrace trace_from_table(const CsvTable& table);

}  // namespace radpair::io
