#include "radpair/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "radpair/errors.hpp"

namespace radpair::io {

bool CsvTable::has_column(std::string_view name) const {
  for (const auto& c : columns) {
    if (c == name) return true;
  }
  return false;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw InvalidArgument("CSV has no column '" + std::string(name) + "'");
}

std::vector<double> CsvTable::values(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (const auto& m : table.metadata) out += "# " + m + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out += (i ? "," : "") + table.columns[i];
  }
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += format_number(row[i]);
    }
    out += "\n";
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto start = line.find_first_not_of("# ");
      t.metadata.push_back(start == std::string::npos ? "" : line.substr(start));
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!header) {
      t.columns = cells;
      header = true;
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw InvalidArgument("CSV line " + std::to_string(lineno) + ": expected " +
                            std::to_string(t.columns.size()) + " fields");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') {
        throw InvalidArgument("CSV line " + std::to_string(lineno) + ": '" + c +
                              "' is not a number");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (!header) throw InvalidArgument("CSV has no header row");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InvalidArgument("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

CsvTable sweep_table(const SweepResult& r) {
  CsvTable t;
  const bool odmr = !r.contrast.empty();
  if (odmr) {
    t.columns = {"freq_MHz", "phi_singlet_on", "contrast"};
  } else {
    t.columns = {"b0_mT", "phi_singlet", "fluorescence"};
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    t.rows.push_back({r.axis_values[i], r.phi_singlet[i],
                      odmr ? r.contrast[i] : r.fluorescence[i]});
  }
  return t;
}

CsvTable map_table(const std::vector<SweepResult>& rows) {
  CsvTable t;
  t.columns = {"freq_MHz", "phi_singlet_on", "contrast", "b0_mT"};
  for (const auto& r : rows) {
    const double b0 = std::strtod(r.metadata.at("b0_mT").c_str(), nullptr);
    for (std::size_t i = 0; i < r.size(); ++i) {
      t.rows.push_back({r.axis_values[i], r.phi_singlet[i], r.contrast[i], b0});
    }
  }
  return t;
}

CsvTable trace_table(const ProtocolTrace& trace) {
  CsvTable t;
  t.columns = {"time_s", "intensity", "rf_on"};
  for (std::size_t i = 0; i < trace.size(); ++i) {
    t.rows.push_back({trace.frame_times[i], trace.intensities[i], trace.rf_on_mask[i] ? 1.0 : 0.0});
  }
  return t;
}

ProtocolTrace trace_from_table(const CsvTable& table) {
  ProtocolTrace tr;
  tr.frame_times = table.values("time_s");
  tr.intensities = table.values("intensity");
  for (double v : table.values("rf_on")) tr.rf_on_mask.push_back(v != 0.0);
  for (const auto& m : table.metadata) {
    if (m.rfind("bleach_slope_true: ", 0) == 0) {
      tr.bleach_slope_true = std::strtod(m.c_str() + 19, nullptr);
    } else if (m.rfind("seed: ", 0) == 0) {
      tr.noise_seed = std::strtoull(m.c_str() + 6, nullptr, 10);
    }
  }
  validate(tr);
  return tr;
}

}  // namespace radpair::io
