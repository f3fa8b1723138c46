#include "wifimode/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wifimode/errors.hpp"

namespace wifimode {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void field_error(std::size_t line, std::size_t column, std::string_view what,
                              std::string_view text) {
  throw DataError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": invalid " +
                  std::string(what) + " '" + std::string(text) + "'");
}

double parse_real(std::string_view s, std::size_t line, std::size_t col, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v))
    field_error(line, col, what, s);
  return v;
}

std::uint64_t parse_unsigned(std::string_view s, int base, std::size_t line, std::size_t col,
                             std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) field_error(line, col, what, s);
  return v;
}

DeviceId parse_device(std::string_view s, std::size_t line, std::size_t col) {
  if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) field_error(line, col, "device_id", s);
  return parse_unsigned(s.substr(2), 16, line, col, "device_id");
}

// Calls `row(fields, line_number)` for every non-empty data line after checking the header.
template <class RowFn>
void for_each_row(std::istream& in, std::string_view header, RowFn&& row) {
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line != header)
        throw DataError("line 1: header mismatch, expected '" + std::string(header) + "', got '" + line + "'");
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    row(split_fields(line), line_no);
  }
  if (!saw_header) throw DataError("missing header, expected '" + std::string(header) + "'");
}

void expect_arity(const std::vector<std::string_view>& f, std::size_t n, std::size_t line) {
  if (f.size() != n)
    throw DataError("line " + std::to_string(line) + ": expected " + std::to_string(n) + " fields, got " +
                    std::to_string(f.size()));
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string dataset_header() {
  std::string h;
  for (const auto& name : feature_column_names()) h += name + ",";
  return h + "mode";
}

}  // namespace

std::string format_device_id(DeviceId id) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, id);
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<DetectionRecord> read_detections(std::istream& in) {
  std::vector<DetectionRecord> out;
  for_each_row(in, kDetectionHeader, [&](const std::vector<std::string_view>& f, std::size_t line) {
    expect_arity(f, 4, line);
    DetectionRecord r;
    const std::uint64_t pod = parse_unsigned(f[0], 10, line, 1, "pod_id");
    if (pod > UINT32_MAX) field_error(line, 1, "pod_id", f[0]);
    r.pod_id = static_cast<PodId>(pod);
    r.device_id = parse_device(f[1], line, 2);
    r.timestamp_s = parse_real(f[2], line, 3, "timestamp_s");
    if (r.timestamp_s < 0.0) field_error(line, 3, "timestamp_s", f[2]);
    r.rssi_dbm = parse_real(f[3], line, 4, "rssi_dbm");
    out.push_back(r);
  });
  return out;
}

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_detections(in);
}

void write_detections(std::ostream& out, const std::vector<DetectionRecord>& records) {
  out << kDetectionHeader << '\n';
  char buf[128];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%u,0x%016" PRIx64 ",%.6f,%.2f\n", r.pod_id, r.device_id, r.timestamp_s,
                  r.rssi_dbm);
    out << buf;
  }
}

void save_detections(const std::filesystem::path& path, const std::vector<DetectionRecord>& records) {
  auto out = open_output(path);
  write_detections(out, records);
  finish(out, path);
}

TruthMap read_truth(std::istream& in) {
  TruthMap truth;
  for_each_row(in, kTruthHeader, [&](const std::vector<std::string_view>& f, std::size_t line) {
    expect_arity(f, 2, line);
    const DeviceId id = parse_device(f[0], line, 1);
    const auto mode = parse_mode(f[1]);
    if (!mode) field_error(line, 2, "mode", f[1]);
    if (!truth.emplace(id, *mode).second)
      throw DataError("line " + std::to_string(line) + ": duplicate device_id " + std::string(f[0]));
  });
  return truth;
}

TruthMap load_truth(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_truth(in);
}

void write_truth(std::ostream& out, const TruthMap& truth) {
  out << kTruthHeader << '\n';
  for (const auto& [id, mode] : truth) out << format_device_id(id) << ',' << to_string(mode) << '\n';
}

void save_truth(const std::filesystem::path& path, const TruthMap& truth) {
  auto out = open_output(path);
  write_truth(out, truth);
  finish(out, path);
}

Dataset read_dataset(std::istream& in) {
  std::vector<FeatureVector> rows;
  const std::string header = dataset_header();
  for_each_row(in, header, [&](const std::vector<std::string_view>& f, std::size_t line) {
    expect_arity(f, kNumFeatures + 1, line);
    FeatureVector row;
    row.values.reserve(kNumFeatures);
    for (std::size_t j = 0; j < kNumFeatures; ++j)
      row.values.push_back(parse_real(f[j], line, j + 1, feature_column_names()[j]));
    const auto mode = parse_mode(f[kNumFeatures]);
    if (!mode) field_error(line, kNumFeatures + 1, "mode", f[kNumFeatures]);
    row.label = *mode;
    rows.push_back(std::move(row));
  });
  return Dataset({feature_column_names().begin(), feature_column_names().end()}, std::move(rows));
}

Dataset load_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  if (ds.width() != kNumFeatures)
    throw DataError("feature CSV requires " + std::to_string(kNumFeatures) + " columns, dataset has " +
                    std::to_string(ds.width()));
  out << dataset_header() << '\n';
  for (const auto& row : ds.rows()) {
    for (double v : row.values) out << format_double(v) << ',';
    out << to_string(row.label) << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  auto out = open_output(path);
  write_dataset(out, ds);
  finish(out, path);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  finish(out, path);
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace wifimode
