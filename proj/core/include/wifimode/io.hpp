#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "wifimode/types.hpp"

namespace wifimode {

// Detection CSV: `pod_id,device_id,timestamp_s,rssi_dbm`, device ids as 0x-prefixed hex.
inline constexpr std::string_view kDetectionHeader = "pod_id,device_id,timestamp_s,rssi_dbm";
inline constexpr std::string_view kTruthHeader = "device_id,mode";

using TruthMap = std::map<DeviceId, Mode>;

// Readers report the 1-based line (and column for field errors) in the DataError message.
std::vector<DetectionRecord> read_detections(std::istream& in);
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);
void write_detections(std::ostream& out, const std::vector<DetectionRecord>& records);
void save_detections(const std::filesystem::path& path, const std::vector<DetectionRecord>& records);

TruthMap read_truth(std::istream& in);
TruthMap load_truth(const std::filesystem::path& path);
void write_truth(std::ostream& out, const TruthMap& truth);
void save_truth(const std::filesystem::path& path, const TruthMap& truth);

// Feature CSV: `f01,...,f15,mode`. Values are written in shortest round-trip
// form, so a write/read cycle is exact.
Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const Dataset& ds);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);

std::string format_device_id(DeviceId id);
// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
// Writes `text` to `path`, throwing DataError if the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace wifimode
