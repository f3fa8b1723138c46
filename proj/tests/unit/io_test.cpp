#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "test_support.hpp"
#include "wifimode/errors.hpp"
#include "wifimode/io.hpp"

using namespace wifimode;

namespace {

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Detections, HeaderOnlyIsEmpty) {
  std::istringstream in("pod_id,device_id,timestamp_s,rssi_dbm\n");
  EXPECT_TRUE(read_detections(in).empty());
}

TEST(Detections, FieldMapping) {
  std::istringstream in("pod_id,device_id,timestamp_s,rssi_dbm\n2,0xDEADBEEF,123.5,-67.0\n");
  const auto recs = read_detections(in);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].pod_id, 2u);
  EXPECT_EQ(recs[0].device_id, 0xDEADBEEFull);
  EXPECT_EQ(recs[0].timestamp_s, 123.5);
  EXPECT_EQ(recs[0].rssi_dbm, -67.0);
}

TEST(Detections, BadRssiNamesLineAndColumn) {
  std::istringstream in("pod_id,device_id,timestamp_s,rssi_dbm\n1,0x1,1.0,-50\n2,0xDEADBEEF,123.5,abc\n");
  const std::string msg = message_of([&] { read_detections(in); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column 4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("abc"), std::string::npos) << msg;
}

TEST(Detections, MalformedInputs) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_detections(in);
  };
  EXPECT_THROW(parse("pod,device,time,rssi\n"), DataError);
  EXPECT_THROW(parse(""), DataError);
  EXPECT_THROW(parse("pod_id,device_id,timestamp_s,rssi_dbm\n1,0x1,2.0\n"), DataError);
  EXPECT_THROW(parse("pod_id,device_id,timestamp_s,rssi_dbm\n1,0x1,-2.0,-50\n"), DataError);
  EXPECT_THROW(parse("pod_id,device_id,timestamp_s,rssi_dbm\n1,12,2.0,-50\n"), DataError);
  EXPECT_THROW(parse("pod_id,device_id,timestamp_s,rssi_dbm\nx,0x1,2.0,-50\n"), DataError);
  EXPECT_THROW(parse("pod_id,device_id,timestamp_s,rssi_dbm\n1,0x1,nan,-50\n"), DataError);
}

TEST(Detections, ToleratesCrlf) {
  std::istringstream in("pod_id,device_id,timestamp_s,rssi_dbm\r\n0,0x2,1.250,-70.5\r\n");
  const auto recs = read_detections(in);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].rssi_dbm, -70.5);
}

TEST(Detections, MissingFile) {
  EXPECT_THROW(load_detections("/nonexistent/dir/detections.csv"), DataError);
}

TEST(Detections, SimulatedRecordsRoundTripExactly) {
  const auto sim = wifimode::testing::default_simulation(3);
  std::stringstream buf;
  write_detections(buf, sim.detections);
  const auto back = read_detections(buf);
  ASSERT_EQ(back.size(), sim.detections.size());
  for (std::size_t i = 0; i < back.size(); ++i) ASSERT_EQ(back[i], sim.detections[i]) << "record " << i;
}

TEST(Truth, RoundTripAndErrors) {
  TruthMap t{{0x10, Mode::Driving}, {0xFFFFFFFFFFFFFFFFull, Mode::Walking}};
  std::stringstream buf;
  write_truth(buf, t);
  EXPECT_EQ(read_truth(buf), t);

  std::istringstream dup("device_id,mode\n0x1,walking\n0x1,biking\n");
  EXPECT_THROW(read_truth(dup), DataError);
  std::istringstream bad("device_id,mode\n0x1,bus\n");
  EXPECT_THROW(read_truth(bad), DataError);
}

TEST(FeatureCsv, RoundTripIsExact) {
  Rng rng(17);
  std::vector<FeatureVector> rows;
  for (int i = 0; i < 200; ++i) {
    FeatureVector fv;
    for (std::size_t j = 0; j < kNumFeatures; ++j) fv.values.push_back(rng.normal() * std::pow(10.0, (i % 9) - 4));
    fv.label = mode_from_index(static_cast<std::size_t>(i) % 3);
    rows.push_back(fv);
  }
  rows[0].values[0] = 1.0 / 3.0;
  rows[0].values[1] = std::numeric_limits<double>::denorm_min();
  rows[0].values[2] = -0.0;
  rows[0].values[3] = std::numeric_limits<double>::max();
  const Dataset ds({feature_column_names().begin(), feature_column_names().end()}, rows);

  std::stringstream buf;
  write_dataset(buf, ds);
  const Dataset back = read_dataset(buf);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(back[i].label, ds[i].label);
    for (std::size_t j = 0; j < kNumFeatures; ++j) ASSERT_EQ(back[i].values[j], ds[i].values[j]) << i << "," << j;
  }
  EXPECT_TRUE(std::signbit(back[0].values[2]));
}

TEST(FeatureCsv, HeaderAndErrors) {
  const Dataset narrow = wifimode::testing::make_dataset({{1.0}}, {Mode::Walking});
  std::stringstream out;
  EXPECT_THROW(write_dataset(out, narrow), DataError);

  std::string header = "f01,f02,f03,f04,f05,f06,f07,f08,f09,f10,f11,f12,f13,f14,f15,mode\n";
  std::istringstream ok(header + "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,biking\n");
  const Dataset ds = read_dataset(ok);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].label, Mode::Biking);
  EXPECT_EQ(ds[0].values[14], 15.0);

  std::istringstream bad_mode(header + "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,bus\n");
  const std::string msg = message_of([&] { read_dataset(bad_mode); });
  EXPECT_NE(msg.find("column 16"), std::string::npos) << msg;
}

TEST(DeviceIdFormat, ZeroPaddedHex) {
  EXPECT_EQ(format_device_id(0xDEADBEEF), "0x00000000deadbeef");
}

TEST(TextFiles, UnwritablePathThrows) {
  EXPECT_THROW(write_text_file("/nonexistent/dir/out.txt", "x"), DataError);
}
