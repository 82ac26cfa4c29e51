#include <gtest/gtest.h>

#include <set>

#include "flexkit/error.hpp"
#include "flexkit/spectral.hpp"
#include "flexkit/synthetic.hpp"

using namespace flexkit;

namespace {

SyntheticScenario small_park(std::uint64_t seed) {
  SyntheticScenario s;
  s.kind = ScenarioKind::industrial_park;
  s.seed = seed;
  s.industrial.buildings = 2;
  s.industrial.months = 2;
  return s;
}

SyntheticScenario small_block(std::uint64_t seed) {
  SyntheticScenario s;
  s.kind = ScenarioKind::apartment_block;
  s.seed = seed;
  s.apartments.apartments = 2;
  s.apartments.days = 3;
  return s;
}

}  // namespace

TEST(Synthetic, SameSeedIsByteIdentical) {
  for (const auto& s : {small_park(5), small_block(5)}) {
    const auto a = generate_synthetic(s);
    const auto b = generate_synthetic(s);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].name, b[i].name);
      EXPECT_EQ(a[i].content, b[i].content);
    }
  }
}

TEST(Synthetic, SeedChangesData) {
  EXPECT_NE(generate_synthetic(small_park(5))[0].content, generate_synthetic(small_park(6))[0].content);
}

TEST(Synthetic, FileNamesAndGroundTruth) {
  const auto files = generate_synthetic(small_park(1));
  std::set<std::string> names;
  for (const auto& f : files) names.insert(f.name);
  EXPECT_EQ(names, (std::set<std::string>{"meters/B01.csv", "meters/B02.csv", "ground_truth.json"}));
  const Json truth = Json::parse(files.back().content);
  EXPECT_EQ(truth.at("assets").size(), 2u);
  EXPECT_EQ(truth.at("assets")[0].at("asset_id"), "B01");

  const auto hvac = generate_synthetic(small_block(1));
  EXPECT_EQ(hvac[0].name, "hvac/A01.csv");
  const Json t2 = Json::parse(hvac.back().content);
  EXPECT_EQ(t2.at("assets")[1].at("daily_setpoints_c").size(), 3u);
}

TEST(Synthetic, ParkHasDailyPeriod) {
  IndustrialParkParams p;
  p.buildings = 1;
  p.months = 1;
  const auto b = generate_industrial_park(p, 3);
  const auto report = analyze_periodicity(b[0].series);
  ASSERT_FALSE(report.periods.empty());
  ASSERT_FALSE(report.periods[0].peaks.empty());
  EXPECT_NEAR(report.periods[0].peaks[0].period_s, 86400.0, 1e-6);
}

TEST(Synthetic, ApartmentSamplesValid) {
  ApartmentBlockParams p;
  p.apartments = 1;
  p.days = 2;
  const auto a = generate_apartment_block(p, 9);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].samples.size(), 2u * 1440u);
  EXPECT_EQ(a[0].samples.front().timestamp, p.start_time);
  for (std::size_t i = 1; i < a[0].samples.size(); ++i)
    EXPECT_EQ(a[0].samples[i].timestamp - a[0].samples[i - 1].timestamp, 60);
  for (const auto& s : a[0].samples) EXPECT_TRUE(s.hvac_state == 0 || s.hvac_state == 1);
}

TEST(Synthetic, InvalidScenarios) {
  auto bad = [](SyntheticScenario s) {
    try {
      validate_scenario(s);
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidParameters;
    }
    return false;
  };
  auto s = small_park(1);
  s.industrial.buildings = 0;
  EXPECT_TRUE(bad(s));
  s = small_park(1);
  s.industrial.first_month = 13;
  EXPECT_TRUE(bad(s));
  auto h = small_block(1);
  h.apartments.tau_min = 0;
  EXPECT_TRUE(bad(h));
  h = small_block(1);
  h.apartments.setpoints_c.clear();
  EXPECT_TRUE(bad(h));
  EXPECT_NO_THROW(validate_scenario(small_block(1)));
}
