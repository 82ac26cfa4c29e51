#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "flexkit/baseline.hpp"
#include "flexkit/error.hpp"
#include "flexkit/spectral.hpp"

using namespace flexkit;

namespace {

constexpr EpochSeconds kJan = 1609459200;  // 2021-01-01T00:00:00Z
const SegmentationRule kDaily = segmentation_for_period(86400.0, 3600);

/// Hourly January series with `value(day, hour)`.
template <typename F>
MeterSeries january(F value) {
  std::vector<double> v;
  for (int d = 0; d < 31; ++d)
    for (int h = 0; h < 24; ++h) v.push_back(value(d, h));
  return MeterSeries(kJan, 3600, v);
}

double oracle_percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

BaselineSet one_slot(double min, double medium, double max) {
  BaselineSet b;
  b.slots_per_cycle = 1;
  b.slots.push_back({min, medium, max});
  return b;
}

}  // namespace

TEST(DeriveBaselines, ConstantSeries) {
  const auto b = derive_baselines(january([](int, int) { return 1000.0; }), kDaily);
  ASSERT_EQ(b.slots.size(), 24u);
  for (const auto& s : b.slots) {
    EXPECT_EQ(s.min_wh, 1000.0);
    EXPECT_EQ(s.medium_wh, 1000.0);
    EXPECT_EQ(s.max_wh, 1000.0);
    EXPECT_FALSE(s.fallback);
  }
}

TEST(DeriveBaselines, SquareWaveExcludesSpikesAndNightFloor) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> day_noise(-60.0, 60.0), night_noise(-20.0, 20.0);
  std::vector<std::vector<double>> raw(24);
  std::vector<std::vector<double>> clean_day(24);
  const std::vector<std::pair<int, int>> spikes{{3, 9}, {10, 14}, {22, 17}};
  auto series = january([&](int d, int h) {
    double v;
    if (h >= 7 && h < 19) {
      v = std::round(1800.0 + day_noise(rng));
      if (std::find(spikes.begin(), spikes.end(), std::pair{d, h}) != spikes.end()) v = 5000.0;
      else clean_day[static_cast<std::size_t>(h)].push_back(v);
    } else {
      v = std::round(300.0 + night_noise(rng));
    }
    raw[static_cast<std::size_t>(h)].push_back(v);
    return v;
  });
  BaselineOptions opt;
  opt.dbscan = {500.0, 5};
  opt.low_load_floor_wh = 500.0;
  const auto b = derive_baselines(series, kDaily, opt);
  EXPECT_EQ(b.outlier_count, spikes.size());
  for (std::size_t h = 0; h < 24; ++h) {
    const auto& s = b.slots[h];
    if (h >= 7 && h < 19) {
      ASSERT_FALSE(s.fallback) << h;
      EXPECT_EQ(s.min_wh, *std::min_element(clean_day[h].begin(), clean_day[h].end()));
      EXPECT_EQ(s.max_wh, *std::max_element(clean_day[h].begin(), clean_day[h].end()));
      EXPECT_EQ(s.medium_wh, oracle_percentile(clean_day[h], 0.5));
      EXPECT_LT(s.max_wh, 5000.0);
    } else {
      ASSERT_TRUE(s.fallback) << h;
      EXPECT_EQ(s.min_wh, oracle_percentile(raw[h], 0.1));
      EXPECT_EQ(s.medium_wh, oracle_percentile(raw[h], 0.5));
      EXPECT_EQ(s.max_wh, oracle_percentile(raw[h], 0.9));
    }
  }
  EXPECT_EQ(b.fallback_count(), 12u);
}

TEST(DeriveBaselines, FloorExcludesFourHundredCluster) {
  // alternate days at 400 Wh and 1500 Wh in every slot
  const auto series = january([](int d, int) { return d % 2 == 0 ? 400.0 : 1500.0; });
  const auto b = derive_baselines(series, kDaily);
  for (const auto& s : b.slots) {
    EXPECT_FALSE(s.fallback);
    EXPECT_EQ(s.min_wh, 1500.0);
    EXPECT_EQ(s.max_wh, 1500.0);
  }
  ASSERT_EQ(b.excluded_low_clusters.size(), 24u);
  for (const auto& c : b.excluded_low_clusters) {
    EXPECT_EQ(c.mean_wh, 400.0);
    EXPECT_FALSE(c.above_ceiling);
  }
}

TEST(DeriveBaselines, MeanMediumOption) {
  const auto series = january([](int d, int) { return d < 20 ? 1000.0 : 1300.0; });
  BaselineOptions opt;
  opt.medium = MediumRule::mean;
  const auto b = derive_baselines(series, kDaily, opt);
  EXPECT_NEAR(b.slots[0].medium_wh, (20 * 1000.0 + 11 * 1300.0) / 31.0, 1e-9);
  EXPECT_EQ(b.medium_rule, MediumRule::mean);
}

TEST(DeriveBaselines, Errors) {
  const MeterSeries week(kJan, 3600, std::vector<double>(24 * 6, 1000.0));
  try {
    derive_baselines(week, kDaily);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientCycles);
  }
  // every slot below the floor -> nothing but fallbacks
  try {
    derive_baselines(january([](int, int) { return 100.0; }), kDaily);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyAfterExclusion);
  }
}

TEST(DeriveBaselines, OrderingInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 3000.0);
  const auto b = derive_baselines(january([&](int, int) { return std::round(u(rng)); }), kDaily,
                                  BaselineOptions{{300.0, 3}, true});
  for (const auto& s : b.slots) {
    EXPECT_LE(s.min_wh, s.medium_wh);
    EXPECT_LE(s.medium_wh, s.max_wh);
    EXPECT_GE(s.min_wh, 0.0);
  }
}

/// Every slot repeats `days` (30 or 31 values, one per January day).
MeterSeries daily_repeat(const std::vector<double>& days) {
  std::vector<double> v;
  for (double d : days)
    for (int h = 0; h < 24; ++h) v.push_back(d);
  return MeterSeries(kJan, 3600, v);
}

TEST(DeriveBaselines, AddedPointInsideFullySurvivingSlotKeepsEnvelope) {
  // When every reading of a slot already survives, a reading added inside
  // [min, max] can only join or merge clusters, so the envelope holds.
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_real_distribution<double> u(1200.0, 1500.0);
    std::vector<double> days(30);
    for (auto& v : days) v = std::round(u(rng));
    const BaselineOptions opt{{120.0, 4}};
    const auto before = derive_baselines(daily_repeat(days), kDaily, opt);
    if (before.slots[0].outliers != 0 || !before.excluded_low_clusters.empty()) continue;
    ++checked;
    days.push_back(std::round(std::uniform_real_distribution<double>(before.slots[0].min_wh, before.slots[0].max_wh)(rng)));
    const auto after = derive_baselines(daily_repeat(days), kDaily, opt);
    ASSERT_FALSE(after.slots[0].fallback);
    EXPECT_EQ(after.slots[0].min_wh, before.slots[0].min_wh);
    EXPECT_EQ(after.slots[0].max_wh, before.slots[0].max_wh);
  }
  EXPECT_GT(checked, 50);
}

TEST(DeriveBaselines, EnvelopeCanWidenWhenAddedPointPromotesBorder) {
  // Counterexample to unconditional envelope monotonicity. The border point
  // 1000 gains a fifth neighbour from the added 950, becomes core, and pulls
  // the former outlier 1090 into the cluster.
  std::vector<double> days{820, 820, 900, 900, 1000, 1090};
  days.resize(30, 3000.0);  // a separate cluster above the ceiling
  const BaselineOptions opt{{100.0, 5}};
  const auto before = derive_baselines(daily_repeat(days), kDaily, opt);
  days.push_back(950.0);
  const auto after = derive_baselines(daily_repeat(days), kDaily, opt);
  EXPECT_EQ(before.slots[0].min_wh, 820.0);
  EXPECT_EQ(before.slots[0].max_wh, 1000.0);
  EXPECT_EQ(before.slots[0].outliers, 1u);
  EXPECT_EQ(after.slots[0].max_wh, 1090.0);
  EXPECT_EQ(after.slots[0].outliers, 0u);
}

TEST(FlexibilityBand, HandArithmetic) {
  const auto b = one_slot(500, 1500, 2500);
  EXPECT_EQ(flexibility_band(b, FlexDirection::upward, 0.10).available_flex_wh[0], 1100.0);
  EXPECT_EQ(flexibility_band(b, FlexDirection::downward, 0.10).available_flex_wh[0], 1100.0);
  EXPECT_EQ(flexibility_band(one_slot(500, 2300, 2500), FlexDirection::downward, 0.10).available_flex_wh[0], 1820.0);
}

TEST(FlexibilityBand, DegenerateSlotIsZero) {
  const auto b = one_slot(800, 800, 800);
  for (auto dir : {FlexDirection::upward, FlexDirection::downward})
    EXPECT_EQ(flexibility_band(b, dir, 0.05).available_flex_wh[0], 0.0);
}

TEST(FlexibilityBand, FractionOutOfRange) {
  const auto b = one_slot(1, 2, 3);
  for (double f : {0.0, -0.01, 0.1000001, 0.5}) {
    try {
      flexibility_band(b, FlexDirection::upward, f);
      FAIL() << f;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::FractionOutOfRange);
    }
  }
  EXPECT_NO_THROW(flexibility_band(b, FlexDirection::upward, 0.10));
}

TEST(FlexibilityBand, RandomMatchesFormulaAndBounds) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 3000.0), frac(1e-6, 0.10);
  BaselineSet b;
  b.slots_per_cycle = 200;
  for (int i = 0; i < 200; ++i) {
    double v[3] = {u(rng), u(rng), u(rng)};
    std::sort(v, v + 3);
    b.slots.push_back({v[0], v[1], v[2]});
  }
  for (int trial = 0; trial < 20; ++trial) {
    const double f = frac(rng);
    for (auto dir : {FlexDirection::upward, FlexDirection::downward}) {
      const auto band = flexibility_band(b, dir, f);
      for (std::size_t i = 0; i < b.slots.size(); ++i) {
        const auto& s = b.slots[i];
        const double adj = f * (s.max_wh - s.medium_wh);
        double want = (dir == FlexDirection::upward ? s.max_wh - s.medium_wh : s.medium_wh - s.min_wh) + adj;
        want = std::clamp(want, 0.0, s.max_wh - s.min_wh);
        EXPECT_EQ(band.available_flex_wh[i], want);
        EXPECT_GE(band.available_flex_wh[i], 0.0);
        EXPECT_LE(band.available_flex_wh[i], s.max_wh - s.min_wh);
      }
    }
  }
}

TEST(BaselineCsv, Format) {
  auto b = one_slot(500, 1500, 2500);
  b.slots[0].fallback = true;
  EXPECT_EQ(format_baseline_csv(b), "slot,min_wh,medium_wh,max_wh,fallback\n0,500,1500,2500,true\n");
  EXPECT_EQ(format_band_csv(flexibility_band(b, FlexDirection::upward, 0.1)),
            "slot,direction,available_flex_wh\n0,upward,1100\n");
}
