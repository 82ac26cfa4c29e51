// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "alloc_fixture.hpp"
#include "e2e_pipeline.hpp"
#include "flexkit/allocation.hpp"
#include "flexkit/baseline.hpp"
#include "flexkit/clustering.hpp"
#include "flexkit/forest.hpp"
#include "flexkit/hvac.hpp"
#include "flexkit/spectral.hpp"
#include "flexkit/synthetic.hpp"
#include "oracles.hpp"

using namespace flexkit;

namespace {

/// Collects failed checks for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::string s = notes_;
    if (failed_ > 0) {
      s += (s.empty() ? "" : "; ") + std::to_string(failed_) + " failed check(s):";
      for (const auto& f : failures_) s += " [" + f + "]";
    }
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
  std::string notes_;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

PointSet to_point_set(const std::vector<std::vector<double>>& pts) {
  PointSet ps(pts.front().size());
  for (const auto& p : pts) ps.push_back(p);
  return ps;
}

// DFT against the O(n^2) sum on 200 random series, Parseval within 1e-6 relative.
void dft_correctness(Check& c) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(16, 512);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  double worst_bin = 0.0, worst_parseval = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(len(rng)));
    for (auto& v : x) v = val(rng);
    const auto spectrum = dft(x, 1.0, Detrend::none);
    const auto ref = oracle::naive_dft(x);
    c.expect(spectrum.bins.size() == x.size() / 2 + 1, "bin count n=" + std::to_string(x.size()));
    for (std::size_t k = 0; k < spectrum.bins.size() && k < ref.size(); ++k) {
      const double err = std::abs(spectrum.bins[k].amplitude - ref[k]);
      worst_bin = std::max(worst_bin, err);
      c.expect(err <= 1e-9, "bin " + std::to_string(k) + " of n=" + std::to_string(x.size()) + " err " + fmt(err));
    }
    double energy = 0.0;
    for (double v : x) energy += v * v;
    const double rel = std::abs(spectrum.parseval_energy() - energy) / energy;
    worst_parseval = std::max(worst_parseval, rel);
    c.expect(rel <= 1e-6, "parseval n=" + std::to_string(x.size()));
  }
  c.note("max bin error " + fmt(worst_bin, 3) + ", max Parseval error " + fmt(worst_parseval, 3));
}

// Every building-month of 20 seeded industrial parks peaks at 24 h.
void periodicity_recovery(Check& c) {
  std::size_t months = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const auto& b : generate_industrial_park(IndustrialParkParams{}, seed)) {
      const auto report = analyze_periodicity(b.series);
      c.expect(report.skipped.empty(), "skipped month seed " + std::to_string(seed));
      for (const auto& p : report.periods) {
        ++months;
        const bool daily = !p.peaks.empty() && std::abs(p.peaks[0].period_s - 86400.0) < 1e-6;
        c.expect(daily, b.truth.asset_id + " " + p.month.to_string() + " seed " + std::to_string(seed));
      }
    }
  }
  c.note(std::to_string(months) + " building-months");
}

// DBSCAN partitions equal the textbook algorithm visiting points in the same order.
void dbscan_equivalence(Check& c) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> count(1, 200), blobs(1, 4);
  std::uniform_real_distribution<double> centre(0.0, 5.0);
  std::normal_distribution<double> spread(0.0, 0.35);
  std::uniform_real_distribution<double> eps_draw(0.1, 1.0);
  std::size_t instances = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dims = trial % 2 == 0 ? 1 : 2;
    const auto n = static_cast<std::size_t>(count(rng));
    std::vector<std::vector<double>> centres(static_cast<std::size_t>(blobs(rng)));
    for (auto& cc : centres)
      for (std::size_t d = 0; d < dims; ++d) cc.push_back(centre(rng));
    std::vector<std::vector<double>> pts;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& cc = centres[i % centres.size()];
      std::vector<double> p;
      for (std::size_t d = 0; d < dims; ++d) p.push_back(std::round((cc[d] + spread(rng)) * 100.0) / 100.0);
      pts.push_back(p);
    }
    const auto order = oracle::lexicographic_order(pts);
    const auto ps = to_point_set(pts);
    // the industrial parameterization (0.5 kWh, k = 5) plus a random one
    for (DbscanParams params : {DbscanParams{0.5, 5}, DbscanParams{eps_draw(rng), 2 + static_cast<std::size_t>(trial % 6)}}) {
      const auto got = dbscan(ps, params);
      const auto want = oracle::textbook_dbscan(pts, params.epsilon, params.min_points, order);
      c.expect(oracle::same_partition(got.labels, want), "trial " + std::to_string(trial));
      ++instances;
    }
  }
  c.note(std::to_string(instances) + " instances");
}

// Point masses score above 0.99; 60-point fixtures match the direct formula.
void silhouette_sanity(Check& c) {
  std::vector<std::vector<double>> masses;
  for (int i = 0; i < 10; ++i) masses.push_back({0.0, 0.0});
  for (int i = 0; i < 10; ++i) masses.push_back({10.0, 10.0});
  const auto ps = to_point_set(masses);
  const auto a = dbscan(ps, {1.0, 3});
  const double point_mass = silhouette(ps, a);
  c.expect(point_mass > 0.99, "point masses " + fmt(point_mass));

  std::mt19937_64 rng(31);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> label(-1, 3);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dims = 1 + static_cast<std::size_t>(trial % 3);
    std::vector<std::vector<double>> pts;
    ClusterAssignment asg;
    for (int i = 0; i < 60; ++i) {
      const int l = i < 8 ? i % 4 : label(rng);  // every cluster non-empty
      std::vector<double> p;
      for (std::size_t d = 0; d < dims; ++d) p.push_back(3.0 * (l + 1) + noise(rng));
      pts.push_back(p);
      asg.labels.push_back(l);
    }
    const auto fixture = to_point_set(pts);
    asg.clusters = cluster_stats(fixture, asg.labels);
    const double diff = std::abs(silhouette(fixture, asg) - oracle::silhouette(pts, asg.labels));
    worst = std::max(worst, diff);
    c.expect(diff <= 1e-9, "fixture " + std::to_string(trial) + " diff " + fmt(diff));
  }
  c.note("point masses " + fmt(point_mass, 6) + ", max formula diff " + fmt(worst, 3));
}

// Band arithmetic on the 500/1500/2500 slot and exclusions on the square wave.
void baseline_band_rules(Check& c) {
  BaselineSet slot;
  slot.slots_per_cycle = 1;
  slot.slots.push_back({500.0, 1500.0, 2500.0});
  const auto down = flexibility_band(slot, FlexDirection::downward, 0.10);
  const auto up = flexibility_band(slot, FlexDirection::upward, 0.10);
  // adj = 0.10 * (2500 - 1500) = 100; downward (1500 - 500) + 100, upward (2500 - 1500) + 100
  c.expect(down.available_flex_wh == std::vector<double>{1100.0}, "downward band");
  c.expect(up.available_flex_wh == std::vector<double>{1100.0}, "upward band");

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> day_noise(-60.0, 60.0), night_noise(-20.0, 20.0);
  const std::vector<std::pair<int, int>> spikes{{3, 9}, {10, 14}, {22, 17}};
  std::vector<double> v;
  for (int d = 0; d < 31; ++d)
    for (int h = 0; h < 24; ++h) {
      if (h >= 7 && h < 19) {
        const bool spike = std::find(spikes.begin(), spikes.end(), std::pair{d, h}) != spikes.end();
        const double x = std::round(1800.0 + day_noise(rng));
        v.push_back(spike ? 5000.0 : x);
      } else {
        v.push_back(d % 2 == 0 ? std::round(300.0 + night_noise(rng)) : std::round(450.0 + night_noise(rng)));
      }
    }
  const auto b = derive_baselines(MeterSeries(1609459200, 3600, v), segmentation_for_period(86400.0, 3600));
  c.expect(b.outlier_count == spikes.size(), "outliers " + std::to_string(b.outlier_count));
  for (std::size_t h = 7; h < 19; ++h) {
    c.expect(!b.slots[h].fallback, "day slot fallback");
    c.expect(b.slots[h].max_wh < 1900.0 && b.slots[h].min_wh > 1700.0, "day slot envelope " + std::to_string(h));
  }
  for (std::size_t h : {0u, 1u, 2u, 3u, 4u, 5u, 6u, 19u, 20u, 21u, 22u, 23u}) c.expect(b.slots[h].fallback, "night slot");
  std::size_t sub_floor = 0;
  for (const auto& e : b.excluded_low_clusters) {
    c.expect(e.mean_wh < 500.0 && !e.above_ceiling, "excluded cluster mean " + fmt(e.mean_wh));
    ++sub_floor;
  }
  c.expect(sub_floor >= 12, "night clusters excluded " + std::to_string(sub_floor));
  c.note("band 1100/1100 Wh, " + std::to_string(b.outlier_count) + " spikes and " + std::to_string(sub_floor) +
         " sub-floor clusters excluded");
}

std::vector<HvacSample> apartment(std::uint64_t seed, std::size_t days, double noise, std::int64_t control_s,
                                  std::int64_t hold_s) {
  ApartmentBlockParams p;
  p.apartments = 1;
  p.days = days;
  p.sensor_noise_c = noise;
  p.control_interval_s = control_s;
  p.outdoor_hold_s = hold_s;
  return generate_apartment_block(p, seed).at(0).samples;
}

// Exact recovery on affine data; MAE and R^2 on the noisy RC simulation.
void thermal_model(Check& c) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t_in(18.0, 32.0), t_out(20.0, 40.0), duty(0.0, 1.0);
  const std::vector<double> truth{-0.08, 0.05, -1.2, 0.3};
  Matrix x(400, 3);
  std::vector<double> y;
  for (std::size_t r = 0; r < 400; ++r) {
    x(r, 0) = t_in(rng);
    x(r, 1) = t_out(rng);
    x(r, 2) = duty(rng);
    y.push_back(truth[0] * x(r, 0) + truth[1] * x(r, 1) + truth[2] * x(r, 2) + truth[3]);
  }
  const auto affine = train_thermal(x, y, 320, NormalizationSpec::fit(x, NormalizationMethod::min_max, 320));
  double worst = 0.0;
  for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(affine.raw_coefficients()[k] - truth[k]));
  c.expect(worst <= 1e-6, "affine coefficient error " + fmt(worst));

  const auto rc = train_thermal(prepare_training_set(apartment(4, 20, 0.0, 900, 900)));
  const double g = 1.0 - std::exp(-15.0 / 180.0);
  const std::vector<double> rc_truth{-g, g, -18.0 * g, 0.0};
  double rc_worst = 0.0;
  for (std::size_t k = 0; k < 4; ++k) rc_worst = std::max(rc_worst, std::abs(rc.raw_coefficients()[k] - rc_truth[k]));
  c.expect(rc_worst <= 1e-6, "noiseless RC coefficient error " + fmt(rc_worst));

  const auto noisy = train_thermal(prepare_training_set(apartment(5, 30, 0.1, 60, 0)));
  const auto& m = noisy.train_metrics();
  c.expect(m.mae <= 0.3, "MAE " + fmt(m.mae));
  c.expect(m.r2 >= 0.88, "R2 " + fmt(m.r2));
  c.note("affine error " + fmt(std::max(worst, rc_worst), 3) + ", noisy test MAE " + fmt(m.mae) + " C, R2 " +
         fmt(m.r2) + " on " + std::to_string(m.rows) + " rows");
}

// Hysteresis simulation with 2% of the labels flipped; chronological test split.
void state_predictor(Check& c) {
  auto set = prepare_training_set(apartment(6, 30, 0.1, 60, 0));
  Rng flip(2);
  std::size_t flipped = 0;
  for (auto& y : set.state_targets)
    if (flip.uniform() < 0.02) {
      y = 1 - y;
      ++flipped;
    }
  const auto a = train_state_predictor(set);
  const auto b = train_state_predictor(set);
  c.expect(a == b, "same seed gives different forests");
  const auto& m = a.train_metrics();
  c.expect(m.accuracy >= 0.90, "accuracy " + fmt(m.accuracy));
  c.expect(m.f1 >= 0.88, "F1 " + fmt(m.f1));
  c.note("accuracy " + fmt(m.accuracy) + ", F1 " + fmt(m.f1) + " on " + std::to_string(m.rows) + " test rows, " +
         std::to_string(flipped) + " labels flipped");
}

struct StubThermal : ThermalPredictor {
  double predict_delta(double, double outdoor, int state) const override {
    return state == 1 ? -0.5 : 0.01 * (outdoor - 20.0);
  }
};

struct StubThermostat : StateClassifier {
  int predict_next(double indoor, double set, int previous, double) const override {
    if (indoor >= set + 0.45) return 1;
    if (indoor <= set - 0.45) return 0;
    return previous;
  }
};

// Stub rollouts against hand stepping; trained forecasts stay within [0, rated].
void rollout_and_flexibility(Check& c) {
  std::size_t traces = 0;
  for (double start : {22.0, 24.6, 26.0, 29.0})
    for (int state : {0, 1})
      for (double set : {23.0, 24.0, 26.0}) {
        HvacSample h{1625097600, start, 32.0, state ? 1500.0 : 0.0, state, set};
        const auto r = rollout(StubThermal{}, StubThermostat{}, h, set, 12, {}, 1.5, 900);
        double t = start;
        int s = state;
        std::vector<int> states;
        std::vector<double> temps;
        for (int j = 0; j < 12; ++j) {
          t += s == 1 ? -0.5 : 0.01 * (32.0 - 20.0);
          s = t >= set + 0.45 ? 1 : t <= set - 0.45 ? 0 : s;
          states.push_back(s);
          temps.push_back(t);
        }
        const double on = static_cast<double>(std::count(states.begin(), states.end(), 1));
        c.expect(r.states == states && r.indoor_c == temps && r.energy_kwh == on * 1.5 * 900.0 / 3600.0,
                 "trace from " + fmt(start) + " set " + fmt(set));
        ++traces;
      }

  std::size_t forecasts = 0;
  ApartmentBlockParams p;
  p.apartments = 3;
  p.days = 21;
  HvacTrainingConfig cfg;
  cfg.forest.n_trees = 40;
  for (const auto& apt : generate_apartment_block(p, 12)) {
    const auto model = train_hvac_models(apt.truth.asset_id, apt.truth.rated_power_kw, apt.samples, cfg);
    for (EpochSeconds at = p.start_time + 14 * 86400; at < p.start_time + 21 * 86400; at += 5 * 3600) {
      const auto origin = forecast_origin(apt.samples, 900, at);
      for (auto dir : {FlexDirection::downward, FlexDirection::upward}) {
        ForecastRequest req;
        req.device_id = apt.truth.asset_id;
        req.rated_power_kw = apt.truth.rated_power_kw;
        req.horizon_steps = 12;
        req.step_s = 900;
        req.direction = dir;
        const auto f = forecast_flexibility(model.thermal, model.state, origin, req);
        c.expect(f.available_flex_kw.size() == 12, "horizon");
        for (double v : f.available_flex_kw) c.expect(v >= 0.0 && v <= req.rated_power_kw, "flex " + fmt(v));
        ++forecasts;
      }
    }
  }
  c.note(std::to_string(traces) + " hand-stepped traces, " + std::to_string(forecasts) + " trained forecasts");
}

// Grid-search optimum, closed form, exact constraints and scale equivariance.
void allocator_optimality(Check& c) {
  std::mt19937_64 rng(505);
  std::size_t plans = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const bool on_grid = trial % 2 == 0;
    const auto a = fixture::random_allocation(rng, on_grid);
    double capacity = 0.0;
    std::vector<double> flat;
    for (const auto& row : a.caps)
      for (double v : row) {
        capacity += v;
        flat.push_back(v);
      }
    const double req = a.event.requested_power_kw;
    const double closed = std::pow(std::max(0.0, req - capacity), 2);
    const double grid = oracle::grid_min_event_total(flat, req, 0.05);
    const double tol = 1e-9 * std::max(1.0, req * req);
    for (auto policy : {AllocationPolicy::proportional, AllocationPolicy::greedy_cheapest_first}) {
      const auto plan = solve_allocation(a.event, a.contracts, a.forecasts, {policy, ObjectiveMode::event_total});
      ++plans;
      c.expect(std::abs(plan.objective - closed) <= tol, "closed form trial " + std::to_string(trial));
      c.expect(plan.objective <= grid + tol, "grid beats plan trial " + std::to_string(trial));
      if (on_grid) c.expect(std::abs(plan.objective - grid) <= tol, "grid optimum trial " + std::to_string(trial));
      for (std::size_t i = 0; i < a.caps.size(); ++i)
        for (std::size_t t = 0; t < a.caps[i].size(); ++t) {
          const double x = plan.delivered_kw(i, t);
          c.expect(x >= 0.0 && x <= a.contracts[i].max_flex_kw[t] && x <= a.forecasts[i].available_flex_kw[t + 1],
                   "constraint trial " + std::to_string(trial));
        }
    }
    const auto base = solve_allocation(a.event, a.contracts, a.forecasts);
    for (double s : {0.001, 0.7, 3.0, 1000.0}) {
      auto b = a;
      b.event.requested_power_kw *= s;
      for (auto& k : b.contracts)
        for (auto& v : k.max_flex_kw) v *= s;
      for (auto& f : b.forecasts)
        for (auto& v : f.available_flex_kw) v *= s;
      const auto scaled = solve_allocation(b.event, b.contracts, b.forecasts);
      for (std::size_t i = 0; i < base.delivered_kw.rows(); ++i)
        for (std::size_t t = 0; t < base.steps(); ++t) {
          const double want = s * base.delivered_kw(i, t);
          c.expect(std::abs(scaled.delivered_kw(i, t) - want) <= 1e-9 * want, "scale " + fmt(s));
        }
    }
  }
  c.note(std::to_string(plans) + " plans, grid optimum checked on on-grid fixtures");
}

// Full pipeline twice; byte-identical outputs equal to the committed goldens.
void end_to_end_golden(Check& c) {
  oracle::TempDir first_dir("acceptance_e2e_a");
  oracle::TempDir second_dir("acceptance_e2e_b");
  const auto first = e2e::run_pipeline(first_dir.path());
  const auto second = e2e::run_pipeline(second_dir.path());
  c.expect(first == second, "two runs differ");
  const auto diff = e2e::check_goldens(first);
  c.expect(diff.ok, diff.message);
  c.note(std::to_string(first.size()) + " outputs byte-stable");
}

struct Criterion {
  const char* name;
  double limit_s;  // 0: no runtime limit
  std::function<void(Check&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"dft-correctness", 10.0, dft_correctness},
      {"periodicity-recovery", 30.0, periodicity_recovery},
      {"dbscan-equivalence", 60.0, dbscan_equivalence},
      {"silhouette-sanity", 0.0, silhouette_sanity},
      {"baseline-band-rules", 0.0, baseline_band_rules},
      {"thermal-model", 60.0, thermal_model},
      {"state-predictor", 120.0, state_predictor},
      {"rollout-flexibility", 0.0, rollout_and_flexibility},
      {"allocator-optimality", 30.0, allocator_optimality},
      {"end-to-end-golden", 0.0, end_to_end_golden},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.limit_s > 0.0) check.expect(secs < cr.limit_s, "runtime " + fmt(secs) + " s over " + fmt(cr.limit_s) + " s");
    const bool ok = check.ok();
    if (!ok) ++failed;
    std::printf("%s %s (%s; %.2f s)\n", ok ? "PASS" : "FAIL", cr.name, check.summary().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
