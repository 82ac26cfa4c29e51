#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "alloc_fixture.hpp"
#include "flexkit/allocation.hpp"
#include "flexkit/error.hpp"
#include "oracles.hpp"

using namespace flexkit;
using fixture::make_allocation;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Conflict;
}

AllocationPlan solve(const fixture::Allocation& a, AllocationOptions o = {}) {
  return solve_allocation(a.event, a.contracts, a.forecasts, o);
}

void expect_constraints(const fixture::Allocation& a, const AllocationPlan& p) {
  ASSERT_EQ(p.delivered_kw.rows(), a.caps.size());
  for (std::size_t i = 0; i < a.caps.size(); ++i)
    for (std::size_t t = 0; t < a.caps[i].size(); ++t) {
      const double x = p.delivered_kw(i, t);
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, a.contracts[i].max_flex_kw[t]);
      EXPECT_LE(x, a.forecasts[i].available_flex_kw[t + 1]);
    }
}

double capacity(const fixture::Allocation& a) {
  double c = 0.0;
  for (const auto& row : a.caps)
    for (double v : row) c += v;
  return c;
}

}  // namespace

TEST(SolveAllocation, ThreeEqualCapsProportional) {
  const auto a = make_allocation({{4}, {4}, {4}}, {{9}, {9}, {9}}, 10.0);
  const auto p = solve(a);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p.delivered_kw(i, 0), 10.0 / 3.0, 1e-12);
  EXPECT_NEAR(p.residual_kw, 0.0, 1e-12);
  EXPECT_NEAR(p.objective, 0.0, 1e-20);
  EXPECT_EQ(p.status, PlanStatus::exact);
  expect_constraints(a, p);
  EXPECT_NEAR(oracle::grid_min_bruteforce({4, 4, 4}, 10.0, 0.1), 0.0, 1e-18);
}

TEST(SolveAllocation, CapsBind) {
  const auto a = make_allocation({{1}, {1}, {1}}, {{5}, {5}, {5}}, 10.0);
  for (auto policy : {AllocationPolicy::proportional, AllocationPolicy::greedy_cheapest_first}) {
    const auto p = solve(a, {policy});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(p.delivered_kw(i, 0), 1.0);
    EXPECT_EQ(p.residual_kw, 7.0);
    EXPECT_EQ(p.objective, 49.0);
    EXPECT_EQ(p.status, PlanStatus::shortfall);
  }
}

TEST(SolveAllocation, SingleExactMatch) {
  const auto p = solve(make_allocation({{5}}, {{5}}, 5.0));
  EXPECT_EQ(p.delivered_kw(0, 0), 5.0);
  EXPECT_EQ(p.residual_kw, 0.0);
  EXPECT_EQ(p.status, PlanStatus::exact);
}

TEST(SolveAllocation, GreedyFillsAscendingIdThenStep) {
  const auto a = make_allocation({{1, 2}, {3, 1}}, {{5, 5}, {5, 5}}, 4.5);
  const auto p = solve(a, {AllocationPolicy::greedy_cheapest_first});
  EXPECT_EQ(p.occupants, (std::vector<std::string>{"occ-1", "occ-2"}));
  EXPECT_EQ(p.delivered_kw(0, 0), 1.0);
  EXPECT_EQ(p.delivered_kw(0, 1), 2.0);
  EXPECT_EQ(p.delivered_kw(1, 0), 1.5);
  EXPECT_EQ(p.delivered_kw(1, 1), 0.0);
  EXPECT_EQ(p.objective, 0.0);
}

TEST(SolveAllocation, PerStepModeMatchesEachStep) {
  const auto a = make_allocation({{2, 2}, {2, 0.5}}, {{5, 5}, {5, 5}}, 3.0);
  const auto p = solve(a, {AllocationPolicy::proportional, ObjectiveMode::per_step});
  EXPECT_NEAR(p.delivered_kw(0, 0) + p.delivered_kw(1, 0), 3.0, 1e-12);
  EXPECT_EQ(p.delivered_kw(0, 1), 2.0);
  EXPECT_EQ(p.delivered_kw(1, 1), 0.5);
  EXPECT_NEAR(p.objective, 0.25, 1e-12);
  EXPECT_EQ(p.status, PlanStatus::shortfall);
}

TEST(SolveAllocation, ObjectiveMatchesGridOracle) {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = fixture::random_allocation(rng, trial % 2 == 0);
    for (auto mode : {ObjectiveMode::event_total, ObjectiveMode::per_step}) {
      for (auto policy : {AllocationPolicy::proportional, AllocationPolicy::greedy_cheapest_first}) {
        const auto p = solve(a, {policy, mode});
        expect_constraints(a, p);
        const double req = a.event.requested_power_kw;
        double closed = 0.0, grid = 0.0;
        if (mode == ObjectiveMode::event_total) {
          closed = std::pow(std::max(0.0, req - capacity(a)), 2);
          std::vector<double> flat;
          for (const auto& row : a.caps) flat.insert(flat.end(), row.begin(), row.end());
          grid = oracle::grid_min_event_total(flat, req, 0.05);
        } else {
          for (std::size_t t = 0; t < a.caps.front().size(); ++t) {
            std::vector<double> col;
            double c = 0.0;
            for (const auto& row : a.caps) {
              col.push_back(row[t]);
              c += row[t];
            }
            closed += std::pow(std::max(0.0, req - c), 2);
            grid += oracle::grid_min_event_total(col, req, 0.05);
          }
        }
        const double tol = 1e-9 * std::max(1.0, req * req);
        EXPECT_NEAR(p.objective, closed, tol);
        EXPECT_NEAR(p.objective, allocation_objective(p.delivered_kw, req, mode), tol);
        // no grid point beats the plan; on-grid fixtures contain the optimum
        EXPECT_LE(p.objective, grid + tol);
        if (trial % 2 == 0) {
          EXPECT_NEAR(p.objective, grid, tol) << trial;
        }
      }
    }
  }
}

TEST(SolveAllocation, StatusFollowsResidualTolerance) {
  std::mt19937_64 rng(506);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = fixture::random_allocation(rng, false);
    const auto p = solve(a);
    const bool exact = std::abs(p.residual_kw) <= 1e-9 * std::max(1.0, a.event.requested_power_kw);
    EXPECT_EQ(p.status == PlanStatus::exact, exact);
  }
}

TEST(SolveAllocation, ProportionalScaleEquivariant) {
  std::mt19937_64 rng(507);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = fixture::random_allocation(rng, false);
    for (double c : {0.001, 0.7, 3.0, 1000.0}) {
      auto b = a;
      b.event.requested_power_kw *= c;
      for (auto& k : b.contracts)
        for (auto& v : k.max_flex_kw) v *= c;
      for (auto& f : b.forecasts)
        for (auto& v : f.available_flex_kw) v *= c;
      const auto pa = solve(a), pb = solve(b);
      for (std::size_t i = 0; i < pa.delivered_kw.rows(); ++i)
        for (std::size_t t = 0; t < pa.steps(); ++t)
          EXPECT_LE(std::abs(pb.delivered_kw(i, t) - c * pa.delivered_kw(i, t)), 1e-9 * c * pa.delivered_kw(i, t));
    }
  }
}

TEST(SolveAllocation, DeterministicBitIdentical) {
  std::mt19937_64 rng(508);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = fixture::random_allocation(rng, false);
    EXPECT_EQ(solve(a), solve(a));
  }
}

TEST(SolveAllocation, InactiveContractsIgnored) {
  auto a = make_allocation({{2}, {2}}, {{5}, {5}}, 3.0);
  a.contracts[1].active = false;
  const auto p = solve(a);
  EXPECT_EQ(p.occupants, std::vector<std::string>{"occ-1"});
  EXPECT_EQ(p.delivered_kw(0, 0), 2.0);
}

TEST(SolveAllocation, Errors) {
  auto a = make_allocation({{2}}, {{5}}, 3.0);
  a.contracts[0].active = false;
  EXPECT_EQ(code_of([&] { solve(a); }), ErrorCode::NoActiveContracts);

  auto gap = make_allocation({{2, 2, 2}}, {{5, 5, 5}}, 3.0);
  gap.forecasts[0].available_flex_kw.resize(3);
  gap.forecasts[0].horizon_steps = 3;
  EXPECT_EQ(code_of([&] { solve(gap); }), ErrorCode::ForecastGap);

  auto missing = make_allocation({{2}}, {{5}}, 3.0);
  missing.forecasts.clear();
  EXPECT_EQ(code_of([&] { solve(missing); }), ErrorCode::ForecastGap);

  auto grid = make_allocation({{2}}, {{5}}, 3.0);
  grid.forecasts[0].step_s = 600;
  EXPECT_EQ(code_of([&] { solve(grid); }), ErrorCode::InconsistentSteps);

  auto caps = make_allocation({{2, 2}}, {{5, 5}}, 3.0);
  caps.contracts[0].max_flex_kw = {1, 2, 3};
  EXPECT_EQ(code_of([&] { solve(caps); }), ErrorCode::InconsistentSteps);

  auto dir = make_allocation({{2}}, {{5}}, 3.0);
  dir.forecasts[0].direction = FlexDirection::upward;
  EXPECT_EQ(code_of([&] { solve(dir); }), ErrorCode::DirectionMismatch);

  auto off = make_allocation({{2}}, {{5}}, 3.0);
  off.event.start_time += 60;
  EXPECT_EQ(code_of([&] { solve(off); }), ErrorCode::InconsistentSteps);

  auto zero = make_allocation({{2}}, {{5}}, 0.0);
  EXPECT_EQ(code_of([&] { validate_event(zero.event); }), ErrorCode::InvalidParameters);
}

TEST(Feasibility, BindingConstraint) {
  const auto a = make_allocation({{2}, {3}, {2}}, {{3}, {1}, {2}}, 4.0);
  const auto r = feasibility_report(a.event, a.contracts, a.forecasts);
  EXPECT_EQ(r.binding[0][0], Binding::contract);
  EXPECT_EQ(r.cap_kw(0, 0), 2.0);
  EXPECT_EQ(r.binding[1][0], Binding::availability);
  EXPECT_EQ(r.cap_kw(1, 0), 1.0);
  EXPECT_EQ(r.binding[2][0], Binding::contract);  // ties bind on the contract
  EXPECT_EQ(r.step_capacity_kw, std::vector<double>{5.0});
  EXPECT_EQ(r.total_capacity_kw, 5.0);
  EXPECT_EQ(r.max_deliverable_kw, 4.0);
}

TEST(Feasibility, CapacityMatchesSummation) {
  std::mt19937_64 rng(509);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = fixture::random_allocation(rng, false);
    for (auto mode : {ObjectiveMode::event_total, ObjectiveMode::per_step}) {
      const auto r = feasibility_report(a.event, a.contracts, a.forecasts, mode);
      double total = 0.0;
      for (std::size_t t = 0; t < a.caps.front().size(); ++t) {
        double c = 0.0;
        for (const auto& row : a.caps) c += row[t];
        EXPECT_NEAR(r.step_capacity_kw[t], c, 1e-12);
        EXPECT_EQ(r.step_shortfall[t], c < a.event.requested_power_kw);
        total += c;
      }
      EXPECT_NEAR(r.total_capacity_kw, total, 1e-12);
    }
  }
}

namespace {

MeteredActuals actuals_from(const AllocationPlan& p, auto&& value) {
  MeteredActuals m{p.occupants, p.start_step, p.steps(), {}};
  for (std::size_t i = 0; i < p.occupants.size(); ++i)
    for (std::size_t t = 0; t < p.steps(); ++t) m.values.push_back(value(i, t));
  return m;
}

}  // namespace

TEST(Fulfillment, ActualEqualsPlanned) {
  const auto p = solve(make_allocation({{2, 1}, {1, 3}}, {{5, 5}, {5, 5}}, 4.0));
  const auto r = track_fulfillment(p, actuals_from(p, [&](auto i, auto t) { return p.delivered_kw(i, t); }));
  for (const auto& s : r.steps) EXPECT_EQ(s.deviation_kw, 0.0);
  EXPECT_EQ(r.total_deviation_kw, 0.0);
  EXPECT_EQ(r.missing_readings, 0u);
}

TEST(Fulfillment, OccupantDeliversNothing) {
  const auto p = solve(make_allocation({{2, 1}, {1, 3}}, {{5, 5}, {5, 5}}, 4.0));
  const auto r = track_fulfillment(p, actuals_from(p, [&](auto i, auto t) {
    return i == 1 ? 0.0 : p.delivered_kw(i, t);
  }));
  double planned1 = 0.0;
  for (std::size_t t = 0; t < p.steps(); ++t) planned1 += p.delivered_kw(1, t);
  EXPECT_NEAR(r.occupants[1].deviation_kw, -planned1, 1e-12);
  EXPECT_NEAR(r.total_deviation_kw, -planned1, 1e-12);
  EXPECT_EQ(r.occupants[0].deviation_kw, 0.0);
}

TEST(Fulfillment, RandomActualsMatchSummationAndSkipMissing) {
  std::mt19937_64 rng(510);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::bernoulli_distribution miss(0.15);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = fixture::random_allocation(rng, false);
    const auto p = solve(a);
    const auto m = actuals_from(p, [&](auto, auto) -> std::optional<double> {
      if (miss(rng)) return std::nullopt;
      return u(rng);
    });
    const auto r = track_fulfillment(p, m);
    double total = 0.0;
    std::size_t missing = 0;
    for (std::size_t t = 0; t < p.steps(); ++t) {
      double actual = 0.0, dev = 0.0, planned = 0.0;
      std::size_t step_missing = 0;
      for (std::size_t i = 0; i < p.occupants.size(); ++i) {
        planned += p.delivered_kw(i, t);
        if (auto v = m.at(i, t)) {
          actual += *v;
          dev += *v - p.delivered_kw(i, t);
          ASSERT_NEAR(*r.deviation_kw[i * p.steps() + t], *v - p.delivered_kw(i, t), 1e-12);
        } else {
          ++step_missing;
          ASSERT_FALSE(r.deviation_kw[i * p.steps() + t]);
        }
      }
      EXPECT_NEAR(r.steps[t].actual_kw, actual, 1e-12);
      EXPECT_NEAR(r.steps[t].planned_kw, planned, 1e-12);
      EXPECT_NEAR(r.steps[t].deviation_kw, dev, 1e-12);
      EXPECT_EQ(r.steps[t].missing, step_missing);
      EXPECT_EQ(r.steps[t].timestamp, p.step_time(t));
      total += dev;
      missing += step_missing;
    }
    EXPECT_NEAR(r.total_deviation_kw, total, 1e-12);
    EXPECT_EQ(r.missing_readings, missing);
  }
}

TEST(Fulfillment, GridMismatch) {
  const auto p = solve(make_allocation({{2, 1}}, {{5, 5}}, 2.0));
  auto m = actuals_from(p, [](auto, auto) { return 1.0; });
  m.start_step += 1;
  EXPECT_EQ(code_of([&] { track_fulfillment(p, m); }), ErrorCode::GridMismatch);
  auto other = actuals_from(p, [](auto, auto) { return 1.0; });
  other.occupants = {"someone-else"};
  EXPECT_EQ(code_of([&] { track_fulfillment(p, other); }), ErrorCode::GridMismatch);
}

TEST(AllocationCsv, PlanAndActualsFormats) {
  const auto p = solve(make_allocation({{2, 1}, {1, 3}}, {{5, 5}, {5, 5}}, 4.0),
                       {AllocationPolicy::greedy_cheapest_first});
  EXPECT_EQ(format_plan_csv(p),
            "occupant_id,2021-07-14T12:00:00Z,2021-07-14T12:15:00Z\n"
            "occ-1,2,1\n"
            "occ-2,1,0\n");
  auto m = actuals_from(p, [&](auto i, auto t) -> std::optional<double> {
    if (i == 1 && t == 1) return std::nullopt;
    return p.delivered_kw(i, t) * 0.5;
  });
  const auto text = format_actuals_csv(m, p.step_s);
  EXPECT_EQ(parse_actuals_csv(text, p), m);
  EXPECT_EQ(code_of([&] { parse_actuals_csv("occupant_id,timestamp,actual_kw\nocc-1,2021-07-14T12:05:00Z,1\n", p); }),
            ErrorCode::GridMismatch);
  EXPECT_EQ(code_of([&] { parse_actuals_csv("who,when\n", p); }), ErrorCode::MalformedRow);
  const auto report = format_fulfillment_csv(track_fulfillment(p, m));
  EXPECT_EQ(report.substr(0, report.find('\n')), "step,timestamp,requested_kw,planned_kw,actual_kw,deviation_kw,missing");
}
