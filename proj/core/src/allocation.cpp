#include "flexkit/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "flexkit/csv.hpp"
#include "flexkit/error.hpp"
#include "flexkit/number_format.hpp"

namespace flexkit {

std::string_view to_string(EventDirection d) noexcept { return d == EventDirection::reduce ? "reduce" : "increase"; }

std::optional<EventDirection> parse_event_direction(std::string_view text) noexcept {
  if (text == "reduce") return EventDirection::reduce;
  if (text == "increase") return EventDirection::increase;
  return std::nullopt;
}

std::string_view to_string(AllocationPolicy p) noexcept {
  return p == AllocationPolicy::proportional ? "proportional" : "greedy_cheapest_first";
}

std::string_view to_string(ObjectiveMode m) noexcept { return m == ObjectiveMode::event_total ? "event_total" : "per_step"; }

std::optional<AllocationPolicy> parse_allocation_policy(std::string_view text) noexcept {
  if (text == "proportional") return AllocationPolicy::proportional;
  if (text == "greedy_cheapest_first" || text == "greedy") return AllocationPolicy::greedy_cheapest_first;
  return std::nullopt;
}

std::optional<ObjectiveMode> parse_objective_mode(std::string_view text) noexcept {
  if (text == "event_total") return ObjectiveMode::event_total;
  if (text == "per_step") return ObjectiveMode::per_step;
  return std::nullopt;
}

std::string_view to_string(PlanStatus s) noexcept { return s == PlanStatus::exact ? "exact" : "shortfall"; }
std::string_view to_string(Binding b) noexcept { return b == Binding::contract ? "contract" : "availability"; }

void validate_event(const DrEvent& event) {
  if (!(event.requested_power_kw > 0.0) || !std::isfinite(event.requested_power_kw))
    throw Error(ErrorCode::InvalidParameters, "requested_power_kw must be positive");
  if (event.step_s <= 0) throw Error(ErrorCode::InconsistentSteps, "step_s must be positive");
  if (event.duration_s < event.step_s) throw Error(ErrorCode::InvalidParameters, "event must last at least one step");
  if (event.duration_s % event.step_s != 0)
    throw Error(ErrorCode::InconsistentSteps, "duration_s is not a multiple of step_s");
  if (floor_mod(event.start_time, event.step_s) != 0)
    throw Error(ErrorCode::InconsistentSteps, "start_time is not aligned to step_s");
}

double AllocationPlan::total_delivered_kw() const {
  double total = 0.0;
  for (double v : delivered_kw.data()) total += v;
  return total;
}

std::vector<double> AllocationPlan::step_totals_kw() const {
  std::vector<double> totals(steps(), 0.0);
  for (std::size_t i = 0; i < delivered_kw.rows(); ++i)
    for (std::size_t t = 0; t < steps(); ++t) totals[t] += delivered_kw(i, t);
  return totals;
}

namespace {

FlexDirection forecast_direction(EventDirection d) {
  return d == EventDirection::reduce ? FlexDirection::downward : FlexDirection::upward;
}

struct CapTable {
  std::vector<std::string> occupants;
  Matrix contract;
  Matrix available;
};

CapTable build_caps(const DrEvent& event, std::span<const Contract> contracts,
                    std::span<const FlexibilityForecast> forecasts) {
  validate_event(event);
  const std::size_t steps = event.duration_steps();
  const std::int64_t first = event.start_step();

  std::vector<const Contract*> active;
  for (const auto& c : contracts)
    if (c.active) active.push_back(&c);
  if (active.empty()) throw Error(ErrorCode::NoActiveContracts, "no active contracts");
  std::stable_sort(active.begin(), active.end(),
                   [](const Contract* a, const Contract* b) { return a->occupant_id < b->occupant_id; });
  for (std::size_t i = 1; i < active.size(); ++i)
    if (active[i]->occupant_id == active[i - 1]->occupant_id)
      throw Error(ErrorCode::InvalidParameters, "duplicate active contract for occupant " + active[i]->occupant_id);

  CapTable table;
  table.contract = Matrix(active.size(), steps);
  table.available = Matrix(active.size(), steps);
  const FlexDirection want = forecast_direction(event.direction);

  for (std::size_t i = 0; i < active.size(); ++i) {
    const Contract& c = *active[i];
    table.occupants.push_back(c.occupant_id);
    if (c.max_flex_kw.size() != 1 && c.max_flex_kw.size() != steps)
      throw Error(ErrorCode::InconsistentSteps,
                  "contract " + c.occupant_id + " has " + std::to_string(c.max_flex_kw.size()) + " caps for " +
                      std::to_string(steps) + " steps");
    for (std::size_t t = 0; t < steps; ++t) {
      const double cap = c.max_flex_kw.size() == 1 ? c.max_flex_kw[0] : c.max_flex_kw[t];
      if (!std::isfinite(cap) || cap < 0.0)
        throw Error(ErrorCode::InvalidParameters, "contract " + c.occupant_id + " has an invalid cap");
      table.contract(i, t) = cap;
    }

    const FlexibilityForecast* chosen = nullptr;
    bool wrong_direction = false;
    bool wrong_step = false;
    for (const auto& f : forecasts) {
      if (f.device_id != c.device()) continue;
      if (f.step_s != event.step_s) {
        wrong_step = true;
        continue;
      }
      if (f.direction != want) {
        wrong_direction = true;
        continue;
      }
      const std::int64_t offset = first - f.start_step();
      if (offset < 0 || offset + static_cast<std::int64_t>(steps) > static_cast<std::int64_t>(f.available_flex_kw.size()))
        continue;
      chosen = &f;
      break;
    }
    if (chosen == nullptr) {
      if (wrong_step) throw Error(ErrorCode::InconsistentSteps, "forecast step differs for device " + c.device());
      if (wrong_direction)
        throw Error(ErrorCode::DirectionMismatch, "no " + std::string(to_string(want)) + " forecast for device " + c.device());
      throw Error(ErrorCode::ForecastGap, "forecast does not cover the event for device " + c.device());
    }
    const auto offset = static_cast<std::size_t>(first - chosen->start_step());
    for (std::size_t t = 0; t < steps; ++t) {
      const double avail = chosen->available_flex_kw[offset + t];
      if (!std::isfinite(avail)) throw Error(ErrorCode::ForecastGap, "non-finite availability for " + c.device());
      table.available(i, t) = std::max(0.0, avail);
    }
  }
  return table;
}

Matrix cap_matrix(const CapTable& table) {
  Matrix cap(table.contract.rows(), table.contract.cols());
  for (std::size_t i = 0; i < cap.rows(); ++i)
    for (std::size_t t = 0; t < cap.cols(); ++t) cap(i, t) = std::min(table.contract(i, t), table.available(i, t));
  return cap;
}

// Fills `cells` of `out` from `cap` to meet `target`.
void fill(const Matrix& cap, Matrix& out, const std::vector<std::pair<std::size_t, std::size_t>>& cells, double target,
          AllocationPolicy policy) {
  double capacity = 0.0;
  for (auto [i, t] : cells) capacity += cap(i, t);
  if (target >= capacity) {
    for (auto [i, t] : cells) out(i, t) = cap(i, t);
    return;
  }
  if (policy == AllocationPolicy::proportional) {
    const double ratio = std::min(1.0, target / capacity);
    for (auto [i, t] : cells) out(i, t) = cap(i, t) * ratio;
    return;
  }
  double remaining = target;
  for (auto [i, t] : cells) {
    const double take = std::clamp(remaining, 0.0, cap(i, t));
    out(i, t) = take;
    remaining -= take;
  }
}

}  // namespace

FeasibilityReport feasibility_report(const DrEvent& event, std::span<const Contract> contracts,
                                     std::span<const FlexibilityForecast> forecasts, ObjectiveMode mode) {
  CapTable table = build_caps(event, contracts, forecasts);
  FeasibilityReport report;
  report.cap_kw = cap_matrix(table);
  const std::size_t n = table.occupants.size();
  const std::size_t steps = report.cap_kw.cols();
  report.binding.assign(n, std::vector<Binding>(steps, Binding::contract));
  report.step_capacity_kw.assign(steps, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < steps; ++t) {
      if (table.available(i, t) < table.contract(i, t)) report.binding[i][t] = Binding::availability;
      report.step_capacity_kw[t] += report.cap_kw(i, t);
    }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < steps; ++t) total += report.cap_kw(i, t);
  report.total_capacity_kw = total;
  for (double c : report.step_capacity_kw) report.step_shortfall.push_back(c < event.requested_power_kw);
  if (mode == ObjectiveMode::event_total) {
    report.max_deliverable_kw = std::min(event.requested_power_kw, total);
  } else {
    for (double c : report.step_capacity_kw) report.max_deliverable_kw += std::min(event.requested_power_kw, c);
  }
  report.occupants = std::move(table.occupants);
  report.contract_kw = std::move(table.contract);
  report.available_kw = std::move(table.available);
  return report;
}

double allocation_objective(const Matrix& delivered_kw, double requested_power_kw, ObjectiveMode mode) {
  if (mode == ObjectiveMode::event_total) {
    double total = 0.0;
    for (std::size_t i = 0; i < delivered_kw.rows(); ++i)
      for (std::size_t t = 0; t < delivered_kw.cols(); ++t) total += delivered_kw(i, t);
    const double r = requested_power_kw - total;
    return r * r;
  }
  double objective = 0.0;
  for (std::size_t t = 0; t < delivered_kw.cols(); ++t) {
    double step = 0.0;
    for (std::size_t i = 0; i < delivered_kw.rows(); ++i) step += delivered_kw(i, t);
    const double r = requested_power_kw - step;
    objective += r * r;
  }
  return objective;
}

AllocationPlan solve_allocation(const DrEvent& event, std::span<const Contract> contracts,
                                std::span<const FlexibilityForecast> forecasts, const AllocationOptions& options) {
  CapTable table = build_caps(event, contracts, forecasts);
  const Matrix cap = cap_matrix(table);
  const std::size_t n = cap.rows();
  const std::size_t steps = cap.cols();

  AllocationPlan plan;
  plan.event_id = event.event_id;
  plan.occupants = std::move(table.occupants);
  plan.start_step = event.start_step();
  plan.step_s = event.step_s;
  plan.requested_power_kw = event.requested_power_kw;
  plan.options = options;
  plan.delivered_kw = Matrix(n, steps);

  if (options.mode == ObjectiveMode::event_total) {
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < steps; ++t) cells.emplace_back(i, t);
    fill(cap, plan.delivered_kw, cells, event.requested_power_kw, options.policy);
  } else {
    for (std::size_t t = 0; t < steps; ++t) {
      std::vector<std::pair<std::size_t, std::size_t>> cells;
      for (std::size_t i = 0; i < n; ++i) cells.emplace_back(i, t);
      fill(cap, plan.delivered_kw, cells, event.requested_power_kw, options.policy);
    }
  }

  const std::vector<double> totals = plan.step_totals_kw();
  if (options.mode == ObjectiveMode::event_total) {
    double total = 0.0;
    for (double v : totals) total += v;
    plan.residual_kw = event.requested_power_kw - total;
    const double per_step = event.requested_power_kw / static_cast<double>(steps);
    for (double v : totals) plan.step_residual_kw.push_back(per_step - v);
  } else {
    for (double v : totals) {
      plan.step_residual_kw.push_back(event.requested_power_kw - v);
      plan.residual_kw += event.requested_power_kw - v;
    }
  }
  plan.objective = allocation_objective(plan.delivered_kw, event.requested_power_kw, options.mode);
  plan.status = std::abs(plan.residual_kw) <= 1e-9 * std::max(1.0, event.requested_power_kw) ? PlanStatus::exact
                                                                                              : PlanStatus::shortfall;
  return plan;
}

double requested_per_step_kw(const AllocationPlan& plan) {
  if (plan.options.mode == ObjectiveMode::per_step || plan.steps() == 0) return plan.requested_power_kw;
  return plan.requested_power_kw / static_cast<double>(plan.steps());
}

FulfillmentReport track_fulfillment(const AllocationPlan& plan, const MeteredActuals& metered) {
  if (metered.occupants != plan.occupants)
    throw Error(ErrorCode::GridMismatch, "metered occupants differ from the plan");
  if (metered.start_step != plan.start_step || metered.steps != plan.steps())
    throw Error(ErrorCode::GridMismatch, "metered step window differs from the plan");
  if (metered.values.size() != plan.occupants.size() * plan.steps())
    throw Error(ErrorCode::GridMismatch, "metered matrix has the wrong size");

  FulfillmentReport report;
  report.event_id = plan.event_id;
  const std::size_t n = plan.occupants.size();
  const std::size_t steps = plan.steps();
  const double requested = requested_per_step_kw(plan);
  report.deviation_kw.resize(n * steps);
  report.steps.resize(steps);
  report.occupants.resize(n);
  for (std::size_t t = 0; t < steps; ++t) {
    report.steps[t].timestamp = plan.step_time(t);
    report.steps[t].requested_kw = requested;
  }
  for (std::size_t i = 0; i < n; ++i) report.occupants[i].occupant_id = plan.occupants[i];

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < steps; ++t) {
      const double planned = plan.delivered_kw(i, t);
      auto& step = report.steps[t];
      auto& occ = report.occupants[i];
      step.planned_kw += planned;
      occ.planned_kw += planned;
      const auto actual = metered.at(i, t);
      if (!actual) {
        ++step.missing;
        ++occ.missing;
        ++report.missing_readings;
        continue;
      }
      if (!std::isfinite(*actual)) throw Error(ErrorCode::InvalidReading, "non-finite metered value");
      const double dev = *actual - planned;
      report.deviation_kw[i * steps + t] = dev;
      step.actual_kw += *actual;
      step.deviation_kw += dev;
      occ.actual_kw += *actual;
      occ.deviation_kw += dev;
      report.total_deviation_kw += dev;
    }
  return report;
}

std::string format_plan_csv(const AllocationPlan& plan) {
  std::string out = "occupant_id";
  for (std::size_t t = 0; t < plan.steps(); ++t) out += "," + format_rfc3339(plan.step_time(t));
  out += '\n';
  for (std::size_t i = 0; i < plan.occupants.size(); ++i) {
    out += plan.occupants[i];
    for (std::size_t t = 0; t < plan.steps(); ++t) out += "," + format_number(plan.delivered_kw(i, t));
    out += '\n';
  }
  return out;
}

std::string format_fulfillment_csv(const FulfillmentReport& report) {
  std::string out = "step,timestamp,requested_kw,planned_kw,actual_kw,deviation_kw,missing\n";
  for (std::size_t t = 0; t < report.steps.size(); ++t) {
    const auto& s = report.steps[t];
    out += std::to_string(t) + "," + format_rfc3339(s.timestamp) + "," + format_number(s.requested_kw) + "," +
           format_number(s.planned_kw) + "," + format_number(s.actual_kw) + "," + format_number(s.deviation_kw) + "," +
           std::to_string(s.missing) + "\n";
  }
  return out;
}

MeteredActuals parse_actuals_csv(std::string_view text, const AllocationPlan& plan) {
  MeteredActuals actuals;
  actuals.occupants = plan.occupants;
  actuals.start_step = plan.start_step;
  actuals.steps = plan.steps();
  actuals.values.assign(plan.occupants.size() * plan.steps(), std::nullopt);

  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < plan.occupants.size(); ++i) index.emplace(plan.occupants[i], i);

  const auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0]) != "occupant_id,timestamp,actual_kw")
    throw Error(ErrorCode::MalformedRow, "expected header occupant_id,timestamp,actual_kw");
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto fields = split_csv_fields(lines[ln]);
    const std::string where = "line " + std::to_string(ln + 1) + ": ";
    if (fields.size() != 3) throw Error(ErrorCode::MalformedRow, where + "expected 3 fields");
    auto it = index.find(trim(fields[0]));
    if (it == index.end()) throw Error(ErrorCode::GridMismatch, where + "occupant not in plan: " + std::string(fields[0]));
    const auto ts = parse_rfc3339(trim(fields[1]));
    if (!ts) throw Error(ErrorCode::MalformedRow, where + "bad timestamp");
    if (floor_mod(*ts, plan.step_s) != 0) throw Error(ErrorCode::GridMismatch, where + "timestamp off the plan grid");
    const std::int64_t step = floor_div(*ts, plan.step_s) - plan.start_step;
    if (step < 0 || step >= static_cast<std::int64_t>(plan.steps()))
      throw Error(ErrorCode::GridMismatch, where + "timestamp outside the event window");
    const auto value_text = trim(fields[2]);
    auto& cell = actuals.values[it->second * plan.steps() + static_cast<std::size_t>(step)];
    if (cell) throw Error(ErrorCode::DuplicateTimestamp, where + "duplicate reading");
    if (value_text.empty()) continue;
    const auto value = parse_number(value_text);
    if (!value) throw Error(ErrorCode::MalformedRow, where + "bad actual_kw");
    cell = *value;
  }
  return actuals;
}

std::string format_actuals_csv(const MeteredActuals& actuals, std::int64_t step_s) {
  std::string out = "occupant_id,timestamp,actual_kw\n";
  for (std::size_t i = 0; i < actuals.occupants.size(); ++i)
    for (std::size_t t = 0; t < actuals.steps; ++t) {
      const auto v = actuals.at(i, t);
      out += actuals.occupants[i] + "," + format_rfc3339((actuals.start_step + static_cast<std::int64_t>(t)) * step_s) +
             "," + (v ? format_number(*v) : std::string()) + "\n";
    }
  return out;
}

}  // namespace flexkit
