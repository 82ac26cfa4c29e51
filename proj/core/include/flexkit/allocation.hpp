#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flexkit/hvac.hpp"
#include "flexkit/matrix.hpp"
#include "flexkit/time_utils.hpp"

namespace flexkit {

enum class EventDirection { reduce, increase };
std::string_view to_string(EventDirection d) noexcept;
std::optional<EventDirection> parse_event_direction(std::string_view text) noexcept;

/// A DR request: deliver `requested_power_kw` over `[start_time, start_time + duration_s)`.
struct DrEvent {
  std::string event_id;
  EventDirection direction = EventDirection::reduce;
  double requested_power_kw = 0.0;
  EpochSeconds start_time = 0;
  std::int64_t duration_s = 0;
  std::int64_t step_s = 900;
  EpochSeconds notice_deadline = 0;

  std::int64_t start_step() const noexcept { return floor_div(start_time, step_s); }
  std::size_t duration_steps() const noexcept {
    return step_s > 0 ? static_cast<std::size_t>(duration_s / step_s) : 0;
  }

  bool operator==(const DrEvent&) const = default;
};

/// Throws `InvalidParameters` for a non-positive request or empty window and
/// `InconsistentSteps` when start or duration are off the step grid.
void validate_event(const DrEvent& event);

struct Contract {
  std::string occupant_id;
  std::string device_id;  // empty means the occupant id
  /// Either one value for every step or one value per event step.
  std::vector<double> max_flex_kw;
  double baseline_set_temp_c = 24.0;
  double flex_set_temp_c = 26.0;
  bool active = true;
  /// Stored with the contract; not part of the allocation objective.
  std::string compensation_terms;

  const std::string& device() const noexcept { return device_id.empty() ? occupant_id : device_id; }
  bool operator==(const Contract&) const = default;
};

enum class AllocationPolicy { proportional, greedy_cheapest_first };
enum class ObjectiveMode { event_total, per_step };

std::string_view to_string(AllocationPolicy p) noexcept;
std::string_view to_string(ObjectiveMode m) noexcept;
std::optional<AllocationPolicy> parse_allocation_policy(std::string_view text) noexcept;
std::optional<ObjectiveMode> parse_objective_mode(std::string_view text) noexcept;

struct AllocationOptions {
  AllocationPolicy policy = AllocationPolicy::proportional;
  ObjectiveMode mode = ObjectiveMode::event_total;

  bool operator==(const AllocationOptions&) const = default;
};

enum class PlanStatus { exact, shortfall };
std::string_view to_string(PlanStatus s) noexcept;

struct AllocationPlan {
  std::string event_id;
  std::vector<std::string> occupants;  // ascending
  std::int64_t start_step = 0;
  std::int64_t step_s = 900;
  double requested_power_kw = 0.0;
  AllocationOptions options;
  Matrix delivered_kw;  // occupants x steps
  std::vector<double> step_residual_kw;
  double residual_kw = 0.0;
  double objective = 0.0;
  PlanStatus status = PlanStatus::exact;

  std::size_t steps() const noexcept { return delivered_kw.cols(); }
  EpochSeconds step_time(std::size_t j) const noexcept {
    return (start_step + static_cast<std::int64_t>(j)) * step_s;
  }
  double total_delivered_kw() const;
  std::vector<double> step_totals_kw() const;

  bool operator==(const AllocationPlan&) const = default;
};

enum class Binding { contract, availability };
std::string_view to_string(Binding b) noexcept;

struct FeasibilityReport {
  std::vector<std::string> occupants;
  Matrix contract_kw;
  Matrix available_kw;
  Matrix cap_kw;
  std::vector<std::vector<Binding>> binding;  // [occupant][step]
  std::vector<double> step_capacity_kw;
  std::vector<bool> step_shortfall;           // capacity below the request
  double total_capacity_kw = 0.0;
  double max_deliverable_kw = 0.0;            // min(request, capacity) for the plan's objective
};

/// cap[i, t] = min(contract, forecast) over active contracts. Ties bind on
/// the contract. Errors match `solve_allocation`.
FeasibilityReport feasibility_report(const DrEvent& event, std::span<const Contract> contracts,
                                     std::span<const FlexibilityForecast> forecasts,
                                     ObjectiveMode mode = ObjectiveMode::event_total);

/// Minimizes (P_DR - sum P_del)^2 subject to 0 <= P_del <= cap.
///
/// In `event_total` mode the square couples every occupant and step; in
/// `per_step` mode each step is matched to P_DR separately. The optimum
/// delivers min(P_DR, capacity). When capacity exceeds the request the
/// optimum is not unique and the policy picks one: `proportional` scales
/// every cap by P_DR / capacity, `greedy_cheapest_first` fills occupants in
/// ascending id and then step order. Throws `NoActiveContracts`,
/// `ForecastGap`, `InconsistentSteps` or `DirectionMismatch`.
AllocationPlan solve_allocation(const DrEvent& event, std::span<const Contract> contracts,
                                std::span<const FlexibilityForecast> forecasts, const AllocationOptions& options = {});

/// Objective of an arbitrary allocation under the plan's mode.
double allocation_objective(const Matrix& delivered_kw, double requested_power_kw, ObjectiveMode mode);

/// Metered delivery aligned with a plan; empty entries are missing readings.
struct MeteredActuals {
  std::vector<std::string> occupants;
  std::int64_t start_step = 0;
  std::size_t steps = 0;
  std::vector<std::optional<double>> values;  // occupants x steps, row-major

  bool operator==(const MeteredActuals&) const = default;

  std::optional<double> at(std::size_t occupant, std::size_t step) const { return values[occupant * steps + step]; }
};

struct StepFulfillment {
  EpochSeconds timestamp = 0;
  double requested_kw = 0.0;
  double planned_kw = 0.0;
  double actual_kw = 0.0;     // sum over occupants with readings
  double deviation_kw = 0.0;  // actual - planned over occupants with readings
  std::size_t missing = 0;
};

struct OccupantFulfillment {
  std::string occupant_id;
  double planned_kw = 0.0;
  double actual_kw = 0.0;
  double deviation_kw = 0.0;
  std::size_t missing = 0;
};

struct FulfillmentReport {
  std::string event_id;
  std::vector<StepFulfillment> steps;
  std::vector<OccupantFulfillment> occupants;
  std::vector<std::optional<double>> deviation_kw;  // occupants x steps
  double total_deviation_kw = 0.0;
  std::size_t missing_readings = 0;
};

/// deviation = actual - planned per cell; missing readings are reported
/// and excluded from sums, never imputed. Throws `GridMismatch` if the
/// occupants or step window differ from the plan.
FulfillmentReport track_fulfillment(const AllocationPlan& plan, const MeteredActuals& metered);

/// Per-step request as shown next to the plan: P_DR in per-step mode, P_DR
/// spread evenly over the steps in event-total mode.
double requested_per_step_kw(const AllocationPlan& plan);

/// `occupant_id,<step timestamps...>` matrix of delivered kW.
std::string format_plan_csv(const AllocationPlan& plan);
/// `step,timestamp,requested_kw,planned_kw,actual_kw,deviation_kw,missing`
std::string format_fulfillment_csv(const FulfillmentReport& report);
/// Long format `occupant_id,timestamp,actual_kw`; empty `actual_kw` marks a missing reading.
MeteredActuals parse_actuals_csv(std::string_view text, const AllocationPlan& plan);
std::string format_actuals_csv(const MeteredActuals& actuals, std::int64_t step_s);

}  // namespace flexkit
