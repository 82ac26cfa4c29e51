#pragma once

#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "flexkit/allocation.hpp"
#include "flexkit/baseline.hpp"
#include "flexkit/hvac.hpp"
#include "flexkit/spectral.hpp"
#include "flexkit/timeseries.hpp"

namespace flexkit {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kApiVersion = "1.0";

/// Structured documents shared by the CLI (`--output document`), the
/// store and the HTTP API. Readers throw `BadRequest` on a malformed
/// document.

Json to_document(const SpectralReport& report);
Json to_document(const BaselineSet& baselines);
BaselineSet baselines_from_document(const Json& doc);
Json to_document(const FlexibilityBand& band, const BaselineSet& baselines);
Json to_document(const FlexibilityForecast& forecast);
FlexibilityForecast forecast_from_document(const Json& doc);
Json model_summary_document(const HvacModelPair& model);

/// Wire format `{event_id, direction, requested_power_kw, start_time,
/// duration_s, step_s, notice_deadline}` with RFC 3339 timestamps.
Json to_document(const DrEvent& event);
DrEvent event_from_document(const Json& doc);

Json to_document(const Contract& contract);
Contract contract_from_document(const Json& doc);

Json to_document(const AllocationPlan& plan);
AllocationPlan plan_from_document(const Json& doc);
Json to_document(const FeasibilityReport& report);
Json to_document(const FulfillmentReport& report);

Json to_document(const MeteredActuals& actuals, std::int64_t step_s);
/// Accepts `{"actuals": [{occupant_id, timestamp, actual_kw|null}, ...]}` aligned to `plan`.
MeteredActuals actuals_from_document(const Json& doc, const AllocationPlan& plan);

/// Pretty-printed with a trailing newline; stable across runs.
std::string dump_document(const Json& doc);

}  // namespace flexkit
