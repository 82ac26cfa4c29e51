#pragma once

#include <functional>
#include <map>
#include <shared_mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flexkit/allocation.hpp"
#include "flexkit/baseline.hpp"
#include "flexkit/documents.hpp"
#include "flexkit/hvac.hpp"
#include "flexkit/storage.hpp"

namespace flexkit {

/// Baseline computation for one asset-month as exposed by the CLI and API.
struct BaselineRequest {
  YearMonth month;
  std::optional<double> epsilon_wh = 500.0;  // unset: tuned from the k-distance curve
  std::size_t min_points = 5;
  double floor_wh = kDefaultLowLoadFloorWh;
  std::optional<double> ceiling_wh = kDefaultHighLoadCeilingWh;
  /// Cycle length; detected from the month's spectrum when unset.
  std::optional<double> period_s;
  MediumRule medium = MediumRule::median;
};

/// Throws `NotFound` when the series does not cover the month.
BaselineSet compute_baselines(const MeterSeries& series, const BaselineRequest& request);

/// Strongest period of the month's spectrum.
double detect_period_s(const MeterSeries& month_series);

enum class EventState { received, solved, published, active, completed, failed };
std::string_view to_string(EventState s) noexcept;
std::optional<EventState> parse_event_state(std::string_view text) noexcept;

struct Transition {
  EventState state = EventState::received;
  EpochSeconds at = 0;

  bool operator==(const Transition&) const = default;
};

/// received -> solved -> published -> active -> completed, with `failed`
/// reachable from every state before `completed`.
class EventLifecycle {
 public:
  static bool allowed(EventState from, EventState to) noexcept;

  explicit EventLifecycle(EpochSeconds received_at = 0) : transitions_{{EventState::received, received_at}} {}

  EventState state() const noexcept { return transitions_.back().state; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  /// Throws `InvalidTransition`.
  void advance(EventState to, EpochSeconds at);

  bool operator==(const EventLifecycle&) const = default;

 private:
  std::vector<Transition> transitions_;
};

Json to_document(const EventLifecycle& lifecycle);

/// Rebuilds every event's lifecycle from log entries
/// `{"event_id", "state", "at"}`; entries of other types are ignored.
std::map<std::string, EventLifecycle> replay_lifecycles(std::span<const Json> log);

struct VppConfig {
  double adjustment_fraction = kMaxAdjustmentFraction;
  std::vector<std::string> included_assets;  // empty: every building meter

  bool operator==(const VppConfig&) const = default;
};

Json to_document(const VppConfig& config);
/// Throws `FractionOutOfRange` unless 0 < fraction <= 0.10.
VppConfig vpp_config_from_document(const Json& doc);

/// HTTP status for an error code: 4xx for every domain error.
int http_status(ErrorCode code) noexcept;
/// `{"error": {"code", "message"}}`
Json error_document(ErrorCode code, std::string_view message);

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct ServiceOptions {
  std::optional<std::string> api_token;
  std::function<EpochSeconds()> clock;  // defaults to the system clock
  HvacTrainingConfig training;
  AllocationOptions allocation;
};

/// Transport-independent handler for the `/v1` API.
class Service {
 public:
  Service(Store& store, ServiceOptions options = {});

  Response handle(const Request& request);

  std::optional<EventLifecycle> lifecycle(std::string_view event_id) const;

 private:
  Response route(const Request& request);
  EpochSeconds now() const;
  void transition(const std::string& event_id, EventState to);
  Json event_document(const DrEvent& event) const;
  AllocationPlan solve(const DrEvent& event, const AllocationOptions& options) const;
  Json band_documents(const VppConfig& config) const;
  VppConfig vpp_config() const;

  Store& store_;
  ServiceOptions options_;
  std::map<std::string, EventLifecycle> lifecycles_;
  mutable std::shared_mutex mutex_;
};

}  // namespace flexkit
