#include "flexkit/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>

#include "flexkit/error.hpp"
#include "flexkit/number_format.hpp"
#include "flexkit/spectral.hpp"

namespace flexkit {

double detect_period_s(const MeterSeries& month_series) {
  MeterSeries filled = month_series.has_gaps() ? fill_gaps(month_series, GapPolicy::linear_interp) : month_series;
  const Spectrum spectrum = dft(filled);
  return dominant_periods(spectrum, 1).front().period_s;
}

BaselineSet compute_baselines(const MeterSeries& series, const BaselineRequest& request) {
  std::optional<MeterSeries> month;
  for (auto& [ym, piece] : split_by_month(series))
    if (ym == request.month) month = std::move(piece);
  if (!month) throw Error(ErrorCode::NotFound, "no data for month " + request.month.to_string());

  const double period = request.period_s ? *request.period_s : detect_period_s(*month);
  const SegmentationRule seg = segmentation_for_period(period, month->sampling_interval_s());

  BaselineOptions options;
  options.auto_epsilon = !request.epsilon_wh.has_value();
  if (request.epsilon_wh) options.dbscan.epsilon = *request.epsilon_wh;
  options.dbscan.min_points = request.min_points;
  options.low_load_floor_wh = request.floor_wh;
  options.high_load_ceiling_wh = request.ceiling_wh;
  options.medium = request.medium;
  return derive_baselines(*month, seg, options);
}

std::string_view to_string(EventState s) noexcept {
  switch (s) {
    case EventState::received: return "received";
    case EventState::solved: return "solved";
    case EventState::published: return "published";
    case EventState::active: return "active";
    case EventState::completed: return "completed";
    case EventState::failed: return "failed";
  }
  return "received";
}

std::optional<EventState> parse_event_state(std::string_view text) noexcept {
  for (auto s : {EventState::received, EventState::solved, EventState::published, EventState::active,
                 EventState::completed, EventState::failed})
    if (to_string(s) == text) return s;
  return std::nullopt;
}

bool EventLifecycle::allowed(EventState from, EventState to) noexcept {
  if (to == EventState::failed) return from != EventState::completed && from != EventState::failed;
  return static_cast<int>(to) == static_cast<int>(from) + 1 && from != EventState::completed &&
         from != EventState::failed;
}

void EventLifecycle::advance(EventState to, EpochSeconds at) {
  if (!allowed(state(), to))
    throw Error(ErrorCode::InvalidTransition,
                "cannot move from " + std::string(to_string(state())) + " to " + std::string(to_string(to)));
  transitions_.push_back({to, at});
}

Json to_document(const EventLifecycle& lifecycle) {
  Json doc;
  doc["state"] = to_string(lifecycle.state());
  Json transitions = Json::array();
  for (const auto& t : lifecycle.transitions())
    transitions.push_back({{"state", to_string(t.state)}, {"at", format_rfc3339(t.at)}});
  doc["transitions"] = std::move(transitions);
  return doc;
}

std::map<std::string, EventLifecycle> replay_lifecycles(std::span<const Json> log) {
  std::map<std::string, EventLifecycle> out;
  for (const auto& entry : log) {
    if (!entry.is_object() || entry.value("type", "") != "transition") continue;
    const auto id = entry.value("event_id", "");
    const auto state = parse_event_state(entry.value("state", ""));
    const auto at = parse_rfc3339(entry.value("at", ""));
    if (id.empty() || !state || !at) continue;
    if (*state == EventState::received) {
      out.insert_or_assign(id, EventLifecycle(*at));
    } else if (auto it = out.find(id); it != out.end()) {
      it->second.advance(*state, *at);
    }
  }
  return out;
}

Json to_document(const VppConfig& config) {
  Json doc;
  doc["adjustment_fraction"] = config.adjustment_fraction;
  doc["included_assets"] = config.included_assets;
  return doc;
}

VppConfig vpp_config_from_document(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::BadRequest, "config must be an object");
  VppConfig c;
  auto it = doc.find("adjustment_fraction");
  if (it == doc.end() || !it->is_number()) throw Error(ErrorCode::BadRequest, "adjustment_fraction must be a number");
  c.adjustment_fraction = it->get<double>();
  if (!(c.adjustment_fraction > 0.0 && c.adjustment_fraction <= kMaxAdjustmentFraction))
    throw Error(ErrorCode::FractionOutOfRange, "adjustment_fraction must be in (0, 0.10]");
  if (auto a = doc.find("included_assets"); a != doc.end() && !a->is_null()) {
    if (!a->is_array()) throw Error(ErrorCode::BadRequest, "included_assets must be an array");
    for (const auto& id : *a) {
      if (!id.is_string()) throw Error(ErrorCode::BadRequest, "included_assets must hold strings");
      c.included_assets.push_back(id.get<std::string>());
    }
  }
  std::sort(c.included_assets.begin(), c.included_assets.end());
  c.included_assets.erase(std::unique(c.included_assets.begin(), c.included_assets.end()), c.included_assets.end());
  return c;
}

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadRequest:
    case ErrorCode::MalformedRow: return 400;
    case ErrorCode::Unauthorized: return 401;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownAsset: return 404;
    case ErrorCode::Conflict:
    case ErrorCode::DuplicateAsset:
    case ErrorCode::DuplicateTimestamp:
    case ErrorCode::InvalidTransition:
    case ErrorCode::DeadlinePassed: return 409;
    case ErrorCode::StorageFailure: return 500;
    default: return 422;
  }
}

Json error_document(ErrorCode code, std::string_view message) {
  Json doc;
  doc["error"] = {{"code", to_string(code)}, {"message", message}};
  return doc;
}

namespace {

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = i;
    while (j < path.size() && path[j] != '/') ++j;
    if (j > i) out.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return out;
}

Response json_response(const Json& doc, int status = 200) { return {status, "application/json", dump_document(doc)}; }
Response csv_response(std::string body) { return {200, "text/csv", std::move(body)}; }

Json parse_body(const Request& r) {
  if (r.body.empty()) return Json::object();
  try {
    return Json::parse(r.body);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("body is not valid JSON: ") + e.what());
  }
}

std::optional<double> opt_number(const Json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw Error(ErrorCode::BadRequest, std::string(name) + " must be a number");
  return it->get<double>();
}

std::optional<std::int64_t> opt_int(const Json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) throw Error(ErrorCode::BadRequest, std::string(name) + " must be an integer");
  return it->get<std::int64_t>();
}

std::optional<std::string> opt_string(const Json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::BadRequest, std::string(name) + " must be a string");
  return it->get<std::string>();
}

YearMonth month_arg(std::string_view text) {
  auto m = YearMonth::parse(text);
  if (!m) throw Error(ErrorCode::BadRequest, "month must be YYYY-MM");
  return *m;
}

bool wants_csv(const Request& r) {
  auto it = r.query.find("format");
  return it != r.query.end() && it->second == "csv";
}

Response not_found(std::string_view what) {
  return json_response(error_document(ErrorCode::NotFound, what), 404);
}

}  // namespace

Service::Service(Store& store, ServiceOptions options) : store_(store), options_(std::move(options)) {
  const auto log = store_.read_log();
  lifecycles_ = replay_lifecycles(log);
}

EpochSeconds Service::now() const {
  if (options_.clock) return options_.clock();
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

std::optional<EventLifecycle> Service::lifecycle(std::string_view event_id) const {
  std::shared_lock lock(mutex_);
  auto it = lifecycles_.find(std::string(event_id));
  if (it == lifecycles_.end()) return std::nullopt;
  return it->second;
}

void Service::transition(const std::string& event_id, EventState to) {
  const EpochSeconds at = now();
  auto it = lifecycles_.find(event_id);
  if (to == EventState::received) {
    lifecycles_.insert_or_assign(event_id, EventLifecycle(at));
  } else {
    if (it == lifecycles_.end()) throw Error(ErrorCode::NotFound, "unknown event: " + event_id);
    it->second.advance(to, at);
  }
  store_.append_log({{"type", "transition"}, {"event_id", event_id}, {"state", to_string(to)}, {"at", format_rfc3339(at)}});
}

Json Service::event_document(const DrEvent& event) const {
  Json doc;
  doc["event"] = to_document(event);
  if (auto it = lifecycles_.find(event.event_id); it != lifecycles_.end()) doc["lifecycle"] = to_document(it->second);
  return doc;
}

AllocationPlan Service::solve(const DrEvent& event, const AllocationOptions& options) const {
  const auto contracts = store_.contracts();
  const auto forecasts = store_.forecasts();
  return solve_allocation(event, contracts, forecasts, options);
}

VppConfig Service::vpp_config() const {
  if (auto doc = store_.document("vpp_config")) return vpp_config_from_document(*doc);
  return {};
}

Json Service::band_documents(const VppConfig& config) const {
  Json bands = Json::array();
  for (const auto& asset : store_.assets()) {
    if (asset.kind != AssetKind::building_meter) continue;
    if (!config.included_assets.empty() &&
        !std::binary_search(config.included_assets.begin(), config.included_assets.end(), asset.asset_id))
      continue;
    for (const auto& month : store_.baseline_months(asset.asset_id)) {
      const auto baselines = store_.baselines(asset.asset_id, month);
      if (!baselines) continue;
      for (auto dir : {FlexDirection::downward, FlexDirection::upward}) {
        Json doc = to_document(flexibility_band(*baselines, dir, config.adjustment_fraction), *baselines);
        doc["asset_id"] = asset.asset_id;
        bands.push_back(std::move(doc));
      }
    }
  }
  return bands;
}

Response Service::handle(const Request& request) {
  try {
    const auto segments = split_path(request.path);
    const bool is_health = segments.size() == 2 && segments[0] == "v1" && segments[1] == "health";
    if (options_.api_token && !is_health) {
      auto it = request.headers.find("authorization");
      if (it == request.headers.end() || it->second != "Bearer " + *options_.api_token)
        return json_response(error_document(ErrorCode::Unauthorized, "missing or invalid bearer token"), 401);
    }
    const bool mutation = request.method != "GET" && request.method != "HEAD";
    if (!mutation) {
      std::shared_lock lock(mutex_);
      return route(request);
    }
    std::unique_lock lock(mutex_);
    std::optional<std::string> key;
    if (auto it = request.headers.find("idempotency-key"); it != request.headers.end() && !it->second.empty()) {
      key = request.method + " " + request.path + " " + it->second;
      if (auto cached = store_.idempotent_response(*key)) {
        const Json doc = Json::parse(*cached);
        return {doc.at("status").get<int>(), doc.at("content_type").get<std::string>(), doc.at("body").get<std::string>()};
      }
    }
    Response response = route(request);
    if (key && response.status < 500) {
      Json doc;
      doc["status"] = response.status;
      doc["content_type"] = response.content_type;
      doc["body"] = response.body;
      store_.put_idempotent_response(*key, doc.dump());
    }
    return response;
  } catch (const Error& e) {
    return json_response(error_document(e.code(), e.what()), http_status(e.code()));
  } catch (const std::exception& e) {
    Json doc;
    doc["error"] = {{"code", "Internal"}, {"message", e.what()}};
    return json_response(doc, 500);
  }
}

Response Service::route(const Request& r) {
  const auto seg = split_path(r.path);
  const auto& m = r.method;
  if (seg.empty() || seg[0] != "v1") return not_found("no such endpoint");
  const std::size_t n = seg.size();
  auto is = [&](std::initializer_list<const char*> parts) {
    if (parts.size() + 1 != n) return false;
    std::size_t i = 1;
    for (const char* p : parts) {
      if (*p != '*' && seg[i] != p) return false;
      ++i;
    }
    return true;
  };

  if (m == "GET" && is({"health"})) return json_response({{"status", "ok"}, {"api_version", kApiVersion}});

  // assets
  if (m == "GET" && is({"assets"})) {
    Json list = Json::array();
    for (const auto& a : store_.assets()) list.push_back(to_document(a));
    return json_response({{"assets", std::move(list)}});
  }
  if (m == "POST" && is({"assets"})) {
    const AssetRecord a = asset_from_document(parse_body(r));
    store_.create_asset(a);
    return json_response(to_document(a), 201);
  }
  if (m == "GET" && is({"assets", "*"})) return json_response(to_document(store_.asset(seg[2])));
  if (is({"assets", "*", "telemetry"})) {
    if (m == "POST") return json_response(to_document(store_.ingest_text(r.body, seg[2])));
    if (m == "GET") return csv_response(store_.export_csv(seg[2]));
  }
  if (m == "GET" && is({"assets", "*", "spectrum"})) {
    SpectralOptions options;
    if (auto it = r.query.find("whole_history"); it != r.query.end()) options.whole_history = it->second == "true";
    Json doc = to_document(analyze_periodicity(store_.meter_series(seg[2]), options));
    doc["asset_id"] = seg[2];
    return json_response(doc);
  }
  if (m == "POST" && is({"assets", "*", "baselines"})) {
    const Json body = parse_body(r);
    const auto month = opt_string(body, "month");
    if (!month) throw Error(ErrorCode::BadRequest, "month is required");
    BaselineRequest req;
    req.month = month_arg(*month);
    if (auto it = body.find("epsilon_wh"); it != body.end() && it->is_string()) {
      if (it->get<std::string>() != "auto") throw Error(ErrorCode::BadRequest, "epsilon_wh must be a number or \"auto\"");
      req.epsilon_wh.reset();
    } else if (auto eps = opt_number(body, "epsilon_wh")) {
      req.epsilon_wh = *eps;
    }
    if (auto k = opt_int(body, "min_points")) {
      if (*k < 2) throw Error(ErrorCode::InvalidParameters, "min_points must be at least 2");
      req.min_points = static_cast<std::size_t>(*k);
    }
    if (auto f = opt_number(body, "floor_wh")) req.floor_wh = *f;
    if (body.contains("ceiling_wh")) req.ceiling_wh = opt_number(body, "ceiling_wh");
    req.period_s = opt_number(body, "period_s");
    if (auto rule = opt_string(body, "medium_rule")) {
      auto parsed = parse_medium_rule(*rule);
      if (!parsed) throw Error(ErrorCode::BadRequest, "medium_rule must be median or mean");
      req.medium = *parsed;
    }
    const BaselineSet set = compute_baselines(store_.meter_series(seg[2]), req);
    store_.put_baselines(seg[2], set);
    return json_response(to_document(set), 201);
  }
  if (m == "GET" && is({"assets", "*", "baselines", "*"})) {
    store_.asset(seg[2]);
    const auto set = store_.baselines(seg[2], month_arg(seg[4]));
    if (!set) return not_found("no baselines for " + seg[2] + " " + seg[4]);
    return json_response(to_document(*set));
  }
  if (m == "GET" && is({"assets", "*", "band", "*"})) {
    store_.asset(seg[2]);
    const auto set = store_.baselines(seg[2], month_arg(seg[4]));
    if (!set) return not_found("no baselines for " + seg[2] + " " + seg[4]);
    FlexDirection dir = FlexDirection::downward;
    if (auto it = r.query.find("direction"); it != r.query.end()) {
      auto parsed = parse_flex_direction(it->second);
      if (!parsed) throw Error(ErrorCode::BadRequest, "direction must be upward or downward");
      dir = *parsed;
    }
    double fraction = vpp_config().adjustment_fraction;
    if (auto it = r.query.find("fraction"); it != r.query.end()) {
      auto parsed = parse_number(it->second);
      if (!parsed) throw Error(ErrorCode::BadRequest, "fraction must be a number");
      fraction = *parsed;
    }
    Json doc = to_document(flexibility_band(*set, dir, fraction), *set);
    if (wants_csv(r)) return csv_response(format_band_csv(flexibility_band(*set, dir, fraction)));
    doc["asset_id"] = seg[2];
    return json_response(doc);
  }
  if (m == "POST" && is({"assets", "*", "model"})) {
    const AssetRecord a = store_.asset(seg[2]);
    if (a.kind != AssetKind::hvac_unit) throw Error(ErrorCode::InvalidParameters, "asset is not an hvac unit");
    const Json body = parse_body(r);
    HvacTrainingConfig config = options_.training;
    if (auto seed = opt_int(body, "seed")) config.forest.seed = static_cast<std::uint64_t>(*seed);
    if (auto step = opt_int(body, "step_s")) config.training.step_s = *step;
    const auto samples = store_.hvac_samples(a.asset_id);
    HvacModelPair model = train_hvac_models(a.asset_id, *a.rated_power_kw, samples, config);
    model.created_by = "flexkitd";
    store_.put_model(model);
    return json_response(model_summary_document(model), 201);
  }
  if (m == "GET" && is({"assets", "*", "model"})) {
    store_.asset(seg[2]);
    const auto model = store_.model(seg[2]);
    if (!model) return not_found("no model for " + seg[2]);
    return json_response(model_summary_document(*model));
  }
  if (m == "POST" && is({"assets", "*", "forecast"})) {
    const AssetRecord a = store_.asset(seg[2]);
    const auto model = store_.model(a.asset_id);
    if (!model) return not_found("no model for " + a.asset_id);
    const Json body = parse_body(r);
    ForecastRequest req;
    req.device_id = a.asset_id;
    req.step_s = model->step_s;
    req.rated_power_kw = model->rated_power_kw;
    for (const auto& c : store_.contracts())
      if (c.device() == a.asset_id) {
        req.baseline_set_temp_c = c.baseline_set_temp_c;
        req.flex_set_temp_c = c.flex_set_temp_c;
      }
    if (auto v = opt_number(body, "baseline_set_temp_c")) req.baseline_set_temp_c = *v;
    if (auto v = opt_number(body, "flex_set_temp_c")) req.flex_set_temp_c = *v;
    if (auto v = opt_int(body, "horizon_steps")) {
      if (*v < 0) throw Error(ErrorCode::HorizonZero, "horizon_steps must be positive");
      req.horizon_steps = static_cast<std::size_t>(*v);
    }
    if (auto v = opt_string(body, "direction")) {
      auto parsed = parse_flex_direction(*v);
      if (!parsed) throw Error(ErrorCode::BadRequest, "direction must be upward or downward");
      req.direction = *parsed;
    }
    if (auto it = body.find("outdoor_forecast"); it != body.end() && it->is_array())
      for (const auto& v : *it) req.outdoor_forecast.push_back(v.get<double>());
    std::optional<EpochSeconds> at;
    if (auto v = opt_string(body, "at")) {
      at = parse_rfc3339(*v);
      if (!at) throw Error(ErrorCode::BadRequest, "at must be an RFC 3339 timestamp");
    }
    const auto samples = store_.hvac_samples(a.asset_id);
    const HvacSample origin = forecast_origin(samples, model->step_s, at);
    const FlexibilityForecast f = forecast_flexibility(model->thermal, model->state, origin, req);
    store_.put_forecast(f);
    return json_response(to_document(f), 201);
  }
  if (m == "GET" && is({"assets", "*", "forecast"})) {
    const auto f = store_.forecast(seg[2]);
    if (!f) return not_found("no forecast for " + seg[2]);
    return json_response(to_document(*f));
  }

  // contracts
  if (m == "GET" && is({"contracts"})) {
    Json list = Json::array();
    for (const auto& c : store_.contracts()) list.push_back(to_document(c));
    return json_response({{"contracts", std::move(list)}});
  }
  if (is({"contracts", "*"})) {
    if (m == "PUT") {
      Json body = parse_body(r);
      if (!body.contains("occupant_id")) body["occupant_id"] = seg[2];
      const Contract c = contract_from_document(body);
      if (c.occupant_id != seg[2]) throw Error(ErrorCode::BadRequest, "occupant_id does not match the path");
      store_.put_contract(c);
      return json_response(to_document(c));
    }
    if (m == "GET") {
      const auto c = store_.contract(seg[2]);
      if (!c) return not_found("no contract for " + seg[2]);
      return json_response(to_document(*c));
    }
  }

  // events
  if (m == "GET" && is({"events"})) {
    Json list = Json::array();
    for (const auto& e : store_.events()) list.push_back(event_document(e));
    return json_response({{"events", std::move(list)}});
  }
  if (m == "POST" && is({"events"})) {
    const DrEvent e = event_from_document(parse_body(r));
    if (!valid_id(e.event_id)) throw Error(ErrorCode::BadRequest, "invalid event_id");
    validate_event(e);
    if (store_.event(e.event_id)) throw Error(ErrorCode::Conflict, "event already exists: " + e.event_id);
    if (now() > e.notice_deadline)
      throw Error(ErrorCode::DeadlinePassed, "notice deadline " + format_rfc3339(e.notice_deadline) + " has passed");
    const AllocationPlan plan = solve(e, options_.allocation);
    store_.put_event(e);
    store_.put_plan(plan);
    transition(e.event_id, EventState::received);
    transition(e.event_id, EventState::solved);
    Json doc = event_document(e);
    doc["plan"] = to_document(plan);
    return json_response(doc, 201);
  }
  if (n >= 3 && seg[1] == "events") {
    const auto event = store_.event(seg[2]);
    if (!event) return not_found("unknown event: " + seg[2]);
    if (m == "GET" && is({"events", "*"})) return json_response(event_document(*event));
    if (m == "POST" && is({"events", "*", "solve"})) {
      const auto state = lifecycles_.at(event->event_id).state();
      if (state != EventState::received && state != EventState::solved)
        throw Error(ErrorCode::InvalidTransition, "plan is frozen once published");
      const Json body = parse_body(r);
      AllocationOptions options = options_.allocation;
      if (auto p = opt_string(body, "policy")) {
        auto parsed = parse_allocation_policy(*p);
        if (!parsed) throw Error(ErrorCode::BadRequest, "unknown policy");
        options.policy = *parsed;
      }
      if (auto p = opt_string(body, "objective_mode")) {
        auto parsed = parse_objective_mode(*p);
        if (!parsed) throw Error(ErrorCode::BadRequest, "unknown objective_mode");
        options.mode = *parsed;
      }
      const AllocationPlan plan = solve(*event, options);
      store_.put_plan(plan);
      if (state == EventState::received) transition(event->event_id, EventState::solved);
      Json doc = event_document(*event);
      doc["plan"] = to_document(plan);
      return json_response(doc);
    }
    if (m == "POST" && n == 4) {
      const auto target = parse_event_state(seg[3] == "publish"    ? "published"
                                            : seg[3] == "activate" ? "active"
                                            : seg[3] == "complete" ? "completed"
                                            : seg[3] == "fail"     ? "failed"
                                                                   : "");
      if (target) {
        transition(event->event_id, *target);
        return json_response(event_document(*event));
      }
    }
    if (m == "GET" && is({"events", "*", "plan"})) {
      const auto plan = store_.plan(event->event_id);
      if (!plan) return not_found("no plan for " + event->event_id);
      if (wants_csv(r)) return csv_response(format_plan_csv(*plan));
      return json_response(to_document(*plan));
    }
    if (m == "GET" && is({"events", "*", "feasibility"})) {
      const auto contracts = store_.contracts();
      const auto forecasts = store_.forecasts();
      return json_response(to_document(feasibility_report(*event, contracts, forecasts, options_.allocation.mode)));
    }
    if (m == "POST" && is({"events", "*", "actuals"})) {
      const auto state = lifecycles_.at(event->event_id).state();
      if (state != EventState::active && state != EventState::completed)
        throw Error(ErrorCode::Conflict, "actuals are accepted only for active or completed events");
      const auto plan = store_.plan(event->event_id);
      if (!plan) return not_found("no plan for " + event->event_id);
      auto ct = r.headers.find("content-type");
      const bool csv = (ct != r.headers.end() && ct->second.starts_with("text/csv")) ||
                       trim(r.body).starts_with("occupant_id");
      const MeteredActuals actuals = csv ? parse_actuals_csv(r.body, *plan) : actuals_from_document(parse_body(r), *plan);
      const FulfillmentReport report = track_fulfillment(*plan, actuals);
      store_.put_actuals(event->event_id, actuals, plan->step_s);
      return json_response(to_document(report));
    }
    if (m == "GET" && is({"events", "*", "report"})) {
      const auto plan = store_.plan(event->event_id);
      if (!plan) return not_found("no plan for " + event->event_id);
      MeteredActuals actuals;
      if (auto stored = store_.actuals(event->event_id, *plan)) {
        actuals = *stored;
      } else {
        actuals = {plan->occupants, plan->start_step, plan->steps(),
                   std::vector<std::optional<double>>(plan->occupants.size() * plan->steps())};
      }
      const FulfillmentReport report = track_fulfillment(*plan, actuals);
      if (wants_csv(r)) return csv_response(format_fulfillment_csv(report));
      Json doc = to_document(report);
      doc["lifecycle"] = to_document(lifecycles_.at(event->event_id));
      return json_response(doc);
    }
  }

  // vpp configuration
  if (is({"vpp", "config"})) {
    if (m == "GET") return json_response(to_document(vpp_config()));
    if (m == "PUT") {
      const VppConfig config = vpp_config_from_document(parse_body(r));
      for (const auto& id : config.included_assets) store_.asset(id);
      store_.put_document("vpp_config", to_document(config));
      Json doc = to_document(config);
      doc["bands"] = band_documents(config);
      return json_response(doc);
    }
  }
  if (m == "GET" && is({"vpp", "bands"})) return json_response({{"bands", band_documents(vpp_config())}});

  return not_found("no such endpoint: " + m + " " + r.path);
}

}  // namespace flexkit
