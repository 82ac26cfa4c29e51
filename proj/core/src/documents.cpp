#include "flexkit/documents.hpp"

#include <cmath>

#include "flexkit/error.hpp"

namespace flexkit {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::BadRequest, what); }

const Json& field(const Json& doc, const char* name) {
  if (!doc.is_object()) bad("expected an object");
  auto it = doc.find(name);
  if (it == doc.end()) bad(std::string("missing field ") + name);
  return *it;
}

std::string get_string(const Json& doc, const char* name) {
  const Json& v = field(doc, name);
  if (!v.is_string()) bad(std::string(name) + " must be a string");
  return v.get<std::string>();
}

double get_number(const Json& doc, const char* name) {
  const Json& v = field(doc, name);
  if (!v.is_number()) bad(std::string(name) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(std::string(name) + " must be finite");
  return d;
}

std::int64_t get_int(const Json& doc, const char* name) {
  const Json& v = field(doc, name);
  if (!v.is_number_integer()) bad(std::string(name) + " must be an integer");
  return v.get<std::int64_t>();
}

bool get_bool(const Json& doc, const char* name, bool fallback) {
  auto it = doc.find(name);
  if (it == doc.end()) return fallback;
  if (!it->is_boolean()) bad(std::string(name) + " must be a boolean");
  return it->get<bool>();
}

EpochSeconds get_time(const Json& doc, const char* name) {
  const auto text = get_string(doc, name);
  const auto t = parse_rfc3339(text);
  if (!t) bad(std::string(name) + " is not an RFC 3339 timestamp: " + text);
  return *t;
}

std::vector<double> get_numbers(const Json& doc, const char* name) {
  const Json& v = field(doc, name);
  if (!v.is_array()) bad(std::string(name) + " must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) bad(std::string(name) + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Json matrix_rows(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json to_document(const SpectralReport& report) {
  Json doc;
  doc["api_version"] = kApiVersion;
  doc["kind"] = "spectral_report";
  Json periods = Json::array();
  for (const auto& p : report.periods) {
    Json peaks = Json::array();
    for (const auto& k : p.peaks)
      peaks.push_back({{"rank", k.magnitude_rank},
                       {"frequency_hz", k.frequency_hz},
                       {"period_s", k.period_s},
                       {"magnitude", k.magnitude},
                       {"relative_power", k.relative_power}});
    periods.push_back({{"month", p.month.to_string()},
                       {"n_samples", p.spectrum.n_samples},
                       {"sampling_frequency_hz", p.spectrum.sampling_frequency_hz},
                       {"peaks", std::move(peaks)}});
  }
  doc["periods"] = std::move(periods);
  Json skipped = Json::array();
  for (const auto& s : report.skipped)
    skipped.push_back({{"month", s.month.to_string()}, {"gap_fraction", s.gap_fraction}, {"reason", s.reason}});
  doc["skipped"] = std::move(skipped);
  return doc;
}

Json to_document(const BaselineSet& b) {
  Json doc;
  doc["api_version"] = kApiVersion;
  doc["kind"] = "baseline_set";
  doc["month"] = b.month.to_string();
  doc["slots_per_cycle"] = b.slots_per_cycle;
  doc["sampling_interval_s"] = b.sampling_interval_s;
  doc["medium_rule"] = to_string(b.medium_rule);
  doc["low_load_floor_wh"] = b.low_load_floor_wh;
  doc["high_load_ceiling_wh"] = optional_number(b.high_load_ceiling_wh);
  doc["dbscan"] = {{"epsilon_wh", b.dbscan.epsilon}, {"min_points", b.dbscan.min_points}, {"auto_epsilon", b.auto_epsilon}};
  doc["outlier_count"] = b.outlier_count;
  doc["fallback_count"] = b.fallback_count();
  Json slots = Json::array();
  for (std::size_t i = 0; i < b.slots.size(); ++i) {
    const auto& s = b.slots[i];
    slots.push_back({{"slot", i},
                     {"min_wh", s.min_wh},
                     {"medium_wh", s.medium_wh},
                     {"max_wh", s.max_wh},
                     {"fallback", s.fallback},
                     {"samples", s.samples},
                     {"outliers", s.outliers},
                     {"epsilon_wh", s.epsilon_wh}});
  }
  doc["slots"] = std::move(slots);
  Json excluded = Json::array();
  for (const auto& e : b.excluded_low_clusters)
    excluded.push_back(
        {{"slot", e.slot}, {"cluster_id", e.cluster_id}, {"mean_wh", e.mean_wh}, {"above_ceiling", e.above_ceiling}});
  doc["excluded_clusters"] = std::move(excluded);
  return doc;
}

BaselineSet baselines_from_document(const Json& doc) {
  BaselineSet b;
  const auto month = YearMonth::parse(get_string(doc, "month"));
  if (!month) bad("month must be YYYY-MM");
  b.month = *month;
  b.slots_per_cycle = static_cast<std::size_t>(get_int(doc, "slots_per_cycle"));
  b.sampling_interval_s = get_int(doc, "sampling_interval_s");
  const auto rule = parse_medium_rule(get_string(doc, "medium_rule"));
  if (!rule) bad("unknown medium_rule");
  b.medium_rule = *rule;
  b.low_load_floor_wh = get_number(doc, "low_load_floor_wh");
  if (const Json& c = field(doc, "high_load_ceiling_wh"); !c.is_null()) b.high_load_ceiling_wh = get_number(doc, "high_load_ceiling_wh");
  const Json& db = field(doc, "dbscan");
  b.dbscan.epsilon = get_number(db, "epsilon_wh");
  b.dbscan.min_points = static_cast<std::size_t>(get_int(db, "min_points"));
  b.auto_epsilon = get_bool(db, "auto_epsilon", false);
  b.outlier_count = static_cast<std::size_t>(get_int(doc, "outlier_count"));
  for (const auto& s : field(doc, "slots")) {
    SlotBaseline slot;
    slot.min_wh = get_number(s, "min_wh");
    slot.medium_wh = get_number(s, "medium_wh");
    slot.max_wh = get_number(s, "max_wh");
    slot.fallback = get_bool(s, "fallback", false);
    slot.samples = static_cast<std::size_t>(get_int(s, "samples"));
    slot.outliers = static_cast<std::size_t>(get_int(s, "outliers"));
    slot.epsilon_wh = get_number(s, "epsilon_wh");
    b.slots.push_back(slot);
  }
  for (const auto& e : field(doc, "excluded_clusters")) {
    ExcludedCluster ex;
    ex.slot = static_cast<std::size_t>(get_int(e, "slot"));
    ex.cluster_id = static_cast<int>(get_int(e, "cluster_id"));
    ex.mean_wh = get_number(e, "mean_wh");
    ex.above_ceiling = get_bool(e, "above_ceiling", false);
    b.excluded_low_clusters.push_back(ex);
  }
  return b;
}

Json to_document(const FlexibilityBand& band, const BaselineSet& baselines) {
  Json doc;
  doc["api_version"] = kApiVersion;
  doc["kind"] = "flexibility_band";
  doc["month"] = baselines.month.to_string();
  doc["direction"] = to_string(band.direction);
  doc["adjustment_fraction"] = band.adjustment_fraction;
  Json slots = Json::array();
  for (std::size_t i = 0; i < band.available_flex_wh.size(); ++i) {
    Json row = {{"slot", i}, {"available_flex_wh", band.available_flex_wh[i]}};
    if (i < baselines.slots.size()) {
      row["min_wh"] = baselines.slots[i].min_wh;
      row["medium_wh"] = baselines.slots[i].medium_wh;
      row["max_wh"] = baselines.slots[i].max_wh;
    }
    slots.push_back(std::move(row));
  }
  doc["slots"] = std::move(slots);
  return doc;
}

Json to_document(const FlexibilityForecast& f) {
  Json doc;
  doc["api_version"] = kApiVersion;
  doc["kind"] = "flexibility_forecast";
  doc["device_id"] = f.device_id;
  doc["start_time"] = format_rfc3339(f.start_time);
  doc["step_s"] = f.step_s;
  doc["horizon_steps"] = f.horizon_steps;
  doc["direction"] = to_string(f.direction);
  doc["baseline_set_temp_c"] = f.baseline_set_temp_c;
  doc["flex_set_temp_c"] = f.flex_set_temp_c;
  doc["rated_power_kw"] = f.rated_power_kw;
  doc["available_flex_kw"] = f.available_flex_kw;
  doc["baseline_states"] = f.baseline_states;
  doc["flex_states"] = f.flex_states;
  return doc;
}

FlexibilityForecast forecast_from_document(const Json& doc) {
  FlexibilityForecast f;
  f.device_id = get_string(doc, "device_id");
  f.start_time = get_time(doc, "start_time");
  f.step_s = get_int(doc, "step_s");
  f.horizon_steps = static_cast<std::size_t>(get_int(doc, "horizon_steps"));
  const auto dir = parse_flex_direction(get_string(doc, "direction"));
  if (!dir) bad("unknown direction");
  f.direction = *dir;
  f.baseline_set_temp_c = get_number(doc, "baseline_set_temp_c");
  f.flex_set_temp_c = get_number(doc, "flex_set_temp_c");
  f.rated_power_kw = get_number(doc, "rated_power_kw");
  f.available_flex_kw = get_numbers(doc, "available_flex_kw");
  for (double s : get_numbers(doc, "baseline_states")) f.baseline_states.push_back(static_cast<int>(s));
  for (double s : get_numbers(doc, "flex_states")) f.flex_states.push_back(static_cast<int>(s));
  return f;
}

Json model_summary_document(const HvacModelPair& m) {
  Json doc;
  doc["api_version"] = kApiVersion;
  doc["kind"] = "hvac_model_summary";
  doc["device_id"] = m.device_id;
  doc["rated_power_kw"] = m.rated_power_kw;
  doc["step_s"] = m.step_s;
  doc["mode"] = to_string(m.thermal.mode());
  doc["seed"] = m.seed;
  doc["thermal"] = {{"mae_c", m.thermal.train_metrics().mae},
                    {"r2", m.thermal.train_metrics().r2},
                    {"test_rows", m.thermal.train_metrics().rows},
                    {"training_rows", m.thermal_rows},
                    {"ridge_fallback", m.thermal.ridge_fallback()},
                    {"raw_coefficients", m.thermal.raw_coefficients()}};
  const auto& c = m.state.train_metrics();
  doc["state"] = {{"accuracy", c.accuracy},
                  {"precision", c.precision},
                  {"recall", c.recall},
                  {"f1", c.f1},
                  {"test_rows", c.rows},
                  {"training_rows", m.state_rows},
                  {"trees", m.state.forest().trees().size()}};
  return doc;
}

Json to_document(const DrEvent& e) {
  Json doc;
  doc["event_id"] = e.event_id;
  doc["direction"] = to_string(e.direction);
  doc["requested_power_kw"] = e.requested_power_kw;
  doc["start_time"] = format_rfc3339(e.start_time);
  doc["duration_s"] = e.duration_s;
  doc["step_s"] = e.step_s;
  doc["notice_deadline"] = format_rfc3339(e.notice_deadline);
  return doc;
}

DrEvent event_from_document(const Json& doc) {
  DrEvent e;
  e.event_id = get_string(doc, "event_id");
  if (e.event_id.empty()) bad("event_id must not be empty");
  const auto dir = parse_event_direction(get_string(doc, "direction"));
  if (!dir) bad("direction must be reduce or increase");
  e.direction = *dir;
  e.requested_power_kw = get_number(doc, "requested_power_kw");
  e.start_time = get_time(doc, "start_time");
  e.duration_s = get_int(doc, "duration_s");
  e.step_s = get_int(doc, "step_s");
  e.notice_deadline = get_time(doc, "notice_deadline");
  return e;
}

Json to_document(const Contract& c) {
  Json doc;
  doc["occupant_id"] = c.occupant_id;
  doc["device_id"] = c.device();
  doc["max_flex_kw"] = c.max_flex_kw;
  doc["baseline_set_temp_c"] = c.baseline_set_temp_c;
  doc["flex_set_temp_c"] = c.flex_set_temp_c;
  doc["active"] = c.active;
  doc["compensation_terms"] = c.compensation_terms;
  return doc;
}

Contract contract_from_document(const Json& doc) {
  Contract c;
  c.occupant_id = get_string(doc, "occupant_id");
  if (c.occupant_id.empty()) bad("occupant_id must not be empty");
  if (doc.contains("device_id")) c.device_id = get_string(doc, "device_id");
  if (c.device_id == c.occupant_id) c.device_id.clear();
  const Json& caps = field(doc, "max_flex_kw");
  if (caps.is_number()) {
    c.max_flex_kw = {caps.get<double>()};
  } else {
    c.max_flex_kw = get_numbers(doc, "max_flex_kw");
  }
  if (c.max_flex_kw.empty()) bad("max_flex_kw must not be empty");
  for (double v : c.max_flex_kw)
    if (!std::isfinite(v) || v < 0.0) bad("max_flex_kw must be finite and non-negative");
  c.baseline_set_temp_c = get_number(doc, "baseline_set_temp_c");
  c.flex_set_temp_c = get_number(doc, "flex_set_temp_c");
  c.active = get_bool(doc, "active", true);
  if (doc.contains("compensation_terms")) c.compensation_terms = get_string(doc, "compensation_terms");
  return c;
}

Json to_document(const AllocationPlan& p) {
  Json doc;
  doc["api_version"] = kApiVersion;
  doc["kind"] = "allocation_plan";
  doc["event_id"] = p.event_id;
  doc["policy"] = to_string(p.options.policy);
  doc["objective_mode"] = to_string(p.options.mode);
  doc["status"] = to_string(p.status);
  doc["requested_power_kw"] = p.requested_power_kw;
  doc["start_time"] = format_rfc3339(p.step_time(0));
  doc["step_s"] = p.step_s;
  doc["steps"] = p.steps();
  doc["residual_kw"] = p.residual_kw;
  doc["objective"] = p.objective;
  Json times = Json::array();
  for (std::size_t t = 0; t < p.steps(); ++t) times.push_back(format_rfc3339(p.step_time(t)));
  doc["timestamps"] = std::move(times);
  doc["occupants"] = p.occupants;
  doc["delivered_kw"] = matrix_rows(p.delivered_kw);
  doc["step_total_kw"] = p.step_totals_kw();
  doc["step_residual_kw"] = p.step_residual_kw;
  Json contributions = Json::array();
  for (std::size_t i = 0; i < p.occupants.size(); ++i) {
    double total = 0.0;
    for (std::size_t t = 0; t < p.steps(); ++t) total += p.delivered_kw(i, t);
    contributions.push_back({{"occupant_id", p.occupants[i]}, {"total_kw", total}});
  }
  doc["contributions"] = std::move(contributions);
  return doc;
}

AllocationPlan plan_from_document(const Json& doc) {
  AllocationPlan p;
  p.event_id = get_string(doc, "event_id");
  const auto policy = parse_allocation_policy(get_string(doc, "policy"));
  const auto mode = parse_objective_mode(get_string(doc, "objective_mode"));
  if (!policy || !mode) bad("unknown policy or objective_mode");
  p.options = {*policy, *mode};
  const auto status = get_string(doc, "status");
  if (status != "exact" && status != "shortfall") bad("unknown status");
  p.status = status == "exact" ? PlanStatus::exact : PlanStatus::shortfall;
  p.requested_power_kw = get_number(doc, "requested_power_kw");
  p.step_s = get_int(doc, "step_s");
  if (p.step_s <= 0) bad("step_s must be positive");
  const EpochSeconds start = get_time(doc, "start_time");
  p.start_step = floor_div(start, p.step_s);
  p.residual_kw = get_number(doc, "residual_kw");
  p.objective = get_number(doc, "objective");
  const auto steps = static_cast<std::size_t>(get_int(doc, "steps"));
  for (const auto& o : field(doc, "occupants")) {
    if (!o.is_string()) bad("occupants must be strings");
    p.occupants.push_back(o.get<std::string>());
  }
  p.delivered_kw = Matrix(p.occupants.size(), steps);
  const Json& rows = field(doc, "delivered_kw");
  if (!rows.is_array() || rows.size() != p.occupants.size()) bad("delivered_kw has the wrong shape");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != steps) bad("delivered_kw has the wrong shape");
    for (std::size_t t = 0; t < steps; ++t) {
      if (!rows[i][t].is_number()) bad("delivered_kw must hold numbers");
      p.delivered_kw(i, t) = rows[i][t].get<double>();
    }
  }
  p.step_residual_kw = get_numbers(doc, "step_residual_kw");
  return p;
}

Json to_document(const FeasibilityReport& r) {
  Json doc;
  doc["api_version"] = kApiVersion;
  doc["kind"] = "feasibility_report";
  doc["occupants"] = r.occupants;
  doc["step_capacity_kw"] = r.step_capacity_kw;
  doc["step_shortfall"] = r.step_shortfall;
  doc["total_capacity_kw"] = r.total_capacity_kw;
  doc["max_deliverable_kw"] = r.max_deliverable_kw;
  doc["cap_kw"] = matrix_rows(r.cap_kw);
  Json binding = Json::array();
  for (const auto& row : r.binding) {
    Json b = Json::array();
    for (auto x : row) b.push_back(to_string(x));
    binding.push_back(std::move(b));
  }
  doc["binding"] = std::move(binding);
  return doc;
}

Json to_document(const FulfillmentReport& r) {
  Json doc;
  doc["api_version"] = kApiVersion;
  doc["kind"] = "fulfillment_report";
  doc["event_id"] = r.event_id;
  doc["total_deviation_kw"] = r.total_deviation_kw;
  doc["missing_readings"] = r.missing_readings;
  Json steps = Json::array();
  for (const auto& s : r.steps)
    steps.push_back({{"timestamp", format_rfc3339(s.timestamp)},
                     {"requested_kw", s.requested_kw},
                     {"planned_kw", s.planned_kw},
                     {"actual_kw", s.actual_kw},
                     {"deviation_kw", s.deviation_kw},
                     {"missing", s.missing}});
  doc["steps"] = std::move(steps);
  Json occupants = Json::array();
  const std::size_t n_steps = r.steps.size();
  for (std::size_t i = 0; i < r.occupants.size(); ++i) {
    const auto& o = r.occupants[i];
    Json cells = Json::array();
    for (std::size_t t = 0; t < n_steps; ++t) cells.push_back(optional_number(r.deviation_kw[i * n_steps + t]));
    occupants.push_back({{"occupant_id", o.occupant_id},
                         {"planned_kw", o.planned_kw},
                         {"actual_kw", o.actual_kw},
                         {"deviation_kw", o.deviation_kw},
                         {"missing", o.missing},
                         {"step_deviation_kw", std::move(cells)}});
  }
  doc["occupants"] = std::move(occupants);
  return doc;
}

Json to_document(const MeteredActuals& a, std::int64_t step_s) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < a.occupants.size(); ++i)
    for (std::size_t t = 0; t < a.steps; ++t)
      rows.push_back({{"occupant_id", a.occupants[i]},
                      {"timestamp", format_rfc3339((a.start_step + static_cast<std::int64_t>(t)) * step_s)},
                      {"actual_kw", optional_number(a.at(i, t))}});
  Json doc;
  doc["actuals"] = std::move(rows);
  return doc;
}

MeteredActuals actuals_from_document(const Json& doc, const AllocationPlan& plan) {
  MeteredActuals a;
  a.occupants = plan.occupants;
  a.start_step = plan.start_step;
  a.steps = plan.steps();
  a.values.assign(a.occupants.size() * a.steps, std::nullopt);
  const Json& rows = field(doc, "actuals");
  if (!rows.is_array()) bad("actuals must be an array");
  for (const auto& row : rows) {
    const auto occupant = get_string(row, "occupant_id");
    std::size_t i = 0;
    while (i < a.occupants.size() && a.occupants[i] != occupant) ++i;
    if (i == a.occupants.size()) throw Error(ErrorCode::GridMismatch, "occupant not in plan: " + occupant);
    const EpochSeconds ts = get_time(row, "timestamp");
    if (floor_mod(ts, plan.step_s) != 0) throw Error(ErrorCode::GridMismatch, "timestamp off the plan grid");
    const std::int64_t step = floor_div(ts, plan.step_s) - plan.start_step;
    if (step < 0 || step >= static_cast<std::int64_t>(a.steps))
      throw Error(ErrorCode::GridMismatch, "timestamp outside the event window");
    const Json& v = field(row, "actual_kw");
    if (v.is_null()) continue;
    auto& cell = a.values[i * a.steps + static_cast<std::size_t>(step)];
    if (cell) throw Error(ErrorCode::DuplicateTimestamp, "duplicate reading for " + occupant);
    cell = get_number(row, "actual_kw");
  }
  return a;
}

std::string dump_document(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace flexkit
