#include "flexkit/storage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "flexkit/error.hpp"
#include "flexkit/number_format.hpp"

namespace fs = std::filesystem;

namespace flexkit {

std::string_view to_string(AssetKind kind) noexcept {
  return kind == AssetKind::building_meter ? "building_meter" : "hvac_unit";
}

std::optional<AssetKind> parse_asset_kind(std::string_view text) noexcept {
  if (text == "building_meter") return AssetKind::building_meter;
  if (text == "hvac_unit") return AssetKind::hvac_unit;
  return std::nullopt;
}

bool valid_id(std::string_view id) noexcept {
  if (id.empty() || id.size() > 64 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
           c == '-';
  });
}

void validate_asset(const AssetRecord& a) {
  if (!valid_id(a.asset_id)) throw Error(ErrorCode::InvalidParameters, "invalid asset_id '" + a.asset_id + "'");
  if (a.kind == AssetKind::hvac_unit) {
    if (!a.rated_power_kw || !std::isfinite(*a.rated_power_kw) || *a.rated_power_kw <= 0.0)
      throw Error(ErrorCode::InvalidParameters, "hvac assets need rated_power_kw > 0");
  } else if (a.rated_power_kw) {
    throw Error(ErrorCode::InvalidParameters, "rated_power_kw applies to hvac units only");
  }
  if (a.sampling_interval_s < 0) throw Error(ErrorCode::InvalidParameters, "sampling_interval_s must be >= 0");
}

Json to_document(const AssetRecord& a) {
  Json doc;
  doc["asset_id"] = a.asset_id;
  doc["kind"] = to_string(a.kind);
  doc["rated_power_kw"] = a.rated_power_kw ? Json(*a.rated_power_kw) : Json(nullptr);
  doc["location"] = a.location;
  doc["contract_id"] = a.contract_id ? Json(*a.contract_id) : Json(nullptr);
  doc["sampling_interval_s"] = a.sampling_interval_s;
  return doc;
}

AssetRecord asset_from_document(const Json& doc) {
  auto bad = [](const std::string& what) { return Error(ErrorCode::BadRequest, what); };
  if (!doc.is_object()) throw bad("asset must be an object");
  AssetRecord a;
  if (!doc.contains("asset_id") || !doc["asset_id"].is_string()) throw bad("asset_id must be a string");
  a.asset_id = doc["asset_id"].get<std::string>();
  if (!doc.contains("kind") || !doc["kind"].is_string()) throw bad("kind must be a string");
  const auto kind = parse_asset_kind(doc["kind"].get<std::string>());
  if (!kind) throw bad("kind must be building_meter or hvac_unit");
  a.kind = *kind;
  if (auto it = doc.find("rated_power_kw"); it != doc.end() && !it->is_null()) {
    if (!it->is_number()) throw bad("rated_power_kw must be a number");
    a.rated_power_kw = it->get<double>();
  }
  if (auto it = doc.find("location"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw bad("location must be a string");
    a.location = it->get<std::string>();
  }
  if (auto it = doc.find("contract_id"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw bad("contract_id must be a string");
    a.contract_id = it->get<std::string>();
  }
  if (auto it = doc.find("sampling_interval_s"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw bad("sampling_interval_s must be an integer");
    a.sampling_interval_s = it->get<std::int64_t>();
  }
  validate_asset(a);
  return a;
}

std::size_t IngestReport::count(ErrorCode code) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(errors.begin(), errors.end(), [code](const RowError& e) { return e.code == code; }));
}

Json to_document(const IngestReport& r) {
  Json doc;
  doc["asset_id"] = r.asset_id;
  doc["rows_read"] = r.rows_read;
  doc["rows_stored"] = r.rows_stored;
  doc["rows_rejected"] = r.errors.size();
  Json errors = Json::array();
  for (const auto& e : r.errors) errors.push_back({{"line", e.line}, {"code", to_string(e.code)}, {"message", e.message}});
  doc["errors"] = std::move(errors);
  return doc;
}

namespace {

constexpr std::string_view kTmpSuffix = ".tmp";

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void require_id(std::string_view id, std::string_view what) {
  if (!valid_id(id)) throw Error(ErrorCode::InvalidParameters, "invalid " + std::string(what) + " '" + std::string(id) + "'");
}

}  // namespace

Store::Store(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (const char* dir : {"assets", "telemetry", "models", "baselines", "forecasts", "contracts", "events", "plans",
                          "actuals", "documents", "idempotency"}) {
    fs::create_directories(root_ / dir, ec);
    if (ec) throw Error(ErrorCode::StorageFailure, "cannot create " + (root_ / dir).string() + ": " + ec.message());
  }
  for (auto it = fs::recursive_directory_iterator(root_, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    const auto name = it->path().filename().string();
    if (it->is_regular_file() && name.size() > kTmpSuffix.size() && name.ends_with(kTmpSuffix)) {
      std::error_code rm;
      fs::remove(it->path(), rm);
    }
  }
}

fs::path Store::path_for(std::string_view dir, std::string_view id, std::string_view ext) const {
  return root_ / dir / (std::string(id) + std::string(ext));
}

void Store::write_file(const fs::path& path, std::string_view content, bool with_hook) const {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.string() + std::string(kTmpSuffix);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
    const std::size_t half = content.size() / 2;
    out.write(content.data(), static_cast<std::streamsize>(half));
    out.flush();
    if (with_hook && fault_hook_) fault_hook_("mid_write");
    out.write(content.data() + half, static_cast<std::streamsize>(content.size() - half));
    out.flush();
    if (!out) throw Error(ErrorCode::StorageFailure, "short write to " + tmp.string());
  }
  if (with_hook && fault_hook_) fault_hook_("before_commit");
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot commit " + path.string() + ": " + ec.message());
}

std::optional<std::string> Store::read_file(const fs::path& path) const {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Store::write_json(const fs::path& path, const Json& doc) const { write_file(path, dump_document(doc)); }

std::optional<Json> Store::read_json(const fs::path& path) const {
  const auto text = read_file(path);
  if (!text) return std::nullopt;
  try {
    return Json::parse(*text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::StorageFailure, "corrupt file " + path.string() + ": " + e.what());
  }
}

std::vector<Json> Store::read_dir(std::string_view dir) const {
  std::vector<fs::path> paths;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".json") paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  std::vector<Json> out;
  for (const auto& p : paths)
    if (auto doc = read_json(p)) out.push_back(std::move(*doc));
  return out;
}

void Store::create_asset(const AssetRecord& asset) {
  validate_asset(asset);
  std::unique_lock lock(mutex_);
  const auto path = path_for("assets", asset.asset_id, ".json");
  if (fs::exists(path)) throw Error(ErrorCode::DuplicateAsset, "asset already exists: " + asset.asset_id);
  write_json(path, to_document(asset));
}

void Store::update_asset(const AssetRecord& asset) {
  validate_asset(asset);
  std::unique_lock lock(mutex_);
  const auto path = path_for("assets", asset.asset_id, ".json");
  if (!fs::exists(path)) throw Error(ErrorCode::UnknownAsset, "unknown asset: " + asset.asset_id);
  write_json(path, to_document(asset));
}

std::optional<AssetRecord> Store::find_asset(std::string_view asset_id) const {
  if (!valid_id(asset_id)) return std::nullopt;
  std::shared_lock lock(mutex_);
  const auto doc = read_json(path_for("assets", asset_id, ".json"));
  if (!doc) return std::nullopt;
  return asset_from_document(*doc);
}

AssetRecord Store::asset(std::string_view asset_id) const {
  auto a = find_asset(asset_id);
  if (!a) throw Error(ErrorCode::UnknownAsset, "unknown asset: " + std::string(asset_id));
  return *a;
}

std::vector<AssetRecord> Store::assets() const {
  std::shared_lock lock(mutex_);
  std::vector<AssetRecord> out;
  for (const auto& doc : read_dir("assets")) out.push_back(asset_from_document(doc));
  return out;
}

IngestReport Store::ingest_csv(const fs::path& path, std::string_view asset_id) {
  const auto text = read_file(path);
  if (!text) throw Error(ErrorCode::NotFound, "cannot read " + path.string());
  return ingest_text(*text, asset_id);
}

IngestReport Store::ingest_text(std::string_view text, std::string_view asset_id) {
  const AssetRecord a = asset(asset_id);
  std::unique_lock lock(mutex_);
  IngestReport report;
  report.asset_id = a.asset_id;
  const auto path = path_for("telemetry", a.asset_id, ".csv");
  const auto stored = read_file(path);

  auto finish = [&](std::vector<RowError> parse_errors, std::vector<RowError> dupes) {
    report.errors = std::move(parse_errors);
    report.errors.insert(report.errors.end(), dupes.begin(), dupes.end());
    std::stable_sort(report.errors.begin(), report.errors.end(),
                     [](const RowError& x, const RowError& y) { return x.line < y.line; });
  };

  if (a.kind == AssetKind::building_meter) {
    MeterCsv incoming = parse_meter_csv(text);
    std::vector<Reading> rows = stored ? parse_meter_csv(*stored).readings : std::vector<Reading>{};
    std::set<EpochSeconds> seen;
    for (const auto& r : rows) seen.insert(r.timestamp);
    std::vector<RowError> dupes;
    const std::size_t before = rows.size();
    for (std::size_t i = 0; i < incoming.readings.size(); ++i) {
      const auto& r = incoming.readings[i];
      if (!seen.insert(r.timestamp).second) {
        dupes.push_back({incoming.lines[i], ErrorCode::DuplicateTimestamp, "timestamp already stored: " + format_rfc3339(r.timestamp)});
        continue;
      }
      rows.push_back(r);
    }
    report.rows_read = incoming.readings.size() + incoming.errors.size();
    report.rows_stored = rows.size() - before;
    finish(std::move(incoming.errors), std::move(dupes));
    if (report.rows_stored > 0) {
      std::stable_sort(rows.begin(), rows.end(), [](const Reading& x, const Reading& y) { return x.timestamp < y.timestamp; });
      write_file(path, format_meter_csv(rows), true);
    }
  } else {
    HvacCsv incoming = parse_hvac_csv(text);
    std::vector<HvacSample> rows = stored ? parse_hvac_csv(*stored).samples : std::vector<HvacSample>{};
    std::set<EpochSeconds> seen;
    for (const auto& r : rows) seen.insert(r.timestamp);
    std::vector<RowError> dupes;
    const std::size_t before = rows.size();
    for (std::size_t i = 0; i < incoming.samples.size(); ++i) {
      const auto& r = incoming.samples[i];
      if (!seen.insert(r.timestamp).second) {
        dupes.push_back({incoming.lines[i], ErrorCode::DuplicateTimestamp, "timestamp already stored: " + format_rfc3339(r.timestamp)});
        continue;
      }
      rows.push_back(r);
    }
    report.rows_read = incoming.samples.size() + incoming.errors.size();
    report.rows_stored = rows.size() - before;
    finish(std::move(incoming.errors), std::move(dupes));
    if (report.rows_stored > 0) {
      std::stable_sort(rows.begin(), rows.end(),
                       [](const HvacSample& x, const HvacSample& y) { return x.timestamp < y.timestamp; });
      write_file(path, format_hvac_csv(rows), true);
    }
  }
  return report;
}

std::vector<Reading> Store::meter_readings(std::string_view asset_id) const {
  const AssetRecord a = asset(asset_id);
  if (a.kind != AssetKind::building_meter)
    throw Error(ErrorCode::InvalidParameters, "asset " + a.asset_id + " is not a building meter");
  std::shared_lock lock(mutex_);
  const auto text = read_file(path_for("telemetry", a.asset_id, ".csv"));
  if (!text) return {};
  return parse_meter_csv(*text).readings;
}

MeterSeries Store::meter_series(std::string_view asset_id) const {
  const AssetRecord a = asset(asset_id);
  const auto readings = meter_readings(asset_id);
  ValidationOptions options;
  if (a.sampling_interval_s > 0) options.interval_hint_s = a.sampling_interval_s;
  return validate_series(readings, options);
}

std::vector<HvacSample> Store::hvac_samples(std::string_view asset_id) const {
  const AssetRecord a = asset(asset_id);
  if (a.kind != AssetKind::hvac_unit) throw Error(ErrorCode::InvalidParameters, "asset " + a.asset_id + " is not an hvac unit");
  std::shared_lock lock(mutex_);
  const auto text = read_file(path_for("telemetry", a.asset_id, ".csv"));
  if (!text) return {};
  return parse_hvac_csv(*text).samples;
}

std::string Store::export_csv(std::string_view asset_id) const {
  const AssetRecord a = asset(asset_id);
  std::shared_lock lock(mutex_);
  if (auto text = read_file(path_for("telemetry", a.asset_id, ".csv"))) return *text;
  return a.kind == AssetKind::building_meter ? format_meter_csv(std::span<const Reading>{})
                                             : format_hvac_csv(std::span<const HvacSample>{});
}

void Store::put_model(const HvacModelPair& model) {
  require_id(model.device_id, "device_id");
  std::unique_lock lock(mutex_);
  write_file(path_for("models", model.device_id, ".json"), serialize_model(model));
}

std::optional<HvacModelPair> Store::model(std::string_view device_id) const {
  if (!valid_id(device_id)) return std::nullopt;
  std::shared_lock lock(mutex_);
  const auto text = read_file(path_for("models", device_id, ".json"));
  if (!text) return std::nullopt;
  return parse_model(*text);
}

void Store::put_baselines(std::string_view asset_id, const BaselineSet& baselines) {
  require_id(asset_id, "asset_id");
  std::unique_lock lock(mutex_);
  write_json(root_ / "baselines" / std::string(asset_id) / (baselines.month.to_string() + ".json"), to_document(baselines));
}

std::optional<BaselineSet> Store::baselines(std::string_view asset_id, YearMonth month) const {
  if (!valid_id(asset_id)) return std::nullopt;
  std::shared_lock lock(mutex_);
  const auto doc = read_json(root_ / "baselines" / std::string(asset_id) / (month.to_string() + ".json"));
  if (!doc) return std::nullopt;
  return baselines_from_document(*doc);
}

std::vector<YearMonth> Store::baseline_months(std::string_view asset_id) const {
  std::vector<YearMonth> out;
  if (!valid_id(asset_id)) return out;
  std::shared_lock lock(mutex_);
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / "baselines" / std::string(asset_id), ec)) {
    if (entry.path().extension() != ".json") continue;
    if (auto m = YearMonth::parse(entry.path().stem().string())) out.push_back(*m);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Store::put_forecast(const FlexibilityForecast& forecast) {
  require_id(forecast.device_id, "device_id");
  std::unique_lock lock(mutex_);
  write_json(path_for("forecasts", forecast.device_id, ".json"), to_document(forecast));
}

std::optional<FlexibilityForecast> Store::forecast(std::string_view device_id) const {
  if (!valid_id(device_id)) return std::nullopt;
  std::shared_lock lock(mutex_);
  const auto doc = read_json(path_for("forecasts", device_id, ".json"));
  if (!doc) return std::nullopt;
  return forecast_from_document(*doc);
}

std::vector<FlexibilityForecast> Store::forecasts() const {
  std::shared_lock lock(mutex_);
  std::vector<FlexibilityForecast> out;
  for (const auto& doc : read_dir("forecasts")) out.push_back(forecast_from_document(doc));
  return out;
}

void Store::put_contract(const Contract& contract) {
  require_id(contract.occupant_id, "occupant_id");
  std::unique_lock lock(mutex_);
  write_json(path_for("contracts", contract.occupant_id, ".json"), to_document(contract));
}

std::optional<Contract> Store::contract(std::string_view occupant_id) const {
  if (!valid_id(occupant_id)) return std::nullopt;
  std::shared_lock lock(mutex_);
  const auto doc = read_json(path_for("contracts", occupant_id, ".json"));
  if (!doc) return std::nullopt;
  return contract_from_document(*doc);
}

std::vector<Contract> Store::contracts() const {
  std::shared_lock lock(mutex_);
  std::vector<Contract> out;
  for (const auto& doc : read_dir("contracts")) out.push_back(contract_from_document(doc));
  return out;
}

void Store::put_event(const DrEvent& event) {
  require_id(event.event_id, "event_id");
  std::unique_lock lock(mutex_);
  write_json(path_for("events", event.event_id, ".json"), to_document(event));
}

std::optional<DrEvent> Store::event(std::string_view event_id) const {
  if (!valid_id(event_id)) return std::nullopt;
  std::shared_lock lock(mutex_);
  const auto doc = read_json(path_for("events", event_id, ".json"));
  if (!doc) return std::nullopt;
  return event_from_document(*doc);
}

std::vector<DrEvent> Store::events() const {
  std::shared_lock lock(mutex_);
  std::vector<DrEvent> out;
  for (const auto& doc : read_dir("events")) out.push_back(event_from_document(doc));
  return out;
}

void Store::put_plan(const AllocationPlan& plan) {
  require_id(plan.event_id, "event_id");
  std::unique_lock lock(mutex_);
  write_json(path_for("plans", plan.event_id, ".json"), to_document(plan));
}

std::optional<AllocationPlan> Store::plan(std::string_view event_id) const {
  if (!valid_id(event_id)) return std::nullopt;
  std::shared_lock lock(mutex_);
  const auto doc = read_json(path_for("plans", event_id, ".json"));
  if (!doc) return std::nullopt;
  return plan_from_document(*doc);
}

void Store::put_actuals(std::string_view event_id, const MeteredActuals& actuals, std::int64_t step_s) {
  require_id(event_id, "event_id");
  std::unique_lock lock(mutex_);
  write_json(path_for("actuals", event_id, ".json"), to_document(actuals, step_s));
}

std::optional<MeteredActuals> Store::actuals(std::string_view event_id, const AllocationPlan& plan) const {
  if (!valid_id(event_id)) return std::nullopt;
  std::shared_lock lock(mutex_);
  const auto doc = read_json(path_for("actuals", event_id, ".json"));
  if (!doc) return std::nullopt;
  return actuals_from_document(*doc, plan);
}

void Store::put_document(std::string_view name, const Json& doc) {
  require_id(name, "document name");
  std::unique_lock lock(mutex_);
  write_json(path_for("documents", name, ".json"), doc);
}

std::optional<Json> Store::document(std::string_view name) const {
  if (!valid_id(name)) return std::nullopt;
  std::shared_lock lock(mutex_);
  return read_json(path_for("documents", name, ".json"));
}

void Store::append_log(const Json& entry) {
  std::unique_lock lock(mutex_);
  std::ofstream out(root_ / "event_log.jsonl", std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot append to event log");
  out << entry.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::StorageFailure, "short write to event log");
}

std::vector<Json> Store::read_log() const {
  std::shared_lock lock(mutex_);
  std::vector<Json> out;
  const auto text = read_file(root_ / "event_log.jsonl");
  if (!text) return out;
  for (auto line : split_lines(*text)) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const std::exception&) {
      break;  // torn final line
    }
  }
  return out;
}

std::optional<std::string> Store::idempotent_response(std::string_view key) const {
  std::shared_lock lock(mutex_);
  return read_file(path_for("idempotency", fnv1a_hex(key), ".json"));
}

void Store::put_idempotent_response(std::string_view key, std::string_view response) {
  std::unique_lock lock(mutex_);
  write_file(path_for("idempotency", fnv1a_hex(key), ".json"), response);
}

}  // namespace flexkit
