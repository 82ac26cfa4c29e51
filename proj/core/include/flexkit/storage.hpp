#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "flexkit/allocation.hpp"
#include "flexkit/baseline.hpp"
#include "flexkit/csv.hpp"
#include "flexkit/documents.hpp"
#include "flexkit/hvac.hpp"

namespace flexkit {

enum class AssetKind { building_meter, hvac_unit };
std::string_view to_string(AssetKind kind) noexcept;
std::optional<AssetKind> parse_asset_kind(std::string_view text) noexcept;

struct AssetRecord {
  std::string asset_id;
  AssetKind kind = AssetKind::building_meter;
  std::optional<double> rated_power_kw;  // hvac units only
  std::string location;
  std::optional<std::string> contract_id;
  std::int64_t sampling_interval_s = 0;  // 0 = inferred from the data

  bool operator==(const AssetRecord&) const = default;
};

/// Ids end up in file names: 1-64 characters from [A-Za-z0-9_.-], not
/// starting with a dot.
bool valid_id(std::string_view id) noexcept;

/// Throws `InvalidParameters`.
void validate_asset(const AssetRecord& asset);
Json to_document(const AssetRecord& asset);
AssetRecord asset_from_document(const Json& doc);

struct IngestReport {
  std::string asset_id;
  std::size_t rows_read = 0;
  std::size_t rows_stored = 0;
  std::vector<RowError> errors;

  std::size_t count(ErrorCode code) const noexcept;
};
Json to_document(const IngestReport& report);

/// Embedded file-backed store, one directory per entity type.
///
/// Every write goes to a temporary file that is renamed over the target,
/// so readers only ever see complete files. Many readers or one writer at a
/// time. Temporary files left by a crash are removed on open.
class Store {
 public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Throws `DuplicateAsset` if the id exists.
  void create_asset(const AssetRecord& asset);
  void update_asset(const AssetRecord& asset);
  std::optional<AssetRecord> find_asset(std::string_view asset_id) const;
  /// Throws `UnknownAsset`.
  AssetRecord asset(std::string_view asset_id) const;
  std::vector<AssetRecord> assets() const;

  /// Appends valid rows. Rows whose timestamp is already stored, or repeats
  /// within the file, are rejected as `DuplicateTimestamp`. Either every
  /// valid row of the file becomes visible or none does.
  IngestReport ingest_csv(const std::filesystem::path& path, std::string_view asset_id);
  IngestReport ingest_text(std::string_view text, std::string_view asset_id);

  std::vector<Reading> meter_readings(std::string_view asset_id) const;
  MeterSeries meter_series(std::string_view asset_id) const;
  std::vector<HvacSample> hvac_samples(std::string_view asset_id) const;
  /// Stored rows in timestamp order, in the asset's CSV format.
  std::string export_csv(std::string_view asset_id) const;

  void put_model(const HvacModelPair& model);
  std::optional<HvacModelPair> model(std::string_view device_id) const;

  void put_baselines(std::string_view asset_id, const BaselineSet& baselines);
  std::optional<BaselineSet> baselines(std::string_view asset_id, YearMonth month) const;
  std::vector<YearMonth> baseline_months(std::string_view asset_id) const;

  void put_forecast(const FlexibilityForecast& forecast);
  std::optional<FlexibilityForecast> forecast(std::string_view device_id) const;
  std::vector<FlexibilityForecast> forecasts() const;

  void put_contract(const Contract& contract);
  std::optional<Contract> contract(std::string_view occupant_id) const;
  std::vector<Contract> contracts() const;

  void put_event(const DrEvent& event);
  std::optional<DrEvent> event(std::string_view event_id) const;
  std::vector<DrEvent> events() const;

  void put_plan(const AllocationPlan& plan);
  std::optional<AllocationPlan> plan(std::string_view event_id) const;

  void put_actuals(std::string_view event_id, const MeteredActuals& actuals, std::int64_t step_s);
  std::optional<MeteredActuals> actuals(std::string_view event_id, const AllocationPlan& plan) const;

  void put_document(std::string_view name, const Json& doc);
  std::optional<Json> document(std::string_view name) const;

  void append_log(const Json& entry);
  std::vector<Json> read_log() const;

  std::optional<std::string> idempotent_response(std::string_view key) const;
  void put_idempotent_response(std::string_view key, std::string_view response);

  /// Test hook called at named points of an ingest write ("mid_write",
  /// "before_commit"); throwing from it simulates a crash.
  void set_fault_hook(std::function<void(std::string_view)> hook) { fault_hook_ = std::move(hook); }

 private:
  std::filesystem::path path_for(std::string_view dir, std::string_view id, std::string_view ext) const;
  void write_file(const std::filesystem::path& path, std::string_view content, bool with_hook = false) const;
  std::optional<std::string> read_file(const std::filesystem::path& path) const;
  void write_json(const std::filesystem::path& path, const Json& doc) const;
  std::optional<Json> read_json(const std::filesystem::path& path) const;
  std::vector<Json> read_dir(std::string_view dir) const;

  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;
  std::function<void(std::string_view)> fault_hook_;
};

}  // namespace flexkit
