// flexkit: batch command-line front end.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "flexkit/allocation.hpp"
#include "flexkit/baseline.hpp"
#include "flexkit/csv.hpp"
#include "flexkit/documents.hpp"
#include "flexkit/error.hpp"
#include "flexkit/hvac.hpp"
#include "flexkit/number_format.hpp"
#include "flexkit/service.hpp"
#include "flexkit/spectral.hpp"
#include "flexkit/storage.hpp"
#include "flexkit/synthetic.hpp"

namespace fs = std::filesystem;
using namespace flexkit;

namespace {

struct Common {
  std::string output = "csv";
  std::string out;
  std::string data_dir;

  bool document() const { return output == "document"; }
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, std::string_view text) {
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + path);
  out << text;
}

void emit(const Common& c, std::string_view text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_text(c.out, text);
  }
}

void emit(const Common& c, const Json& doc, std::string_view csv) {
  emit(c, c.document() ? dump_document(doc) : std::string(csv));
}

Json read_json(const std::string& path) {
  const auto text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::BadRequest, path + ": " + e.what());
  }
}

fs::path store_dir(const Common& c) {
  if (!c.data_dir.empty()) return c.data_dir;
  const char* env = std::getenv("FLEXKIT_DATA_DIR");
  return env && *env ? env : "flexkit-data";
}

Store open_store(const Common& c) { return Store(store_dir(c)); }

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--output", c.output, "Output format")->check(CLI::IsMember({"csv", "document"}));
  cmd->add_option("--out", c.out, "Write the result to this file instead of stdout");
  cmd->add_option("--data-dir", c.data_dir, "Store directory (default $FLEXKIT_DATA_DIR or ./flexkit-data)");
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string scenario = "industrial_park";
  std::uint64_t seed = 42;
  std::string out_dir = "synthetic";
  std::optional<std::size_t> count;
  std::optional<unsigned> months;
  std::optional<std::size_t> days;
  std::optional<double> noise;
};

int run_synth(const Common& c, const SynthArgs& a) {
  SyntheticScenario s;
  s.kind = *parse_scenario_kind(a.scenario);
  s.seed = a.seed;
  if (a.count) {
    s.industrial.buildings = *a.count;
    s.apartments.apartments = *a.count;
  }
  if (a.months) s.industrial.months = *a.months;
  if (a.days) s.apartments.days = *a.days;
  if (a.noise) {
    s.industrial.noise_sd_wh = *a.noise;
    s.apartments.sensor_noise_c = *a.noise;
  }
  const auto files = generate_synthetic(s);
  Json doc;
  doc["scenario"] = a.scenario;
  doc["seed"] = a.seed;
  doc["out_dir"] = a.out_dir;
  Json list = Json::array();
  std::string csv = "file,bytes\n";
  for (const auto& f : files) {
    write_text((fs::path(a.out_dir) / f.name).string(), f.content);
    list.push_back({{"file", f.name}, {"bytes", f.content.size()}});
    csv += f.name + "," + std::to_string(f.content.size()) + "\n";
  }
  doc["files"] = std::move(list);
  emit(c, doc, csv);
  return 0;
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string asset;
  std::string file;
  std::string kind;
  std::optional<double> rated_kw;
  std::string location;
  std::int64_t interval_s = 0;
};

int run_ingest(const Common& c, const IngestArgs& a) {
  Store store = open_store(c);
  if (!store.find_asset(a.asset)) {
    if (a.kind.empty()) throw Error(ErrorCode::UnknownAsset, "unknown asset " + a.asset + " (pass --kind to create it)");
    AssetRecord rec;
    rec.asset_id = a.asset;
    rec.kind = *parse_asset_kind(a.kind);
    rec.rated_power_kw = a.rated_kw;
    rec.location = a.location;
    rec.sampling_interval_s = a.interval_s;
    store.create_asset(rec);
  }
  const IngestReport r = store.ingest_csv(a.file, a.asset);
  std::string csv = "asset_id,rows_read,rows_stored,rows_rejected\n";
  csv += r.asset_id + "," + std::to_string(r.rows_read) + "," + std::to_string(r.rows_stored) + "," +
         std::to_string(r.errors.size()) + "\n";
  for (const auto& e : r.errors)
    std::cerr << "line " << e.line << ": " << to_string(e.code) << ": " << e.message << "\n";
  emit(c, to_document(r), csv);
  return 0;
}

// ---- spectrum -------------------------------------------------------------

struct SpectrumArgs {
  std::string asset;
  std::string file;
  std::string month;
  std::size_t max_peaks = 5;
  double min_relative_power = kDefaultMinRelativePower;
  bool whole_history = false;
  std::string svg;
};

MeterSeries load_series(const Common& c, const std::string& asset, const std::string& file) {
  if (!file.empty()) {
    const MeterCsv parsed = parse_meter_csv(read_text(file));
    if (!parsed.errors.empty()) {
      const auto& e = parsed.errors.front();
      throw Error(e.code, file + " line " + std::to_string(e.line) + ": " + e.message);
    }
    return validate_series(parsed.readings);
  }
  return open_store(c).meter_series(asset);
}

int run_spectrum(const Common& c, const SpectrumArgs& a) {
  MeterSeries series = load_series(c, a.asset, a.file);
  SpectralOptions options;
  options.max_peaks = a.max_peaks;
  options.min_relative_power = a.min_relative_power;
  options.whole_history = a.whole_history;
  SpectralReport report = analyze_periodicity(series, options);
  if (!a.month.empty()) {
    const auto m = YearMonth::parse(a.month);
    if (!m) throw Error(ErrorCode::BadRequest, "--month must be YYYY-MM");
    std::erase_if(report.periods, [&](const PeriodAnalysis& p) { return p.month != *m; });
    std::erase_if(report.skipped, [&](const SkippedMonth& s) { return s.month != *m; });
    if (report.periods.empty() && report.skipped.empty()) throw Error(ErrorCode::NotFound, "no data for " + a.month);
  }
  std::string csv = "month,rank,frequency_hz,period_s,magnitude,relative_power\n";
  for (const auto& p : report.periods)
    for (const auto& k : p.peaks)
      csv += p.month.to_string() + "," + std::to_string(k.magnitude_rank) + "," + format_number(k.frequency_hz) + "," +
             format_number(k.period_s) + "," + format_number(k.magnitude) + "," + format_number(k.relative_power) + "\n";
  for (const auto& s : report.skipped)
    std::cerr << "skipped " << s.month.to_string() << ": " << s.reason << "\n";
  if (!a.svg.empty() && !report.periods.empty())
    write_text(a.svg, spectrum_svg(report.periods.front().spectrum, report.periods.front().peaks));
  Json doc = to_document(report);
  if (!a.asset.empty()) doc["asset_id"] = a.asset;
  emit(c, doc, csv);
  return 0;
}

// ---- baseline -------------------------------------------------------------

struct BaselineArgs {
  std::string asset;
  std::string file;
  std::string month;
  std::string epsilon = "0.5";
  std::size_t min_points = 5;
  double floor_wh = kDefaultLowLoadFloorWh;
  std::string ceiling_wh = "2500";
  std::optional<double> period_s;
  std::string medium = "median";
  double fraction = kMaxAdjustmentFraction;
  std::string direction = "downward";
  std::string band_out;
  bool no_store = false;
};

int run_baseline(const Common& c, const BaselineArgs& a) {
  BaselineRequest req;
  const auto month = YearMonth::parse(a.month);
  if (!month) throw Error(ErrorCode::BadRequest, "--month must be YYYY-MM");
  req.month = *month;
  if (a.epsilon == "auto") {
    req.epsilon_wh.reset();
  } else {
    const auto kwh = parse_number(a.epsilon);
    if (!kwh || *kwh <= 0.0) throw Error(ErrorCode::InvalidParameters, "--epsilon must be a positive kWh value or auto");
    req.epsilon_wh = *kwh * 1000.0;
  }
  req.min_points = a.min_points;
  req.floor_wh = a.floor_wh;
  if (a.ceiling_wh == "none") {
    req.ceiling_wh.reset();
  } else {
    const auto v = parse_number(a.ceiling_wh);
    if (!v) throw Error(ErrorCode::InvalidParameters, "--ceiling-wh must be a number or none");
    req.ceiling_wh = *v;
  }
  req.period_s = a.period_s;
  req.medium = *parse_medium_rule(a.medium);

  const BaselineSet set = compute_baselines(load_series(c, a.asset, a.file), req);
  const FlexibilityBand band = flexibility_band(set, *parse_flex_direction(a.direction), a.fraction);
  if (!a.asset.empty() && a.file.empty() && !a.no_store) open_store(c).put_baselines(a.asset, set);
  if (!a.band_out.empty())
    write_text(a.band_out, c.document() ? dump_document(to_document(band, set)) : format_band_csv(band));
  Json doc = to_document(set);
  if (!a.asset.empty()) doc["asset_id"] = a.asset;
  emit(c, doc, format_baseline_csv(set));
  return 0;
}

// ---- train-hvac -----------------------------------------------------------

struct TrainArgs {
  std::string asset;
  std::string file;
  std::string device;
  std::optional<double> rated_kw;
  std::uint64_t seed = 42;
  std::int64_t step_s = 900;
  std::size_t trees = 100;
  std::string model_out;
};

int run_train(const Common& c, const TrainArgs& a) {
  std::vector<HvacSample> samples;
  std::string device = a.device.empty() ? a.asset : a.device;
  double rated = a.rated_kw.value_or(0.0);
  std::optional<Store> store;
  if (!a.file.empty()) {
    const HvacCsv parsed = parse_hvac_csv(read_text(a.file));
    for (const auto& e : parsed.errors) std::cerr << "line " << e.line << ": " << to_string(e.code) << ": " << e.message << "\n";
    samples = parsed.samples;
  } else {
    store.emplace(store_dir(c));
    const AssetRecord rec = store->asset(a.asset);
    if (rec.kind != AssetKind::hvac_unit) throw Error(ErrorCode::InvalidParameters, a.asset + " is not an hvac unit");
    if (!a.rated_kw) rated = *rec.rated_power_kw;
    samples = store->hvac_samples(a.asset);
  }
  if (device.empty()) throw Error(ErrorCode::InvalidParameters, "--device is required with --file");
  if (!(rated > 0.0)) throw Error(ErrorCode::InvalidParameters, "--rated-kw must be positive");
  HvacTrainingConfig config;
  config.training.step_s = a.step_s;
  config.forest.seed = a.seed;
  config.forest.n_trees = a.trees;
  HvacModelPair model = train_hvac_models(device, rated, samples, config);
  model.created_by = "flexkit train-hvac";
  if (store) store->put_model(model);
  if (!a.model_out.empty()) write_text(a.model_out, serialize_model(model));
  const auto& t = model.thermal.train_metrics();
  const auto& s = model.state.train_metrics();
  std::string csv = "device_id,mode,thermal_mae_c,thermal_r2,state_accuracy,state_f1,ridge_fallback\n";
  csv += device + "," + std::string(to_string(model.thermal.mode())) + "," + format_number(t.mae) + "," +
         format_number(t.r2) + "," + format_number(s.accuracy) + "," + format_number(s.f1) + "," +
         (model.thermal.ridge_fallback() ? "true" : "false") + "\n";
  emit(c, model_summary_document(model), csv);
  return 0;
}

// ---- forecast-flex --------------------------------------------------------

struct ForecastArgs {
  std::string asset;
  std::string model;
  std::string telemetry;
  double baseline_set = 24.0;
  double flex_set = 26.0;
  std::size_t horizon = 12;
  std::string direction = "downward";
  std::string at;
  std::string outdoor;
};

std::string format_forecast_csv(const FlexibilityForecast& f) {
  std::string out = "step,timestamp,available_flex_kw,baseline_state,flex_state\n";
  for (std::size_t i = 0; i < f.available_flex_kw.size(); ++i)
    out += std::to_string(i) + "," + format_rfc3339(f.start_time + static_cast<EpochSeconds>(i) * f.step_s) + "," +
           format_number(f.available_flex_kw[i]) + "," + std::to_string(f.baseline_states[i]) + "," +
           std::to_string(f.flex_states[i]) + "\n";
  return out;
}

int run_forecast(const Common& c, const ForecastArgs& a) {
  std::optional<Store> store;
  std::optional<HvacModelPair> model;
  std::vector<HvacSample> samples;
  if (!a.model.empty()) {
    model = parse_model(read_text(a.model));
  } else {
    store.emplace(store_dir(c));
    model = store->model(a.asset);
    if (!model) throw Error(ErrorCode::NotFound, "no trained model for " + a.asset);
  }
  if (!a.telemetry.empty()) {
    samples = parse_hvac_csv(read_text(a.telemetry)).samples;
  } else {
    if (!store) store.emplace(store_dir(c));
    samples = store->hvac_samples(a.asset.empty() ? model->device_id : a.asset);
  }
  ForecastRequest req;
  req.device_id = model->device_id;
  req.baseline_set_temp_c = a.baseline_set;
  req.flex_set_temp_c = a.flex_set;
  req.horizon_steps = a.horizon;
  req.step_s = model->step_s;
  req.rated_power_kw = model->rated_power_kw;
  req.direction = *parse_flex_direction(a.direction);
  if (!a.outdoor.empty())
    for (auto field : split_csv_fields(a.outdoor)) {
      const auto v = parse_number(field);
      if (!v) throw Error(ErrorCode::InvalidParameters, "--outdoor must be a comma-separated list of numbers");
      req.outdoor_forecast.push_back(*v);
    }
  std::optional<EpochSeconds> at;
  if (!a.at.empty()) {
    at = parse_rfc3339(a.at);
    if (!at) throw Error(ErrorCode::BadRequest, "--at must be an RFC 3339 timestamp");
  }
  const HvacSample origin = forecast_origin(samples, model->step_s, at);
  const FlexibilityForecast f = forecast_flexibility(model->thermal, model->state, origin, req);
  if (store) store->put_forecast(f);
  emit(c, to_document(f), format_forecast_csv(f));
  return 0;
}

// ---- solve-event ----------------------------------------------------------

struct SolveArgs {
  std::string event;
  std::string contracts;
  std::vector<std::string> forecasts;
  std::string policy = "proportional";
  std::string mode = "event_total";
  std::string feasibility_out;
  std::string plan_document_out;
};

std::vector<Json> json_items(const Json& doc, const char* key) {
  if (doc.is_array()) return {doc.begin(), doc.end()};
  if (doc.is_object() && doc.contains(key) && doc[key].is_array()) return {doc[key].begin(), doc[key].end()};
  return {doc};
}

int run_solve(const Common& c, const SolveArgs& a) {
  const DrEvent event = event_from_document(read_json(a.event));
  std::vector<Contract> contracts;
  std::vector<FlexibilityForecast> forecasts;
  if (!a.contracts.empty()) {
    for (const auto& item : json_items(read_json(a.contracts), "contracts")) contracts.push_back(contract_from_document(item));
  } else {
    contracts = open_store(c).contracts();
  }
  if (!a.forecasts.empty()) {
    for (const auto& path : a.forecasts)
      for (const auto& item : json_items(read_json(path), "forecasts")) forecasts.push_back(forecast_from_document(item));
  } else {
    forecasts = open_store(c).forecasts();
  }
  AllocationOptions options{*parse_allocation_policy(a.policy), *parse_objective_mode(a.mode)};
  const AllocationPlan plan = solve_allocation(event, contracts, forecasts, options);
  if (!a.feasibility_out.empty())
    write_text(a.feasibility_out, dump_document(to_document(feasibility_report(event, contracts, forecasts, options.mode))));
  if (!a.plan_document_out.empty()) write_text(a.plan_document_out, dump_document(to_document(plan)));
  emit(c, to_document(plan), format_plan_csv(plan));
  return 0;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
  std::string plan;
  std::string actuals;
};

int run_report(const Common& c, const ReportArgs& a) {
  const AllocationPlan plan = plan_from_document(read_json(a.plan));
  const auto text = read_text(a.actuals);
  MeteredActuals actuals;
  if (trim(text).starts_with("{")) {
    try {
      actuals = actuals_from_document(Json::parse(text), plan);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadRequest, a.actuals + ": " + e.what());
    }
  } else {
    actuals = parse_actuals_csv(text, plan);
  }
  const FulfillmentReport report = track_fulfillment(plan, actuals);
  emit(c, to_document(report), format_fulfillment_csv(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flexkit: demand-response flexibility toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "flexkit 0.3.0");

  Common common;

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  add_common(cmd_synth, common);
  cmd_synth->add_option("--scenario", synth.scenario)->check(CLI::IsMember({"industrial_park", "apartment_block"}));
  cmd_synth->add_option("--seed", synth.seed, "Random seed");
  cmd_synth->add_option("--out-dir", synth.out_dir, "Directory for the generated files");
  cmd_synth->add_option("--count", synth.count, "Buildings or apartments")->check(CLI::Range(1, 99));
  cmd_synth->add_option("--months", synth.months, "Months of meter data")->check(CLI::Range(1, 120));
  cmd_synth->add_option("--days", synth.days, "Days of HVAC telemetry")->check(CLI::Range(1, 3650));
  cmd_synth->add_option("--noise", synth.noise, "Noise level (Wh or degC)")->check(CLI::NonNegativeNumber);

  IngestArgs ingest;
  auto* cmd_ingest = app.add_subcommand("ingest", "Ingest a telemetry CSV for an asset");
  add_common(cmd_ingest, common);
  cmd_ingest->add_option("--asset", ingest.asset)->required();
  cmd_ingest->add_option("--file", ingest.file)->required()->check(CLI::ExistingFile);
  cmd_ingest->add_option("--kind", ingest.kind, "Create the asset with this kind if missing")
      ->check(CLI::IsMember({"building_meter", "hvac_unit"}));
  cmd_ingest->add_option("--rated-kw", ingest.rated_kw)->check(CLI::PositiveNumber);
  cmd_ingest->add_option("--location", ingest.location);
  cmd_ingest->add_option("--interval-s", ingest.interval_s)->check(CLI::NonNegativeNumber);

  SpectrumArgs spectrum;
  auto* cmd_spectrum = app.add_subcommand("spectrum", "Dominant periods per month");
  add_common(cmd_spectrum, common);
  auto* sp_asset = cmd_spectrum->add_option("--asset", spectrum.asset);
  auto* sp_file = cmd_spectrum->add_option("--file", spectrum.file)->check(CLI::ExistingFile);
  sp_asset->excludes(sp_file);
  cmd_spectrum->add_option("--month", spectrum.month);
  cmd_spectrum->add_option("--max-peaks", spectrum.max_peaks)->check(CLI::Range(1, 100));
  cmd_spectrum->add_option("--min-relative-power", spectrum.min_relative_power)->check(CLI::Range(0.0, 1.0));
  cmd_spectrum->add_flag("--whole-history", spectrum.whole_history);
  cmd_spectrum->add_option("--svg", spectrum.svg, "Also write an SVG plot of the first month");

  BaselineArgs baseline;
  auto* cmd_baseline = app.add_subcommand("baseline", "Baseline envelopes");
  cmd_baseline->require_subcommand(1);
  auto* cmd_compute = cmd_baseline->add_subcommand("compute", "Derive min/medium/max baselines for a month");
  add_common(cmd_compute, common);
  auto* bl_asset = cmd_compute->add_option("--asset", baseline.asset);
  auto* bl_file = cmd_compute->add_option("--file", baseline.file)->check(CLI::ExistingFile);
  bl_asset->excludes(bl_file);
  cmd_compute->add_option("--month", baseline.month)->required();
  cmd_compute->add_option("--epsilon", baseline.epsilon, "DBSCAN radius in kWh, or auto");
  cmd_compute->add_option("--min-points", baseline.min_points)->check(CLI::Range(2, 100000));
  cmd_compute->add_option("--floor-wh", baseline.floor_wh)->check(CLI::NonNegativeNumber);
  cmd_compute->add_option("--ceiling-wh", baseline.ceiling_wh, "High-load ceiling in Wh, or none");
  cmd_compute->add_option("--period-s", baseline.period_s, "Cycle length; detected when omitted")->check(CLI::PositiveNumber);
  cmd_compute->add_option("--medium", baseline.medium)->check(CLI::IsMember({"median", "mean"}));
  cmd_compute->add_option("--fraction", baseline.fraction, "Adjustment fraction for the band");
  cmd_compute->add_option("--direction", baseline.direction)->check(CLI::IsMember({"upward", "downward"}));
  cmd_compute->add_option("--band-out", baseline.band_out, "Write the flexibility band here");
  cmd_compute->add_flag("--no-store", baseline.no_store, "Do not persist the result");

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train-hvac", "Train the thermal model and state predictor");
  add_common(cmd_train, common);
  auto* tr_asset = cmd_train->add_option("--asset", train.asset);
  auto* tr_file = cmd_train->add_option("--file", train.file)->check(CLI::ExistingFile);
  tr_asset->excludes(tr_file);
  cmd_train->add_option("--device", train.device);
  cmd_train->add_option("--rated-kw", train.rated_kw)->check(CLI::PositiveNumber);
  cmd_train->add_option("--seed", train.seed, "Forest seed");
  cmd_train->add_option("--step-s", train.step_s)->check(CLI::PositiveNumber);
  cmd_train->add_option("--trees", train.trees)->check(CLI::Range(1, 10000));
  cmd_train->add_option("--model-out", train.model_out, "Write the model artifact here");

  ForecastArgs forecast;
  auto* cmd_forecast = app.add_subcommand("forecast-flex", "Forecast HVAC flexibility");
  add_common(cmd_forecast, common);
  cmd_forecast->add_option("--asset", forecast.asset);
  cmd_forecast->add_option("--model", forecast.model)->check(CLI::ExistingFile);
  cmd_forecast->add_option("--telemetry", forecast.telemetry)->check(CLI::ExistingFile);
  cmd_forecast->add_option("--baseline-set", forecast.baseline_set);
  cmd_forecast->add_option("--flex-set", forecast.flex_set);
  cmd_forecast->add_option("--horizon", forecast.horizon);
  cmd_forecast->add_option("--direction", forecast.direction)->check(CLI::IsMember({"upward", "downward"}));
  cmd_forecast->add_option("--at", forecast.at, "Forecast from the last step at or before this time");
  cmd_forecast->add_option("--outdoor", forecast.outdoor, "Outdoor forecast, comma-separated degC per step");

  SolveArgs solve;
  auto* cmd_solve = app.add_subcommand("solve-event", "Allocate a DR event across contracts");
  add_common(cmd_solve, common);
  cmd_solve->add_option("--event", solve.event)->required()->check(CLI::ExistingFile);
  cmd_solve->add_option("--contracts", solve.contracts)->check(CLI::ExistingFile);
  cmd_solve->add_option("--forecasts", solve.forecasts)->check(CLI::ExistingFile);
  cmd_solve->add_option("--policy", solve.policy)->check(CLI::IsMember({"proportional", "greedy_cheapest_first"}));
  cmd_solve->add_option("--mode", solve.mode)->check(CLI::IsMember({"event_total", "per_step"}));
  cmd_solve->add_option("--feasibility-out", solve.feasibility_out);
  cmd_solve->add_option("--plan-document-out", solve.plan_document_out);

  ReportArgs report;
  auto* cmd_report = app.add_subcommand("report", "Compare planned and metered delivery");
  add_common(cmd_report, common);
  cmd_report->add_option("--plan", report.plan, "Plan document")->required()->check(CLI::ExistingFile);
  cmd_report->add_option("--actuals", report.actuals, "Actuals CSV or document")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if ((cmd_spectrum->parsed() && spectrum.asset.empty() && spectrum.file.empty()) ||
      (cmd_compute->parsed() && baseline.asset.empty() && baseline.file.empty()) ||
      (cmd_train->parsed() && train.asset.empty() && train.file.empty()) ||
      (cmd_forecast->parsed() && forecast.asset.empty() && forecast.model.empty())) {
    std::cerr << "error: one of --asset or --file (--model for forecast-flex) is required\n";
    return 2;
  }

  try {
    if (cmd_synth->parsed()) return run_synth(common, synth);
    if (cmd_ingest->parsed()) return run_ingest(common, ingest);
    if (cmd_spectrum->parsed()) return run_spectrum(common, spectrum);
    if (cmd_compute->parsed()) return run_baseline(common, baseline);
    if (cmd_train->parsed()) return run_train(common, train);
    if (cmd_forecast->parsed()) return run_forecast(common, forecast);
    if (cmd_solve->parsed()) return run_solve(common, solve);
    if (cmd_report->parsed()) return run_report(common, report);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
