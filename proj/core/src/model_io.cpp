#include <nlohmann/json.hpp>

#include <cstdio>

#include "flexkit/error.hpp"
#include "flexkit/hvac.hpp"

namespace flexkit {
namespace {

using json = nlohmann::json;

constexpr const char* kThermalFeatures[] = {"indoor_c", "outdoor_c", "state"};
constexpr const char* kStateFeatures[] = {"predicted_indoor_c", "set_temp_c", "indoor_minus_set_c", "previous_state",
                                          "outdoor_c"};

json forest_params_json(const ForestParams& p) {
  json j = {{"n_trees", p.n_trees},
            {"max_depth", p.max_depth},
            {"min_samples_split", p.min_samples_split},
            {"min_samples_leaf", p.min_samples_leaf},
            {"bootstrap", p.bootstrap},
            {"seed", p.seed},
            {"split_criterion", "gini"}};
  j["max_features"] = p.max_features ? json(*p.max_features) : json("sqrt");
  return j;
}

ForestParams forest_params_from(const json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<std::size_t>();
  p.max_depth = j.at("max_depth").get<std::size_t>();
  p.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  p.seed = j.at("seed").get<std::uint64_t>();
  if (j.at("max_features").is_number()) p.max_features = j.at("max_features").get<std::size_t>();
  return p;
}

}  // namespace

std::string serialize_model(const HvacModelPair& m) {
  char version[16];
  std::snprintf(version, sizeof version, "%d.%d", kModelFormatMajor, kModelFormatMinor);

  json norm_params = json::array();
  for (const auto& p : m.thermal.normalization().params()) norm_params.push_back({p.offset, p.scale});

  json trees = json::array();
  for (const auto& tree : m.state.forest().trees()) {
    json nodes = json::array();
    for (const auto& n : tree.nodes()) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
    trees.push_back(std::move(nodes));
  }

  const auto& tm = m.thermal.train_metrics();
  const auto& sm = m.state.train_metrics();
  json doc = {
      {"format", kModelFormat},
      {"version", version},
      {"device_id", m.device_id},
      {"rated_power_kw", m.rated_power_kw},
      {"step_s", m.step_s},
      {"provenance",
       {{"created_by", m.created_by},
        {"seed", m.seed},
        {"thermal_rows", m.thermal_rows},
        {"state_rows", m.state_rows},
        {"split", "chronological"},
        {"ridge_fallback", m.thermal.ridge_fallback()},
        {"ridge_damping", kRidgeDamping}}},
      {"thermal",
       {{"features", kThermalFeatures},
        {"mode", to_string(m.thermal.mode())},
        {"coefficients", m.thermal.coefficients()},
        {"normalization", {{"method", to_string(m.thermal.normalization().method())}, {"params", norm_params}}},
        {"metrics", {{"mae_c", tm.mae}, {"r2", tm.r2}, {"rows", tm.rows}}}}},
      {"state",
       {{"features", kStateFeatures},
        {"n_features", m.state.forest().n_features()},
        {"params", forest_params_json(m.state.forest().params())},
        {"metrics",
         {{"accuracy", sm.accuracy}, {"precision", sm.precision}, {"recall", sm.recall}, {"f1", sm.f1}, {"rows", sm.rows}}},
        {"node_layout", {"feature", "threshold", "left", "right", "label"}},
        {"trees", trees}}},
  };
  return doc.dump(1) + "\n";
}

HvacModelPair parse_model(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kModelFormat) {
      throw Error(ErrorCode::ModelFormat, "not a flexkit HVAC model artifact");
    }
    const auto version = doc.at("version").get<std::string>();
    int major = 0, minor = 0;
    if (std::sscanf(version.c_str(), "%d.%d", &major, &minor) != 2 || major != kModelFormatMajor) {
      throw Error(ErrorCode::ModelFormat, "unsupported model format version " + version);
    }

    HvacModelPair m;
    m.device_id = doc.at("device_id").get<std::string>();
    m.rated_power_kw = doc.at("rated_power_kw").get<double>();
    m.step_s = doc.at("step_s").get<std::int64_t>();
    const auto& prov = doc.at("provenance");
    m.created_by = prov.at("created_by").get<std::string>();
    m.seed = prov.at("seed").get<std::uint64_t>();
    m.thermal_rows = prov.at("thermal_rows").get<std::size_t>();
    m.state_rows = prov.at("state_rows").get<std::size_t>();

    const auto& th = doc.at("thermal");
    const auto method = parse_normalization_method(th.at("normalization").at("method").get<std::string>());
    const auto mode = parse_hvac_mode(th.at("mode").get<std::string>());
    if (!method || !mode) throw Error(ErrorCode::ModelFormat, "unknown normalization method or mode");
    std::vector<FeatureScale> scales;
    for (const auto& p : th.at("normalization").at("params")) scales.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    const auto& tmj = th.at("metrics");
    RegressionMetrics tm{tmj.at("mae_c").get<double>(), tmj.at("r2").get<double>(), tmj.at("rows").get<std::size_t>()};
    m.thermal = ThermalModel(th.at("coefficients").get<std::vector<double>>(), NormalizationSpec(*method, std::move(scales)),
                             tm, prov.at("ridge_fallback").get<bool>(), *mode);

    const auto& st = doc.at("state");
    const auto& smj = st.at("metrics");
    ClassificationMetrics sm{smj.at("accuracy").get<double>(), smj.at("precision").get<double>(),
                             smj.at("recall").get<double>(), smj.at("f1").get<double>(), smj.at("rows").get<std::size_t>()};
    const auto n_features = st.at("n_features").get<std::size_t>();
    std::vector<DecisionTree> trees;
    for (const auto& t : st.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& n : t) {
        TreeNode node{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(), n.at(4).get<int>()};
        nodes.push_back(node);
      }
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& node = nodes[i];
        if (node.feature < 0) continue;
        const auto in_range = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(nodes.size()); };
        if (node.feature >= static_cast<int>(n_features) || !in_range(node.left) || !in_range(node.right)) {
          throw Error(ErrorCode::ModelFormat, "corrupt tree node");
        }
      }
      trees.emplace_back(std::move(nodes));
    }
    m.state = StatePredictor(RandomForest(forest_params_from(st.at("params")), n_features, std::move(trees)), sm);
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ModelFormat, std::string("malformed model artifact: ") + e.what());
  }
}

}  // namespace flexkit
