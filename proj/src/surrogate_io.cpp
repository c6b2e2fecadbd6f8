#include "fpca/surrogate_io.hpp"

#include <fstream>

namespace fpca {

namespace {

nlohmann::json surface_json(const Surface2D<double>& s) {
  const auto& c = s.coefficients();
  return {{"degree", s.degree()},
          {"coefficients", std::vector<double>(c.data(), c.data() + c.size())},
          {"residual_rms", s.residual_rms()}};
}

Surface2D<double> surface_from(const nlohmann::json& j) {
  const auto coeffs = j.at("coefficients").get<std::vector<double>>();
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  return Surface2D<double>(j.at("degree").get<int>(), std::move(v), j.at("residual_rms").get<double>());
}

nlohmann::json stats_json(const PredictorStats& p) {
  return {{"mean_abs_V", p.mean_abs},
          {"max_abs_V", p.max_abs},
          {"mean_abs_rel_vmax", p.mean_abs_rel_vmax},
          {"mean_rel_output", p.mean_rel_output}};
}

}  // namespace

nlohmann::json oracle_to_json(const DeviceModel& oracle) {
  if (const auto* m = std::get_if<IdealLinear>(&oracle)) return {{"kind", "ideal"}, {"v_max", m->v_max}};
  if (const auto* m = std::get_if<SaturatingOracle>(&oracle)) {
    return {{"kind", "saturating"}, {"v_max", m->v_max}, {"kappa", m->kappa}, {"beta", m->beta}};
  }
  return {{"kind", "surrogate"}};
}

DeviceModel oracle_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "ideal") return IdealLinear{j.value("v_max", 1.0)};
  if (kind == "saturating") {
    return SaturatingOracle{j.value("v_max", 1.0), j.value("kappa", 0.5), j.value("beta", 0.3)};
  }
  throw Error(Errc::ParseError, "oracle kind '" + kind + "' cannot be rebuilt from a file");
}

nlohmann::json to_json(const SurrogateFile& file) {
  const auto& m = file.model;
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& b : m.buckets) {
    buckets.push_back({{"index", b.index},
                       {"anchor", {b.anchor.current, b.anchor.weight}},
                       {"anchor_oracle_output", b.anchor.output},
                       {"anchor_output", b.anchor_output},
                       {"reachable", b.reachable},
                       {"surface", surface_json(b.surface)}});
  }
  return {{"format", "fpca-surrogate"},
          {"version", 1},
          {"v_max", m.v_max},
          {"pixel_count", m.pixel_count},
          {"subset_size", m.subset_size},
          {"slope", m.slope},
          {"fit", {{"degree", file.options.degree}, {"grid", file.options.grid}}},
          {"oracle", file.oracle},
          {"generic", surface_json(m.generic)},
          {"buckets", std::move(buckets)}};
}

SurrogateFile surrogate_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "fpca-surrogate") {
      throw Error(Errc::ParseError, "not a surrogate model file");
    }
    SurrogateFile f;
    auto& m = f.model;
    m.v_max = j.at("v_max").get<double>();
    m.pixel_count = j.at("pixel_count").get<int>();
    m.subset_size = j.at("subset_size").get<int>();
    m.slope = j.at("slope").get<double>();
    m.generic = surface_from(j.at("generic"));
    for (const auto& b : j.at("buckets")) {
      BucketModel<double> bucket;
      bucket.index = b.at("index").get<int>();
      const auto anchor = b.at("anchor").get<std::vector<double>>();
      if (anchor.size() != 2) throw Error(Errc::ParseError, "anchor must be [I, W]");
      bucket.anchor = {anchor[0], anchor[1], b.at("anchor_oracle_output").get<double>()};
      bucket.anchor_output = b.at("anchor_output").get<double>();
      bucket.reachable = b.at("reachable").get<bool>();
      bucket.surface = surface_from(b.at("surface"));
      m.buckets.push_back(std::move(bucket));
    }
    f.options.pixel_count = m.pixel_count;
    f.options.subset_size = m.subset_size;
    f.options.buckets = m.bucket_count();
    f.options.slope = m.slope;
    f.options.v_max = m.v_max;
    f.options.degree = j.at("fit").at("degree").get<int>();
    f.options.grid = j.at("fit").at("grid").get<int>();
    f.oracle = j.at("oracle");
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("surrogate: ") + e.what());
  }
}

void save_surrogate(const std::string& path, const SurrogateFile& file) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path + "'");
  out << to_json(file).dump(2) << '\n';
}

SurrogateFile load_surrogate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseError, path + ": " + e.what());
  }
  return surrogate_from_json(j);
}

nlohmann::json to_json(const ErrorReport& r) {
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& b : r.buckets)
    buckets.push_back({{"index", b.index}, {"count", b.count}, {"mean_abs_step_V", b.mean_abs_step}});
  return {{"trials", r.trials},
          {"seed", r.seed},
          {"v_max", r.v_max},
          {"step", stats_json(r.step)},
          {"sigmoid", stats_json(r.sigmoid)},
          {"buckets", std::move(buckets)},
          {"max_step_sigmoid_gap_V", r.max_step_sigmoid_gap},
          {"gap_trials", r.gap_trials}};
}

}  // namespace fpca
