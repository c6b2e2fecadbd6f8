// fpca: command-line front end for the in-pixel convolution array toolkit.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpca/analog.hpp"
#include "fpca/config.hpp"
#include "fpca/cost.hpp"
#include "fpca/scheduler.hpp"
#include "fpca/surrogate.hpp"
#include "fpca/surrogate_io.hpp"
#include "fpca/tensor_io.hpp"
#include "fpca/weight_plane.hpp"

namespace {

constexpr const char* kVersion = "fpca 1.0.0";

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("FPCA_LOG");
  if (!env) return LogLevel::Error;
  const std::string v = env;
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  return LogLevel::Error;
}

void log(LogLevel level, const std::string& msg) {
  static const LogLevel threshold = log_level();
  if (level > threshold) return;
  static const char* names[] = {"error", "info", "debug"};
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

// Config problems are validation failures (exit 3) whether they come from parsing or checks.
struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fpca::ValidatedConfig load_validated(const std::string& path) {
  try {
    return fpca::validate(fpca::load_config(path));
  } catch (const fpca::ConfigError& e) {
    throw ValidationFailure(e.what());
  } catch (const fpca::Error& e) {
    if (e.code() == fpca::Errc::IoError) throw;
    throw ValidationFailure(e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fpca::Error(fpca::Errc::IoError, "cannot write '" + path + "'");
  out << text;
}

void write_manifest(const std::string& out, const std::string& command, nlohmann::json inputs,
                    nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json m = {{"command", command}, {"version", kVersion}, {"inputs", std::move(inputs)}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_text(out + ".manifest.json", m.dump(2) + "\n");
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

struct OracleFlags {
  std::string kind = "saturating";
  std::optional<double> kappa, beta, v_max;
};

fpca::DeviceModel make_oracle(const OracleFlags& f, const nlohmann::json& defaults = {}) {
  nlohmann::json j = defaults.is_object() ? defaults : nlohmann::json::object();
  if (j.value("kind", std::string()) != f.kind) j = {{"kind", f.kind}};
  if (f.v_max) j["v_max"] = *f.v_max;
  if (f.kappa) j["kappa"] = *f.kappa;
  if (f.beta) j["beta"] = *f.beta;
  return fpca::oracle_from_json(j);
}

void add_oracle_flags(CLI::App* cmd, OracleFlags& f, const char* name) {
  cmd->add_option(name, f.kind, "oracle device model")->check(CLI::IsMember({"ideal", "saturating"}));
  cmd->add_option("--kappa", f.kappa, "saturating oracle loading constant");
  cmd->add_option("--beta", f.beta, "saturating oracle per-pixel saturation");
  cmd->add_option("--v-max", f.v_max, "oracle full-scale voltage");
}

int cmd_validate(const std::string& config) {
  const auto cfg = load_validated(config);
  const auto geom = fpca::derive_geometry(cfg);
  std::cout << nlohmann::json{{"config", fpca::to_json(cfg.raw())}, {"geometry", fpca::to_json(geom)}}.dump(2)
            << '\n';
  return 0;
}

struct RunFlags {
  std::string config, image, weights, model = "ideal", surrogate, mask, out;
  long bn_offset = 0;
  OracleFlags oracle;
};

fpca::RegionSkipMask load_mask(const std::string& path, const fpca::ValidatedConfig& cfg) {
  const auto geom = fpca::derive_geometry(cfg);
  if (path.empty()) return fpca::RegionSkipMask::all_active(geom, cfg->skip_block);
  std::ifstream in(path);
  if (!in) throw fpca::Error(fpca::Errc::IoError, "cannot open mask '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw fpca::Error(fpca::Errc::ParseError, path + ": " + e.what());
  }
  return fpca::mask_from_json(j, geom);
}

int cmd_run(const RunFlags& f) {
  const auto cfg = load_validated(f.config);
  const auto kernels = fpca::load_kernels(f.weights);
  const auto block = fpca::WeightBlock::program(kernels, cfg);
  const auto mask = load_mask(f.mask, cfg);

  fpca::DeviceModel model;
  if (f.model == "ideal") {
    model = fpca::IdealLinear{cfg->v_max};
  } else if (f.model == "saturating") {
    OracleFlags o = f.oracle;
    o.kind = "saturating";
    o.v_max = cfg->v_max;
    model = make_oracle(o);
  } else {
    if (f.surrogate.empty()) throw fpca::Error(fpca::Errc::InvalidParameter, "--model surrogate needs --surrogate");
    auto file = fpca::load_surrogate(f.surrogate);
    model = fpca::SurrogateDevice{std::make_shared<const fpca::SurrogateModel<double>>(std::move(file.model))};
  }

  const fpca::Image raw = fpca::load_image(f.image);
  log(LogLevel::Info, "image " + std::to_string(raw.rows()) + "x" + std::to_string(raw.cols()));
  const auto frame = fpca::run_sensor_frame(raw, block, cfg, model, mask, f.bn_offset);
  log(LogLevel::Info, "executed " + std::to_string(frame.cycles) + " cycles");

  const auto tensor = fpca::to_tensor(frame);
  std::ostringstream os;
  fpca::write_tensor_csv(os, tensor);
  if (f.out.empty()) {
    std::cout << os.str();
    return 0;
  }
  if (f.out.size() > 5 && f.out.substr(f.out.size() - 5) == ".json") {
    write_text(f.out, fpca::to_json(tensor).dump() + "\n");
  } else {
    write_text(f.out, os.str());
  }
  write_manifest(f.out, "run",
                 {{"config", f.config}, {"image", f.image}, {"weights", f.weights}, {"mask", f.mask},
                  {"surrogate", f.surrogate}},
                 {{"model", fpca::model_name(model)},
                  {"bn_offset", f.bn_offset},
                  {"config", fpca::to_json(cfg.raw())},
                  {"cycles", frame.cycles},
                  {"skipped_outputs", frame.skipped.count()}});
  return 0;
}

struct FitFlags {
  OracleFlags oracle;
  fpca::FitOptions options;
  std::string out;
};

int cmd_fit(const FitFlags& f) {
  const auto oracle = make_oracle(f.oracle);
  fpca::FitOptions opt = f.options;
  opt.v_max = fpca::full_scale(oracle);
  fpca::SurrogateFile file;
  file.options = opt;
  file.oracle = fpca::oracle_to_json(oracle);
  file.model = std::visit(
      [&](const auto& m) -> fpca::SurrogateModel<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, fpca::SurrogateDevice>) {
          throw fpca::Error(fpca::Errc::InvalidParameter, "cannot fit against a surrogate");
        } else {
          return fpca::fit_surrogate<double>(m, opt);
        }
      },
      oracle);
  for (const auto& b : file.model.buckets)
    if (!b.reachable) log(LogLevel::Info, "bucket " + std::to_string(b.index) + " unreachable; borrowed anchor");
  const std::string text = fpca::to_json(file).dump(2) + "\n";
  emit(f.out, text);
  if (!f.out.empty()) write_manifest(f.out, "fit", nlohmann::json::object(), {{"oracle", file.oracle}});
  return 0;
}

struct PredictFlags {
  std::string surrogate, input, out;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
};

nlohmann::json prediction_json(const fpca::SurrogateModel<double>& m, const fpca::Column<double>& i,
                               const fpca::Column<double>& w) {
  const double est = fpca::estimate(m, i, w);
  const auto g = fpca::gradient(m, i, w);
  nlohmann::json j = {{"v_est", est},
                      {"bucket", fpca::select_bucket(m, est / m.v_max)},
                      {"sigmoid", fpca::predict_sigmoid(m, i, w)},
                      {"grad_current", std::vector<double>(g.d_current.data(), g.d_current.data() + g.d_current.size())},
                      {"grad_weight", std::vector<double>(g.d_weight.data(), g.d_weight.data() + g.d_weight.size())}};
  try {
    j["step"] = fpca::predict_step(m, i, w);
  } catch (const fpca::Error& e) {
    if (e.code() != fpca::Errc::EstimateOutOfRange) throw;
    j["step"] = nullptr;
    j["step_error"] = e.what();
  }
  return j;
}

int cmd_predict(const PredictFlags& f) {
  const auto file = fpca::load_surrogate(f.surrogate);
  const auto& m = file.model;
  nlohmann::json results = nlohmann::json::array();
  if (!f.input.empty()) {
    const auto t = fpca::read_tensor(f.input);
    if (t.shape.size() != 2 || t.shape[1] != 2) {
      throw fpca::Error(fpca::Errc::ShapeMismatch, "contributions must have shape [N, 2] (I, W per row)");
    }
    fpca::Column<double> i(t.shape[0]), w(t.shape[0]);
    for (int k = 0; k < t.shape[0]; ++k) {
      i(k) = t.values[2 * static_cast<std::size_t>(k)];
      w(k) = t.values[2 * static_cast<std::size_t>(k) + 1];
    }
    results.push_back(prediction_json(m, i, w));
  } else {
    fpca::Rng rng(f.seed);
    fpca::Column<double> i(m.pixel_count), w(m.pixel_count);
    for (std::size_t k = 0; k < f.trials; ++k) {
      fpca::random_contributions(rng, i, w);
      results.push_back(prediction_json(m, i, w));
    }
  }
  emit(f.out, nlohmann::json{{"predictions", results}}.dump(2) + "\n");
  if (!f.out.empty()) {
    write_manifest(f.out, "predict", {{"surrogate", f.surrogate}, {"input", f.input}},
                   {{"seed", f.seed}, {"trials", f.input.empty() ? f.trials : 1}});
  }
  return 0;
}

struct ReportFlags {
  std::string surrogate, out;
  OracleFlags oracle;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
};

int cmd_error_report(const ReportFlags& f) {
  const auto file = fpca::load_surrogate(f.surrogate);
  const auto oracle = make_oracle(f.oracle, file.oracle);
  const auto report = std::visit(
      [&](const auto& o) -> fpca::ErrorReport {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, fpca::SurrogateDevice>) {
          throw fpca::Error(fpca::Errc::InvalidParameter, "oracle must be ideal or saturating");
        } else {
          return fpca::error_report(file.model, o, f.trials, f.seed);
        }
      },
      oracle);
  emit(f.out, fpca::to_json(report).dump(2) + "\n");
  if (!f.out.empty()) {
    write_manifest(f.out, "error-report", {{"surrogate", f.surrogate}},
                   {{"seed", f.seed}, {"trials", f.trials}, {"oracle", fpca::oracle_to_json(oracle)}});
  }
  return 0;
}

struct SweepFlags {
  std::string config, out;
  std::vector<int> strides, channels, binnings;
  std::optional<double> t_exp_us, t_adc_us;
};

int cmd_sweep(const SweepFlags& f) {
  const auto cfg = load_validated(f.config);
  auto consts = fpca::CostConstants::for_config(cfg);
  if (f.t_exp_us) consts.t_exp = fpca::units::microseconds(*f.t_exp_us);
  if (f.t_adc_us) consts.t_adc = fpca::units::microseconds(*f.t_adc_us);
  const auto table = fpca::sweep(cfg.raw(), {f.strides, f.channels, f.binnings}, consts);
  for (const auto& s : table.skipped) log(LogLevel::Info, "skipped grid point: " + s.reason);
  emit(f.out, fpca::sweep_csv(table, cfg.raw(), consts));
  if (!f.out.empty()) {
    write_manifest(f.out, "sweep-cost", {{"config", f.config}}, {{"constants", fpca::to_json(consts)}});
  }
  return 0;
}

int cmd_dump_schedule(const std::string& config, const std::string& mask_path, const std::string& out) {
  const auto cfg = load_validated(config);
  const auto mask = load_mask(mask_path, cfg);
  const auto schedule = fpca::enumerate(cfg, mask);
  const bool json = out.size() > 5 && out.substr(out.size() - 5) == ".json";
  emit(out, json ? fpca::to_json(schedule).dump() + "\n" : fpca::to_trace(schedule));
  if (!out.empty()) {
    write_manifest(out, "dump-schedule", {{"config", config}, {"mask", mask_path}},
                   {{"n_c", schedule.size()}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Field-programmable in-pixel convolution array simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config;
  auto* validate = app.add_subcommand("validate", "check a config and print its derived geometry");
  validate->add_option("--config", config, "config JSON")->required();

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "execute one frame through the array");
  run_cmd->add_option("--config", run.config)->required();
  run_cmd->add_option("--image", run.image, "PGM/PPM or [rows, cols, 3] tensor")->required();
  run_cmd->add_option("--weights", run.weights, "[c_o, k, k, 3] kernel tensor")->required();
  run_cmd->add_option("--model", run.model)->check(CLI::IsMember({"ideal", "saturating", "surrogate"}));
  run_cmd->add_option("--surrogate", run.surrogate, "fitted surrogate JSON");
  run_cmd->add_option("--mask", run.mask, "region-skip JSON bitmap");
  run_cmd->add_option("--bn-offset", run.bn_offset, "ADC counter preset");
  run_cmd->add_option("--kappa", run.oracle.kappa);
  run_cmd->add_option("--beta", run.oracle.beta);
  run_cmd->add_option("--out", run.out, "output tensor (.csv or .json)");

  FitFlags fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a bucket-select surrogate against an oracle");
  add_oracle_flags(fit_cmd, fit.oracle, "--oracle");
  fit_cmd->add_option("--pixels", fit.options.pixel_count, "N");
  fit_cmd->add_option("--subset", fit.options.subset_size, "m");
  fit_cmd->add_option("--buckets", fit.options.buckets);
  fit_cmd->add_option("--degree", fit.options.degree);
  fit_cmd->add_option("--grid", fit.options.grid);
  fit_cmd->add_option("--slope", fit.options.slope);
  fit_cmd->add_option("--out", fit.out);

  PredictFlags predict;
  auto* predict_cmd = app.add_subcommand("predict", "evaluate a fitted surrogate and its gradient");
  predict_cmd->add_option("--surrogate", predict.surrogate)->required();
  predict_cmd->add_option("--input", predict.input, "[N, 2] tensor of (I, W) rows");
  predict_cmd->add_option("--trials", predict.trials, "random vectors when no --input");
  predict_cmd->add_option("--seed", predict.seed);
  predict_cmd->add_option("--out", predict.out);

  ReportFlags report;
  auto* report_cmd = app.add_subcommand("error-report", "surrogate error against an oracle");
  report_cmd->add_option("--surrogate", report.surrogate)->required();
  add_oracle_flags(report_cmd, report.oracle, "--oracle");
  report_cmd->add_option("--trials", report.trials);
  report_cmd->add_option("--seed", report.seed);
  report_cmd->add_option("--out", report.out);

  SweepFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep-cost", "energy/latency/bandwidth sweep as CSV");
  sweep_cmd->add_option("--config", sweep.config)->required();
  sweep_cmd->add_option("--strides", sweep.strides, "default 1..n")->delimiter(',');
  sweep_cmd->add_option("--channels", sweep.channels)->delimiter(',');
  sweep_cmd->add_option("--binnings", sweep.binnings)->delimiter(',');
  sweep_cmd->add_option("--t-exp-us", sweep.t_exp_us);
  sweep_cmd->add_option("--t-adc-us", sweep.t_adc_us);
  sweep_cmd->add_option("--out", sweep.out);

  std::string sched_config, sched_mask, sched_out;
  auto* dump = app.add_subcommand("dump-schedule", "write the control schedule (.json or trace)");
  dump->add_option("--config", sched_config)->required();
  dump->add_option("--mask", sched_mask);
  dump->add_option("--out", sched_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return cmd_validate(config);
    if (*run_cmd) return cmd_run(run);
    if (*fit_cmd) return cmd_fit(fit);
    if (*predict_cmd) return cmd_predict(predict);
    if (*report_cmd) return cmd_error_report(report);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*dump) return cmd_dump_schedule(sched_config, sched_mask, sched_out);
  } catch (const ValidationFailure& e) {
    log(LogLevel::Error, e.what());
    return 3;
  } catch (const std::exception& e) {
    log(LogLevel::Error, e.what());
    return 1;
  }
  return 2;
}
