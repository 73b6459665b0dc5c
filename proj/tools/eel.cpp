#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eel/data.hpp"
#include "eel/ensemble.hpp"
#include "eel/experiment.hpp"
#include "eel/serialization.hpp"
#include "eel/synthetic.hpp"

namespace {

// 0 ok, 1 usage or config, 2 data, 3 some repetitions failed, 4 internal error
enum Exit { ok = 0, usage = 1, data = 2, partial = 3, internal = 4 };

int cmd_run(const std::string& config_path, const std::string& out_override, const std::optional<std::uint64_t>& seed,
            const std::optional<std::size_t>& jobs) {
  eel::ExperimentConfig cfg = eel::load_config(config_path);
  if (!out_override.empty()) cfg.out = out_override;
  if (seed) cfg.seed = *seed;
  if (jobs) cfg.jobs = *jobs;
  if (cfg.out.empty()) throw eel::ConfigError("no output directory: set 'out' in the config or pass --out");
  const auto report = eel::run_experiment(cfg, [](const std::string& msg) { std::cerr << msg << '\n'; });
  eel::write_report(report, cfg.out);
  std::cout << eel::report_csv(report);
  std::cerr << "wrote " << cfg.out << "/report.csv (" << report.rows.size() << " rows)\n";
  return report.all_ok() ? ok : partial;
}

int cmd_synth(const eel::SyntheticSpec& spec, const std::string& out) {
  eel::write_synthetic_csv(spec, out);
  std::cerr << "wrote " << out << ": " << eel::generator_equation(spec) << '\n';
  return ok;
}

int cmd_predict(const std::string& model_path, const std::string& data_path, const std::string& out_path) {
  const eel::EnsembleModel model = eel::load_model(model_path);
  const auto loaded = eel::load_csv(data_path, model.target);
  const auto names = loaded.dataset.channel_names();
  if (names != model.channel_names) {
    std::string expected, got;
    for (const auto& n : model.channel_names) expected += (expected.empty() ? "" : ",") + n;
    for (const auto& n : names) got += (got.empty() ? "" : ",") + n;
    throw eel::DataError("channel schema mismatch: model expects [" + expected + "], data has [" + got + "]");
  }
  const eel::Vector pred = eel::predict_ensemble(model, loaded.dataset);
  std::ofstream file;
  if (!out_path.empty() && out_path != "-") {
    file.open(out_path);
    if (!file) throw eel::DataError("cannot write '" + out_path + "'");
  }
  std::ostream& out = file.is_open() ? file : std::cout;
  out << "index,prediction\n" << std::setprecision(17);
  for (Eigen::Index k = 0; k < pred.size(); ++k) out << model.history + static_cast<std::size_t>(k) << ',' << pred(k) << '\n';
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary ensemble learning for multivariate time series"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the full search and ensemble experiment");
  std::string config_path, run_out;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::size_t> run_jobs;
  run->add_option("--config", config_path, "experiment config (key = value)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "output directory (overrides 'out')");
  run->add_option("--seed", run_seed, "master seed (overrides 'seed')");
  run->add_option("--jobs", run_jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "write a synthetic multivariate series");
  eel::SyntheticSpec spec;
  std::string synth_out;
  synth->add_option("--length", spec.length, "number of rows")->capture_default_str();
  synth->add_option("--channels", spec.channels, "auxiliary channels")->capture_default_str();
  synth->add_option("--noise", spec.noise, "noise standard deviation")->capture_default_str();
  synth->add_option("--seed", spec.seed, "generator seed")->capture_default_str();
  synth->add_option("--coupling", spec.coupling, "weight of the lagged auxiliary sum")->capture_default_str();
  synth->add_option("--period", spec.period, "seasonal period")->capture_default_str();
  synth->add_option("--out", synth_out, "CSV path")->required();

  auto* predict = app.add_subcommand("predict", "apply a saved ensemble to a series");
  std::string model_path, data_path, predict_out;
  predict->add_option("--model", model_path, "model JSON")->required()->check(CLI::ExistingFile);
  predict->add_option("--data", data_path, "CSV with the training channel schema")->required()->check(CLI::ExistingFile);
  predict->add_option("--out", predict_out, "output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*run) return cmd_run(config_path, run_out, run_seed, run_jobs);
    if (*synth) return cmd_synth(spec, synth_out);
    if (*predict) return cmd_predict(model_path, data_path, predict_out);
  } catch (const eel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return usage;
  } catch (const eel::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return data;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return internal;
  }
  return usage;
}
