// fdsim: generate workloads, calibrate, train the work predictor, simulate and sweep.

#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fairdispatch/config.hpp"
#include "fairdispatch/experiment.hpp"
#include "fairdispatch/report_io.hpp"
#include "fairdispatch/workload.hpp"

#ifndef FAIRDISPATCH_VERSION
#define FAIRDISPATCH_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using fd::Json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw fd::DataError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json manifest(const std::string& subcommand, const Json& config, std::uint64_t seed,
              const std::vector<fs::path>& inputs) {
  Json m;
  m["tool"] = "fdsim";
  m["version"] = FAIRDISPATCH_VERSION;
  m["subcommand"] = subcommand;
  m["seed"] = seed;
  m["config_hash"] = fd::fnv1a_hex(config.dump());
  m["config"] = config;
  Json files = Json::object();
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> entries;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".csv") entries.push_back(e.path());
      std::sort(entries.begin(), entries.end());
      for (const auto& e : entries) files[e.string()] = fd::fnv1a_hex(slurp(e));
    } else {
      files[p.string()] = fd::fnv1a_hex(slurp(p));
    }
  }
  m["inputs"] = files;
  m["versions"] = {{"compiler", __VERSION__},
                   {"cxx_standard", __cplusplus},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  return m;
}

struct SimArgs {
  std::optional<std::string> config;
  std::vector<std::string> overrides;
  std::optional<std::string> matching;
  std::optional<std::string> policy;
  std::optional<double> g;
  std::optional<double> omega;
  std::optional<std::string> model;
  bool reject = false;
  std::optional<double> baseline_g;
  std::optional<std::uint64_t> seed;
  std::optional<int> capacity;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", config, "simulation config JSON");
    app->add_option("--set", overrides, "override a config key, e.g. policy.g=0.4 (repeatable)");
    app->add_option("--matching", matching, "guarantee | delivery_time");
    app->add_option("--policy", policy, "fixed | dynamic | rating");
    app->add_option("--g", g, "fixed guarantee ratio");
    app->add_option("--omega", omega, "mean ratio for rating-based guarantees");
    app->add_option("--model", model, "GPR model JSON (dynamic mode or rejection)");
    app->add_flag("--reject", reject, "reject agents predicted to fall short of the guarantee");
    app->add_option("--baseline-g", baseline_g, "ratio used by the rejection test");
    app->add_option("--seed", seed, "simulation seed");
    app->add_option("--capacity", capacity, "override every agent's capacity");
  }

  /// Precedence: flag > config file > default.
  Json resolve() const {
    std::vector<std::string> all = overrides;
    auto push = [&](const std::string& k, const Json& v) { all.push_back(k + "=" + v.dump()); };
    if (matching) push("matching", *matching);
    if (policy) push("policy.mode", *policy);
    if (g) push("policy.g", *g);
    if (omega) push("policy.omega", *omega);
    if (model) push("policy.model", *model);
    if (reject) push("policy.rejection", true);
    if (baseline_g) push("policy.baseline_g", *baseline_g);
    if (seed) push("seed", *seed);
    if (capacity) push("capacity", *capacity);
    return fd::layered_config(fd::to_json(fd::SimSettings{}), config, all);
  }
};

fd::SimConfig load_sim_config(const Json& doc) {
  auto s = fd::sim_settings_from_json(doc);
  if (s.model_path) {
    Json j;
    try {
      j = Json::parse(slurp(*s.model_path));
      s.sim.policy.model = std::make_shared<const fd::GprModel>(fd::GprModel::from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw fd::DataError(*s.model_path + ": " + e.what());
    }
  }
  s.sim.validate();
  return s.sim;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw fd::ConfigError("cannot parse number '" + item + "' in list '" + text + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Food-delivery dispatch simulator with work guarantees"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FAIRDISPATCH_VERSION);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic workload");
  std::optional<std::string> gen_config;
  std::vector<std::string> gen_overrides;
  std::optional<std::uint64_t> gen_seed;
  std::optional<double> gen_orders, gen_supply;
  std::optional<int> gen_agents;
  std::string gen_out;
  bool gen_force = false;
  gen->add_option("-c,--config", gen_config, "workload config JSON");
  gen->add_option("--set", gen_overrides, "override a workload key (repeatable)");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--orders", gen_orders, "expected orders per day");
  gen->add_option("--agents", gen_agents, "agent sessions before supply scaling");
  gen->add_option("--supply-scale", gen_supply);
  gen->add_option("-o,--out", gen_out, "output directory")->required();
  gen->add_flag("--force", gen_force, "overwrite an existing output directory");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "estimate omega and collect GPR training rows");
  SimArgs cal_args;
  cal_args.add_to(cal);
  std::vector<std::string> cal_workloads;
  std::string cal_scales = "0.6,0.8,1,1.5,2";
  int cal_refine = 0;
  std::string cal_out;
  bool cal_force = false;
  cal->add_option("-w,--workload", cal_workloads, "workload directory (repeatable, one per day)")->required();
  cal->add_option("--scales", cal_scales, "supply scales for training runs");
  cal->add_option("--refine", cal_refine, "fixed-point refinements of omega");
  cal->add_option("-o,--out", cal_out)->required();
  cal->add_flag("--force", cal_force);

  // train-gpr
  auto* train = app.add_subcommand("train-gpr", "fit the work predictor");
  std::vector<std::string> train_files;
  bool train_rating = false;
  fd::FitOptions fit;
  fit.max_rows = 1000;
  std::string train_out;
  bool train_force = false;
  train->add_option("-t,--training", train_files, "training.csv (repeatable)")->required();
  train->add_flag("--rating", train_rating, "include agent rating as a feature");
  train->add_option("--max-iters", fit.max_iters);
  train->add_option("--max-rows", fit.max_rows, "subsample training rows above this count");
  train->add_option("--seed", fit.seed);
  train->add_option("-o,--out", train_out)->required();
  train->add_flag("--force", train_force);

  // sim
  auto* sim = app.add_subcommand("sim", "run one simulation");
  SimArgs sim_args;
  sim_args.add_to(sim);
  std::string sim_workload, sim_out;
  bool sim_force = false, sim_quiet = false;
  sim->add_option("-w,--workload", sim_workload)->required();
  sim->add_option("-o,--out", sim_out)->required();
  sim->add_flag("--force", sim_force);
  sim->add_flag("-q,--quiet", sim_quiet, "do not print the metrics table");

  // sweep
  auto* sw = app.add_subcommand("sweep", "fixed-guarantee runs over a grid of g");
  SimArgs sw_args;
  sw_args.add_to(sw);
  std::string sw_workload, sw_out;
  std::optional<std::string> sw_gs, sw_fracs;
  std::optional<double> sw_omega;
  bool sw_force = false;
  sw->add_option("-w,--workload", sw_workload)->required();
  sw->add_option("--gs", sw_gs, "comma-separated g values");
  sw->add_option("--sweep-omega", sw_omega, "omega scaling --fractions");
  sw->add_option("--fractions", sw_fracs, "comma-separated multiples of omega")->needs("--sweep-omega");
  sw->add_option("-o,--out", sw_out)->required();
  sw->add_flag("--force", sw_force);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      std::vector<std::string> all = gen_overrides;
      if (gen_seed) all.push_back("seed=" + std::to_string(*gen_seed));
      if (gen_orders) all.push_back("target_orders=" + Json(*gen_orders).dump());
      if (gen_agents) all.push_back("agent_count=" + std::to_string(*gen_agents));
      if (gen_supply) all.push_back("supply_scale=" + Json(*gen_supply).dump());
      const Json doc = fd::layered_config(fd::to_json(fd::WorkloadConfig{}), gen_config, all);
      const auto wc = fd::workload_config_from_json(doc);
      const auto w = fd::generate(wc);
      fd::StagedDir out(gen_out, gen_force);
      fd::save_workload(w, out.path());
      fd::write_json_file(out.path() / "workload_config.json", doc);
      fd::write_json_file(out.path() / "manifest.json", manifest("gen", doc, wc.seed, {}));
      out.commit();
      std::cout << "wrote " << w.orders.size() << " orders and " << w.agents.size() << " sessions to " << gen_out
                << "\n";
    } else if (*cal) {
      const Json doc = cal_args.resolve();
      const auto cfg = load_sim_config(doc);
      std::vector<fd::Workload> days;
      std::vector<fs::path> inputs;
      for (const auto& d : cal_workloads) {
        days.push_back(fd::load_workload(d));
        inputs.emplace_back(d);
      }
      fd::CalibrationOptions opt;
      opt.supply_scales = parse_list(cal_scales);
      opt.omega_refinements = cal_refine;
      const auto res = fd::calibrate(days, cfg, opt);
      fd::StagedDir out(cal_out, cal_force);
      std::ostringstream rows;
      fd::write_training_rows(rows, res.rows);
      fd::write_text_file(out.path() / "training.csv", rows.str());
      Json summary{{"baseline_omega", res.baseline_omega}, {"omega", res.omega}, {"rows", res.rows.size()},
                   {"supply_scales", opt.supply_scales}, {"refinements", opt.omega_refinements}};
      fd::write_json_file(out.path() / "calibration.json", summary);
      fd::write_json_file(out.path() / "manifest.json", manifest("calibrate", doc, cfg.seed, inputs));
      out.commit();
      std::cout << "omega " << res.omega << " (delivery-time baseline " << res.baseline_omega << "), "
                << res.rows.size() << " training rows\n";
    } else if (*train) {
      std::vector<fd::TrainingRow> rows;
      std::vector<fs::path> inputs;
      for (const auto& f : train_files) {
        std::ifstream in(f);
        if (!in) throw fd::DataError("cannot read " + f);
        auto part = fd::read_training_rows(in, f);
        rows.insert(rows.end(), part.begin(), part.end());
        inputs.emplace_back(f);
      }
      fd::FitDiagnostics diag;
      const auto model = fd::train_gpr(rows, train_rating, fit, &diag);
      fd::StagedDir out(train_out, train_force);
      fd::write_text_file(out.path() / "model.json", model.to_json().dump() + "\n");
      Json d{{"rows", rows.size()},
             {"rows_used", model.rows()},
             {"iterations", diag.iterations},
             {"gradient_norm", diag.gradient_norm},
             {"log_likelihood", model.log_likelihood()},
             {"trace", diag.trace}};
      fd::write_json_file(out.path() / "diagnostics.json", d);
      Json cfg{{"rating", train_rating}, {"max_iters", fit.max_iters}, {"max_rows", fit.max_rows}, {"seed", fit.seed}};
      fd::write_json_file(out.path() / "manifest.json", manifest("train-gpr", cfg, fit.seed, inputs));
      out.commit();
      std::cout << "fitted on " << model.rows() << " rows, log likelihood " << model.log_likelihood() << "\n";
    } else if (*sim) {
      const Json doc = sim_args.resolve();
      const auto cfg = load_sim_config(doc);
      const auto w = fd::load_workload(sim_workload);
      const auto report = fd::run_simulation(w, cfg);
      const auto metrics = fd::compute_metrics(report);
      for (const auto& warning : report.warnings) std::cerr << "warning: " << warning << "\n";
      fd::StagedDir out(sim_out, sim_force);
      fd::write_sim_outputs(out.path(), report, metrics, doc);
      std::vector<fs::path> inputs{sim_workload};
      if (const auto s = fd::sim_settings_from_json(doc); s.model_path) inputs.emplace_back(*s.model_path);
      fd::write_json_file(out.path() / "manifest.json", manifest("sim", doc, cfg.seed, inputs));
      out.commit();
      if (!sim_quiet) fd::print_table(std::cout, metrics);
    } else if (*sw) {
      const Json doc = sw_args.resolve();
      const auto cfg = load_sim_config(doc);
      std::vector<double> gs;
      if (sw_gs) gs = parse_list(*sw_gs);
      if (sw_omega) {
        for (double f : parse_list(sw_fracs.value_or("0.25,0.5,0.75,1,1.25,1.5"))) gs.push_back(f * *sw_omega);
      }
      if (gs.empty()) throw fd::ConfigError("sweep needs --gs or --sweep-omega");
      for (double g : gs) {
        if (!(g >= 0.0 && g <= 1.0)) throw fd::ConfigError("sweep values of g must lie in [0, 1]");
      }
      const auto w = fd::load_workload(sw_workload);
      const auto points = fd::sweep(w, cfg, gs);
      fd::StagedDir out(sw_out, sw_force);
      std::ostringstream curve;
      fd::write_sweep_csv(curve, points);
      fd::write_text_file(out.path() / "curve.csv", curve.str());
      fd::write_json_file(out.path() / "manifest.json", manifest("sweep", doc, cfg.seed, {sw_workload}));
      out.commit();
      std::cout << curve.str();
    }
  } catch (const fd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fd::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fd::UnreachableError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
