#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "carbon_sched/carbon_sched.hpp"

namespace cs = carbon_sched;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& text, const char* what) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw cs::InvalidArgument(fmt::format("bad {} entry '{}'", what, item));
    out.push_back(v);
  }
  return out;
}

bool strict_energy_from_env() {
  const char* v = std::getenv("CARBON_SCHED_STRICT_ENERGY");
  return v != nullptr && std::string(v) == "1";
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw cs::Error("cannot write " + path.string());
  out << body;
}

struct Common {
  std::string profile;
  int gpus = 4;
  double lambda = 0.5;
  std::uint64_t seed = 1;
  double utilization = 0.5;
  std::optional<double> sla;
};

void add_common(CLI::App* cmd, Common& c, bool with_lambda = true) {
  cmd->add_option("--profile", c.profile, "profile table JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--gpus", c.gpus, "number of GPUs")->check(CLI::PositiveNumber);
  if (with_lambda) cmd->add_option("--lambda", c.lambda, "carbon weight in [0,1]")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", c.seed, "base seed");
  cmd->add_option("--utilization", c.utilization, "BASE utilization that sets the arrival rate");
}

cs::RunInputs run_inputs(const Common& c) {
  cs::RunInputs in;
  in.gpus = c.gpus;
  in.lambda = c.lambda;
  in.seed = c.seed;
  in.utilization = c.utilization;
  in.sla_ms = c.sla;
  in.strict_energy = strict_energy_from_env();
  return in;
}

nlohmann::ordered_json eval_json(const cs::EvalResult& r) {
  nlohmann::ordered_json doc;
  doc["graph"] = r.graph.to_string();
  doc["accuracy"] = r.accuracy;
  doc["energy_wh_per_request"] = r.energy_wh_per_request;
  doc["p95_ms"] = r.p95_ms;
  doc["delta_accuracy_pct"] = r.delta_accuracy;
  doc["delta_carbon_pct"] = r.delta_carbon;
  doc["f"] = r.f_value;
  doc["h"] = r.h_value;
  doc["sla_met"] = r.sla_met;
  return doc;
}

int cmd_simulate(const Common& c, const std::string& partitions, const std::string& variants, double rate,
                 double duration, bool as_csv) {
  const auto profile = cs::load_profiles(c.profile);
  std::vector<cs::MigConfigId> parts;
  for (int id : parse_ints(partitions, "partition")) parts.emplace_back(id);
  if (static_cast<int>(parts.size()) != c.gpus) {
    throw cs::InvalidArgument(fmt::format("--partition-list has {} entries for {} GPUs", parts.size(), c.gpus));
  }
  std::vector<cs::VariantId> assign;
  for (int v : parse_ints(variants, "variant")) assign.emplace_back(v);
  const cs::FleetConfig fc(parts, assign, profile.topology());
  cs::Workload w;
  w.arrival_rate_rps = rate;
  w.duration_s = duration;
  w.seed = c.seed;
  cs::SimOptions opts;
  opts.l_tail_ms = c.sla;
  const auto rep = cs::simulate(fc, profile, w, opts);
  if (as_csv) {
    std::cout << "p95_ms,mean_latency_ms,completed,throughput_rps,energy_wh_total,energy_wh_per_request,sla_met\n";
    std::cout << fmt::format("{:.6f},{:.6f},{},{:.6f},{:.9f},{:.9f},{}\n", rep.p95_ms, rep.mean_latency_ms,
                             rep.completed, rep.throughput_rps, rep.energy_wh_total, rep.energy_wh_per_request,
                             rep.sla_met ? (*rep.sla_met ? "1" : "0") : "");
  } else {
    std::cout << rep.to_json().dump(2) << "\n";
  }
  return 0;
}

int cmd_optimize(const Common& c, const std::string& scheme_name, double ci, std::optional<double> ci_base) {
  const auto profile = cs::load_profiles(c.profile);
  const auto scheme = cs::parse_scheme(scheme_name);
  auto in = run_inputs(c);
  const auto baseline = cs::make_baseline(profile, in, ci_base.value_or(ci));
  cs::Evaluator ev(profile, c.gpus, baseline.workload, baseline.objective, in.strict_energy);
  const cs::CarbonIntensity at(ci);
  std::mt19937_64 rng(cs::derive_seed(c.seed, 0));
  nlohmann::ordered_json doc;
  doc["scheme"] = std::string(cs::scheme_name(scheme));
  doc["l_tail_ms"] = baseline.objective.l_tail_ms;
  doc["arrival_rate_rps"] = baseline.workload.arrival_rate_rps;
  const auto base_graph = cs::build_graph(cs::base_config(c.gpus, profile), profile);
  switch (scheme) {
    case cs::SchemeId::Base:
      doc["best"] = eval_json(ev.evaluate(base_graph, at));
      break;
    case cs::SchemeId::Co2Opt:
      doc["best"] = eval_json(ev.evaluate(cs::build_graph(cs::co2opt_config(c.gpus, profile), profile), at));
      break;
    case cs::SchemeId::Oracle: {
      const auto res = cs::oracle_search(ev, at);
      doc["best"] = eval_json(res.best);
      doc["evaluations"] = res.enumerated;
      break;
    }
    case cs::SchemeId::Clover:
    case cs::SchemeId::Blover: {
      const auto res = scheme == cs::SchemeId::Clover ? cs::anneal(base_graph, c.gpus, ev, at, in.anneal, rng)
                                                      : cs::blover_search(c.gpus, ev, at, in.anneal, rng);
      doc["best"] = eval_json(res.best);
      doc["evaluations"] = res.evaluations();
      doc["evaluations_to_best"] = res.evaluations_to_best();
      doc["sla_violation_fraction"] = res.sla_violation_fraction();
      doc["optimization_time_s"] = res.sim_time_spent_s;
      break;
    }
  }
  std::cout << doc.dump(2) << "\n";
  return 0;
}

cs::TimelineReport trace_report(const Common& c, cs::SchemeId scheme, const std::string& trace_path,
                                std::optional<double> max_loss, std::optional<double> ci_base) {
  const auto profile = cs::load_profiles(c.profile);
  const auto trace = cs::load_trace(trace_path);
  auto in = run_inputs(c);
  in.ci_base = ci_base;
  in.max_accuracy_loss_pct = max_loss;
  return cs::run_trace(trace, scheme, profile, in);
}

int cmd_trace_run(const Common& c, const std::string& scheme_name, const std::string& trace_path,
                  std::optional<double> max_loss, std::optional<double> ci_base, const std::string& out_dir) {
  const auto scheme = cs::parse_scheme(scheme_name);
  const auto rep = trace_report(c, scheme, trace_path, max_loss, ci_base);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_file(dir / "timeline.csv", rep.timeline_csv());
  write_file(dir / "summary.json", rep.summary_json().dump(2) + "\n");
  write_file(dir / "evals.csv", rep.evals_csv());
  std::cout << rep.summary_json().dump(2) << "\n";
  return 0;
}

int cmd_compare(const Common& c, const std::vector<std::string>& schemes, const std::string& trace_path,
                std::optional<double> max_loss, std::optional<double> ci_base, const std::string& out_dir) {
  std::string csv = "scheme,carbon_saved_pct,accuracy_delta_pct,p95_normalized,total_gco2,evaluations\n";
  for (const auto& name : schemes) {
    const auto scheme = cs::parse_scheme(name);
    const auto rep = trace_report(c, scheme, trace_path, max_loss, ci_base);
    const auto& s = rep.summary;
    csv += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", name, s.carbon_saved_pct, s.accuracy_delta_pct,
                       s.p95_normalized, s.total_gco2, s.evaluations);
  }
  std::filesystem::create_directories(out_dir);
  write_file(std::filesystem::path(out_dir) / "comparison.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_calibrate(const Common& c, const std::vector<std::string>& targets, const std::string& out_path) {
  const auto profile = cs::load_profiles(c.profile);
  double gap = 30.0;
  double min_mixed_carbon = 60.0;
  double max_loss = 5.0;
  for (const auto& t : targets) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw cs::InvalidArgument("target must look like key=value: " + t);
    const std::string key = t.substr(0, eq);
    const double value = std::stod(t.substr(eq + 1));
    if (key == "gap") {
      gap = value;
    } else if (key == "mixed_carbon") {
      min_mixed_carbon = value;
    } else if (key == "max_loss") {
      max_loss = value;
    } else {
      throw cs::InvalidArgument("unknown calibration target '" + key + "'");
    }
  }
  cs::CalibrationSetup setup;
  setup.gpus = c.gpus;
  setup.seed = c.seed;
  setup.utilization = c.utilization;
  cs::CalibrationResult res;
  const auto tuned = cs::calibrate_profile(profile, setup, gap, &res);
  res.mixed = cs::mixed_fleet_anchor(tuned, setup, max_loss);
  std::cerr << fmt::format("1g energy scale {:.6f}, partition carbon gap {:.3f}%\n", res.scale, res.gap_pct);
  if (!res.mixed.best || res.mixed.best->delta_carbon < min_mixed_carbon) {
    std::cerr << fmt::format("warning: no mixed standardized fleet reaches {:.1f}% carbon saving within {:.1f}% "
                             "accuracy loss\n",
                             min_mixed_carbon, max_loss);
  } else {
    std::cerr << fmt::format("mixed anchor {} saves {:.2f}% at {:.2f}% accuracy\n", res.mixed.best->graph.to_string(),
                             res.mixed.best->delta_carbon, res.mixed.best->delta_accuracy);
  }
  const std::string body = tuned.to_json().dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << body;
  } else {
    write_file(out_path, body);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"carbon-aware inference fleet simulator and optimizer"};
  app.require_subcommand(1);

  Common sim_c, opt_c, tr_c, cmp_c, cal_c;

  auto* sim = app.add_subcommand("simulate", "simulate one fleet configuration");
  add_common(sim, sim_c, false);
  std::string partitions, variants;
  double rate = 10.0, duration = 60.0;
  bool as_json = false, as_csv = false;
  sim->add_option("--partition-list", partitions, "MIG config id per GPU, comma separated")->required();
  sim->add_option("--variant-list", variants, "variant id per slot, comma separated")->required();
  sim->add_option("--rate", rate, "arrival rate (requests/s)")->required();
  sim->add_option("--duration", duration, "simulated seconds")->required();
  sim->add_option("--sla", sim_c.sla, "p95 latency bound (ms)");
  auto* json_flag = sim->add_flag("--json", as_json, "JSON report (default)");
  sim->add_flag("--csv", as_csv, "CSV report")->excludes(json_flag);

  auto* opt = app.add_subcommand("optimize", "pick a configuration at one carbon intensity");
  add_common(opt, opt_c);
  std::string opt_scheme;
  double ci = 0.0;
  std::optional<double> opt_ci_base;
  opt->add_option("--scheme", opt_scheme, "base|co2opt|blover|clover|oracle")->required();
  opt->add_option("--ci", ci, "carbon intensity (gCO2/kWh)")->required();
  opt->add_option("--ci-base", opt_ci_base, "intensity for the baseline footprint (default: --ci)");
  opt->add_option("--sla", opt_c.sla, "p95 latency bound (ms); default is BASE's p95");

  auto* tr = app.add_subcommand("trace-run", "run the control loop over a carbon trace");
  add_common(tr, tr_c);
  std::string tr_scheme, tr_trace, tr_out;
  std::optional<double> tr_loss, tr_ci_base;
  tr->add_option("--scheme", tr_scheme, "base|co2opt|blover|clover|oracle")->required();
  tr->add_option("--trace", tr_trace, "carbon trace CSV")->required()->check(CLI::ExistingFile);
  tr->add_option("--max-acc-loss", tr_loss, "accuracy loss limit (%)");
  tr->add_option("--ci-base", tr_ci_base, "intensity for the baseline footprint (default: trace mean)");
  tr->add_option("--sla", tr_c.sla, "p95 latency bound (ms)");
  tr->add_option("--out", tr_out, "output directory")->required();

  auto* cmp = app.add_subcommand("compare", "run several schemes over one trace");
  add_common(cmp, cmp_c);
  std::vector<std::string> cmp_schemes = {"base", "co2opt", "blover", "clover", "oracle"};
  std::string cmp_trace, cmp_out;
  std::optional<double> cmp_loss, cmp_ci_base;
  cmp->add_option("--schemes", cmp_schemes, "scheme names (space or comma separated)")->delimiter(',');
  cmp->add_option("--trace", cmp_trace, "carbon trace CSV")->required()->check(CLI::ExistingFile);
  cmp->add_option("--max-acc-loss", cmp_loss, "accuracy loss limit (%)");
  cmp->add_option("--ci-base", cmp_ci_base, "intensity for the baseline footprint");
  cmp->add_option("--sla", cmp_c.sla, "p95 latency bound (ms)");
  cmp->add_option("--out", cmp_out, "output directory")->required();

  auto* cal = app.add_subcommand("calibrate-profile", "rescale 1g energy to meet the partitioning anchor");
  add_common(cal, cal_c, false);
  std::vector<std::string> targets;
  std::string cal_out;
  cal->add_option("--targets", targets, "key=value: gap, mixed_carbon, max_loss");
  cal->add_option("--out", cal_out, "output profile path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(sim_c, partitions, variants, rate, duration, as_csv);
    if (*opt) return cmd_optimize(opt_c, opt_scheme, ci, opt_ci_base);
    if (*tr) return cmd_trace_run(tr_c, tr_scheme, tr_trace, tr_loss, tr_ci_base, tr_out);
    if (*cmp) return cmd_compare(cmp_c, cmp_schemes, cmp_trace, cmp_loss, cmp_ci_base, cmp_out);
    if (*cal) return cmd_calibrate(cal_c, targets, cal_out);
  } catch (const cs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
