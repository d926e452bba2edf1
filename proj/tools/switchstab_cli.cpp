// switchstab command-line runner.
//
// Exit codes: 0 ok, 1 refuted certificate or invalid signal (with --strict),
// 2 configuration error, 3 numeric failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "switchstab/json_io.hpp"
#include "switchstab/switchstab.hpp"

namespace ss = switchstab;
using ss::Json;

namespace {

enum ExitCode { kOk = 0, kRefuted = 1, kConfigError = 2, kNumericFailure = 3 };

struct ClassFlags {
  std::string type;
  double tau_d = 0.0;
  int n0 = 1;
  double period = 0.0;
  std::vector<int> modes;
};

struct Common {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  bool strict = false;
};

Json LoadConfig(const std::string& path) {
  if (path.empty()) return Json::object();
  Json j = ss::ReadJsonFile(path);
  if (!j.is_object()) throw ss::ConfigError(path + ": top level must be an object");
  if (!j.contains("schema")) throw ss::ConfigError(path + ": missing field 'schema'");
  if (j.at("schema") != ss::kSchemaVersion) {
    throw ss::ConfigError(path + ": schema must be \"" + std::string(ss::kSchemaVersion) + "\"");
  }
  return j;
}

/// --seed, then SWITCHSTAB_SEED, then the config's "seed", then 1.
std::uint64_t ResolveSeed(const Common& c, const Json& config) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("SWITCHSTAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ss::ConfigError("SWITCHSTAB_SEED is not an unsigned integer");
    }
  }
  if (config.contains("seed")) {
    const Json& s = config.at("seed");
    if (!s.is_number_unsigned()) throw ss::ConfigError("seed: expected a non-negative integer");
    return s.get<std::uint64_t>();
  }
  return 1;
}

const Json& Section(const Json& config, const std::string& key) {
  static const Json empty = Json::object();
  if (!config.contains(key)) return empty;
  const Json& s = config.at(key);
  if (!s.is_object()) throw ss::ConfigError(key + ": expected an object");
  return s;
}

double Num(const Json& section, const std::string& key, double fallback,
           const std::string& path) {
  return ss::json_detail::NumberOr(section, key, fallback, path);
}

int Int(const Json& section, const std::string& key, int fallback, const std::string& path) {
  if (!section.contains(key)) return fallback;
  return static_cast<int>(ss::json_detail::Integer(section.at(key), path + "." + key));
}

ss::SwitchedSystem SystemFrom(const Json& config) {
  return ss::ParseSystem(ss::json_detail::Field(config, "system", ""), "system");
}

std::optional<ss::SignalClassSpec> ClassFrom(const ClassFlags& f, const Json& config) {
  if (!f.type.empty()) {
    if (f.type == "adt") return ss::SignalClassSpec(ss::AverageDwell{f.tau_d, f.n0});
    if (f.type == "dwell") return ss::SignalClassSpec(ss::Dwell{f.tau_d});
    if (f.type == "ergodic") return ss::SignalClassSpec(ss::Ergodic{f.period, f.modes});
    throw ss::ConfigError("--class must be adt, dwell or ergodic (graphs need --config)");
  }
  if (config.contains("class")) return ss::ParseClass(config.at("class"), "class");
  return std::nullopt;
}

void AddClassFlags(CLI::App* app, ClassFlags& f) {
  app->add_option("--class", f.type, "Signal class: adt, dwell or ergodic");
  app->add_option("--tau-d", f.tau_d, "Dwell time");
  app->add_option("--n0", f.n0, "Chatter bound N0");
  app->add_option("--period", f.period, "Ergodic window T");
  app->add_option("--modes", f.modes, "Ergodic mode list")->delimiter(',');
}

void AddCommon(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config_path, "Experiment config (JSON)");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out_path, "Output file (default stdout)");
  app->add_option("--seed", c.seed, "Seed (overrides SWITCHSTAB_SEED and the config)");
}

void Emit(const Common& c, const std::string& text) {
  if (c.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.out_path, std::ios::binary);
  if (!out) throw ss::ConfigError("cannot write " + c.out_path);
  out << text;
}

void EmitJson(const Common& c, const Json& j) { Emit(c, j.dump(2) + "\n"); }

/// Signal from "signal" (inline), "signal_file", or generated from "class".
ss::SwitchingSignal SignalFrom(const Json& config, const ss::SwitchedSystem& sys, double t0,
                               double t1, std::uint64_t seed) {
  if (config.contains("signal")) return ss::ParseSignal(config.at("signal"), "signal");
  if (config.contains("signal_file")) {
    const std::string path = ss::json_detail::String(config.at("signal_file"), "signal_file");
    return ss::ParseSignal(ss::ReadJsonFile(path), path);
  }
  if (config.contains("class")) {
    const ss::SignalClassSpec spec = ss::ParseClass(config.at("class"), "class");
    return ss::Generate(spec, t0, t1, seed, ss::detail::GenerationModesFor(sys, spec));
  }
  throw ss::ConfigError("config needs one of signal, signal_file or class");
}

struct SimulationSetup {
  ss::Vector x0;
  double t0, t1;
  ss::SimulationOptions options;
};

SimulationSetup SimulationFrom(const Json& config, const ss::SwitchedSystem& sys) {
  const Json& s = Section(config, "simulation");
  SimulationSetup out;
  out.x0 = s.contains("x0") ? ss::ParseVector(s.at("x0"), "simulation.x0")
                            : ss::Vector::Ones(sys.dimension());
  if (out.x0.size() != sys.dimension()) {
    throw ss::ConfigError("simulation.x0: expected " + std::to_string(sys.dimension()) +
                          " entries");
  }
  out.t0 = Num(s, "t0", 0.0, "simulation");
  out.t1 = Num(s, "t1", 10.0, "simulation");
  out.options.step = Num(s, "step", 1e-3, "simulation");
  if (!(out.options.step > 0)) throw ss::ConfigError("simulation.step: must be positive");
  if (s.contains("backward")) out.options.backward = s.at("backward").get<bool>();
  return out;
}

int RunSimulate(const Common& c) {
  const Json config = LoadConfig(c.config_path);
  const std::uint64_t seed = ResolveSeed(c, config);
  const ss::SwitchedSystem sys = SystemFrom(config);
  const SimulationSetup setup = SimulationFrom(config, sys);
  const ss::SwitchingSignal sig = SignalFrom(config, sys, setup.t0, setup.t1, seed);
  const ss::Trajectory traj = ss::Simulate(sys, sig, setup.x0, setup.t0, setup.t1, setup.options);
  std::ostringstream csv;
  ss::WriteTrajectoryCsv(csv, traj);
  Emit(c, csv.str());
  return kOk;
}

int RunValidate(const Common& c, const ClassFlags& f, const std::string& signal_path) {
  const Json config = LoadConfig(c.config_path);
  const auto spec = ClassFrom(f, config);
  if (!spec) throw ss::ConfigError("no signal class given (--class or config 'class')");
  const ss::SwitchingSignal sig = ss::ParseSignal(ss::ReadJsonFile(signal_path), signal_path);
  const ss::ValidationReport r = ss::Validate(sig, *spec);
  EmitJson(c, ss::ToJson(r));
  return (!r.passed && c.strict) ? kRefuted : kOk;
}

int RunGenerate(const Common& c, const ClassFlags& f, double t0, double t1,
                std::optional<int> initial) {
  const Json config = LoadConfig(c.config_path);
  const auto spec = ClassFrom(f, config);
  if (!spec) throw ss::ConfigError("no signal class given (--class or config 'class')");
  ss::GenerateOptions o;
  if (config.contains("system")) o = ss::detail::GenerationModesFor(SystemFrom(config), *spec);
  o.initial_mode = initial;
  const ss::SwitchingSignal sig = ss::Generate(*spec, t0, t1, ResolveSeed(c, config), o);
  EmitJson(c, ss::ToJson(sig));
  return kOk;
}

int RunLimits(const Common& c) {
  const Json config = LoadConfig(c.config_path);
  const std::uint64_t seed = ResolveSeed(c, config);
  const ss::SwitchedSystem sys = SystemFrom(config);
  const SimulationSetup setup = SimulationFrom(config, sys);
  const ss::SwitchingSignal sig = SignalFrom(config, sys, setup.t0, setup.t1, seed);
  const ss::Trajectory traj = ss::Simulate(sys, sig, setup.x0, setup.t0, setup.t1, setup.options);
  const Json& l = Section(config, "limits");
  ss::LimitSetOptions o;
  o.tail_fraction = Num(l, "tail_fraction", o.tail_fraction, "limits");
  o.cluster_tol = Num(l, "cluster_tol", o.cluster_tol, "limits");
  const double r_min = Num(l, "r_min", 0.25, "limits");
  const ss::SetEstimate omega = ss::OmegaLimit(traj, o);
  const ss::SetEstimate sharp = ss::OmegaSharp(traj, r_min, o);
  Json j;
  j["schema"] = ss::kSchemaVersion;
  j["kind"] = "limits";
  j["tail_fraction"] = o.tail_fraction;
  j["r_min"] = r_min;
  j["omega"] = ss::ToJson(omega);
  j["omega_sharp"] = ss::ToJson(sharp);
  j["sharp_projection_to_omega"] = ss::DirectedHausdorff(sharp.Project(), omega);
  EmitJson(c, j);
  return kOk;
}

int RunCertify(const Common& c, const std::string& theorem_id) {
  const Json config = LoadConfig(c.config_path);
  const std::uint64_t seed = ResolveSeed(c, config);
  const ss::Theorem theorem = ss::ParseTheorem(theorem_id);
  const ss::SwitchedSystem sys = SystemFrom(config);
  const Json& pair_json = ss::json_detail::Field(config, "pair", "");
  const Json& opts = Section(config, "certify");
  ss::CertificateReport report;
  if (theorem == ss::Theorem::kCorollaryFinal) {
    if (!sys.all_linear()) throw ss::ConfigError("corollary_final needs linear modes");
    const ss::LyapunovPair pair = ss::ParseQuadraticPair(pair_json, sys.dimension());
    ss::CorollaryOptions o;
    o.seed = seed;
    o.n_trajectories = Int(opts, "n_trajectories", o.n_trajectories, "certify");
    o.horizon = Num(opts, "horizon", o.horizon, "certify");
    o.step = Num(opts, "step", o.step, "certify");
    if (config.contains("class")) o.evidence_class = ss::ParseClass(config.at("class"), "class");
    const bool common_p =
        config.contains("common_P_assumed") ? config.at("common_P_assumed").get<bool>() : true;
    report = ss::CheckCorollaryFinal(sys.linear_matrices(), pair.p, pair.c, common_p, o);
  } else {
    const ss::LyapunovPair pair = ss::ParseQuadraticPair(pair_json, sys.dimension());
    const ss::SignalClassSpec spec =
        ss::ParseClass(ss::json_detail::Field(config, "class", ""), "class");
    ss::ConvergenceOptions o;
    o.seed = seed;
    if (opts.contains("pair_kind")) {
      const std::string k = ss::json_detail::String(opts.at("pair_kind"), "certify.pair_kind");
      if (k != "weak" && k != "fweak") throw ss::ConfigError("certify.pair_kind: weak or fweak");
      o.pair_kind = k == "weak" ? ss::PairKind::kWeak : ss::PairKind::kFWeak;
    }
    if (opts.contains("use_level_sets")) o.use_level_sets = opts.at("use_level_sets").get<bool>();
    if (opts.contains("level_probes")) {
      for (double v : ss::ParseVector(opts.at("level_probes"), "certify.level_probes")) {
        o.level_probes.push_back(v);
      }
    }
    if (opts.contains("uniqueness_asserted")) {
      o.uniqueness_asserted = opts.at("uniqueness_asserted").get<bool>();
    }
    if (opts.contains("observed_signals")) {
      const Json& sigs = opts.at("observed_signals");
      for (std::size_t i = 0; i < sigs.size(); ++i) {
        o.observed_signals.push_back(
            ss::ParseSignal(sigs[i], "certify.observed_signals[" + std::to_string(i) + "]"));
      }
    }
    o.n_trajectories = Int(opts, "n_trajectories", o.n_trajectories, "certify");
    o.horizon = Num(opts, "horizon", o.horizon, "certify");
    o.step = Num(opts, "step", o.step, "certify");
    o.zero_set_seeds = Int(opts, "zero_set_seeds", o.zero_set_seeds, "certify");
    o.decrease_samples = Int(opts, "decrease_samples", o.decrease_samples, "certify");
    report = ss::CheckConvergence(sys, pair, spec, theorem, o);
  }
  EmitJson(c, ss::ToJson(report));
  return (report.verdict == ss::Verdict::kRefuted && c.strict) ? kRefuted : kOk;
}

int RunSweep(const Common& c) {
  const Json config = LoadConfig(c.config_path);
  const std::uint64_t seed = ResolveSeed(c, config);
  const ss::SwitchedSystem sys = SystemFrom(config);
  const ss::SignalClassSpec spec =
      ss::ParseClass(ss::json_detail::Field(config, "class", ""), "class");
  const Json& s = Section(config, "sweep");
  ss::StabilityOptions o;
  o.seed = seed;
  o.step = Num(s, "step", o.step, "sweep");
  o.threads = static_cast<unsigned>(Int(s, "threads", 0, "sweep"));
  const ss::StabilityStatistics stats = ss::EmpiricalStabilityTest(
      sys, spec, Int(s, "n_trials", 100, "sweep"), Num(s, "ball_radius", 1.0, "sweep"),
      Num(s, "horizon", 20.0, "sweep"), Num(s, "eps", 1e-3, "sweep"), ss::DistanceToOrigin(), o);
  std::ostringstream csv;
  csv << "trial,signal_seed,x0_norm,sup_norm,gain,final_distance,converged,error\n";
  for (std::size_t k = 0; k < stats.trials.size(); ++k) {
    const auto& t = stats.trials[k];
    csv << k << ',' << t.signal_seed << ',' << ss::FormatDouble(t.x0.norm()) << ','
        << ss::FormatDouble(t.sup_norm) << ',' << ss::FormatDouble(t.gain) << ','
        << ss::FormatDouble(t.final_distance) << ',' << (t.converged ? 1 : 0) << ',' << '"'
        << t.error << '"' << '\n';
  }
  Emit(c, csv.str());
  return stats.n_errors ? kNumericFailure : kOk;
}

std::string SummarizeJson(const std::string& path, const Json& j) {
  std::ostringstream s;
  const std::string kind = j.value("kind", "unknown");
  s << path << " [" << kind << "]\n";
  if (kind == "certificate") {
    s << "  theorem " << j.value("theorem", "") << ": " << j.value("verdict", "") << " ("
      << j.value("conclusion", "") << ")\n";
    for (const auto& h : j.at("hypotheses")) {
      s << "    " << h.value("status", "") << "  " << h.value("name", "");
      const std::string d = h.value("detail", "");
      if (!d.empty()) s << " - " << d;
      s << '\n';
    }
    s << "  predicted limit: " << j.at("predicted_limit").value("description", "") << '\n';
  } else if (kind == "validation") {
    s << "  " << (j.value("passed", false) ? "valid" : "invalid");
    const std::string m = j.value("message", "");
    if (!m.empty()) s << ": " << m;
    s << '\n';
  } else if (kind == "signal") {
    s << "  horizon [" << j.value("t_begin", 0.0) << ", " << j.value("t_end", 0.0) << "], "
      << j.at("switches").size() << " switches, initial mode " << j.value("initial_mode", 0)
      << '\n';
  } else if (kind == "limits") {
    s << "  omega: " << j.at("omega").at("points").size() << " points, omega#: "
      << j.at("omega_sharp").at("points").size() << " points, pi1(omega#) -> omega distance "
      << j.value("sharp_projection_to_omega", 0.0) << '\n';
  }
  return s.str();
}

std::string SummarizeCsv(const std::string& path, const std::string& text) {
  std::istringstream in(text);
  std::string header, line, last;
  std::getline(in, header);
  std::size_t rows = 0;
  std::size_t converged = 0;
  const bool sweep = header.rfind("trial,", 0) == 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    last = line;
    if (sweep) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (cells.size() > 6 && cells[6] == "1") ++converged;
    }
  }
  std::ostringstream s;
  if (sweep) {
    s << path << " [stability-sweep]\n  " << converged << " of " << rows
      << " trials converged\n";
  } else {
    s << path << " [trajectory]\n  " << rows << " samples; last row " << last << '\n';
  }
  return s.str();
}

int RunReport(const Common& c, const std::vector<std::string>& inputs) {
  std::string out = "switchstab report\n";
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw ss::ConfigError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
      out += SummarizeCsv(path, text);
    } else {
      out += SummarizeJson(path, ss::ReadJsonFile(path));
    }
  }
  Emit(c, out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switched-system stability toolkit"};
  app.require_subcommand(1);

  Common common;
  ClassFlags class_flags;
  std::string theorem, signal_path;
  double t0 = 0.0, t1 = 10.0;
  std::optional<int> initial_mode;
  std::vector<std::string> inputs;

  auto* simulate = app.add_subcommand("simulate", "Integrate a trajectory and write CSV");
  AddCommon(simulate, common, true);

  auto* validate = app.add_subcommand("validate-signal", "Check a signal against a class");
  AddCommon(validate, common, false);
  AddClassFlags(validate, class_flags);
  validate->add_option("--signal", signal_path, "Signal JSON")->required()->check(CLI::ExistingFile);
  validate->add_flag("--strict", common.strict, "Exit 1 when the signal is invalid");

  auto* generate = app.add_subcommand("generate-signal", "Sample a signal from a class");
  AddCommon(generate, common, false);
  AddClassFlags(generate, class_flags);
  generate->add_option("--t0", t0, "Horizon start");
  generate->add_option("--t1", t1, "Horizon end");
  generate->add_option("--initial-mode", initial_mode, "Initial mode");

  auto* limits = app.add_subcommand("limits", "Estimate omega and omega# limit sets");
  AddCommon(limits, common, true);

  auto* certify = app.add_subcommand("certify", "Check the hypotheses of a theorem");
  AddCommon(certify, common, true);
  certify->add_option("--theorem", theorem, "Theorem id")->required();
  certify->add_flag("--strict", common.strict, "Exit 1 on a Refuted verdict");

  auto* sweep = app.add_subcommand("stability-sweep", "Empirical stability statistics (CSV)");
  AddCommon(sweep, common, true);

  auto* report = app.add_subcommand("report", "Summarize artifacts written by other commands");
  report->add_option("inputs", inputs, "JSON/CSV artifacts")->required()->check(CLI::ExistingFile);
  report->add_option("--out", common.out_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*simulate) return RunSimulate(common);
    if (*validate) return RunValidate(common, class_flags, signal_path);
    if (*generate) return RunGenerate(common, class_flags, t0, t1, initial_mode);
    if (*limits) return RunLimits(common);
    if (*certify) return RunCertify(common, theorem);
    if (*sweep) return RunSweep(common);
    if (*report) return RunReport(common, inputs);
  } catch (const ss::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ss::InfeasibleSpec& e) {
    std::cerr << "infeasible class: " << e.what() << '\n';
    return kConfigError;
  } catch (const ss::HorizonTooShort& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ss::Error& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
  return kOk;
}
