#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "config.hpp"
#include "qpc/measurement_limit.hpp"
#include "qpc/moments.hpp"
#include "qpc/number_resolved.hpp"
#include "qpc/reduced_dynamics.hpp"

namespace qpc::cli {

namespace {

// Raised for bad flags or arguments that CLI11 cannot catch on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A result was produced but signals a physics problem (for instance the best
// window sits on the bracket edge). The output is still written.
struct SoftFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(std::initializer_list<const char*> names) {
    bool first = true;
    for (const char* n : names) {
      if (!first) os_ << ',';
      os_ << n;
      first = false;
    }
    os_ << '\n';
  }

  CsvWriter& cell(double v) {
    if (!std::isfinite(v)) throw NumericalError("non-finite value in CSV output");
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                   std::chars_format::scientific, 16);
    sep();
    os_.write(buf.data(), res.ptr - buf.data());
    return *this;
  }

  CsvWriter& cell(std::size_t v) {
    sep();
    os_ << v;
    return *this;
  }

  void end_row() {
    os_ << '\n';
    row_started_ = false;
  }

 private:
  void sep() {
    if (row_started_) os_ << ',';
    row_started_ = true;
  }

  std::ostream& os_;
  bool row_started_ = false;
};

std::vector<double> output_grid(const SimConfig& c) {
  std::vector<double> g(c.n_out);
  const double last = static_cast<double>(c.n_out - 1);
  for (std::size_t i = 0; i < c.n_out; ++i) g[i] = c.t_max * (static_cast<double>(i) / last);
  return g;
}

void simulate(const SimConfig& c, std::ostream& os) {
  const SystemParams p = c.params();
  const auto traj = evolve_reduced(p, c.initial_state(), output_grid(c));
  CsvWriter csv(os);
  csv.header({"t", "sigma11", "re_sigma12", "im_sigma12", "current"});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const QubitState& q = traj.states[i];
    csv.cell(traj.times[i]).cell(q.sigma11).cell(q.sigma12.real()).cell(q.sigma12.imag());
    csv.cell(average_current(p, q)).end_row();
  }
}

void distribution(const SimConfig& c, bool with_oracle, std::ostream& os) {
  const SystemParams p = c.params();
  const QubitState q0 = c.initial_state();
  const std::size_t n_max = c.n_max_override.value_or(choose_n_max(p, c.t_max, c.tail_eps));
  const std::array<double, 2> grid{0.0, c.t_max};
  const auto ladder = evolve_ladder(p, q0, grid, n_max);
  const CountingDistribution dist = electron_distribution(ladder.ladders.back());
  std::optional<CountingDistribution> oracle;
  if (with_oracle) oracle = counting_field_distribution(p, q0, c.t_max, transform_size_for(n_max));

  CsvWriter csv(os);
  if (oracle) {
    csv.header({"n", "p_ladder", "p_oracle"});
  } else {
    csv.header({"n", "p_ladder"});
  }
  for (std::size_t n = 0; n < dist.probs.size(); ++n) {
    csv.cell(n).cell(dist.probs[n]);
    if (oracle) csv.cell(n < oracle->probs.size() ? oracle->probs[n] : 0.0);
    csv.end_row();
  }
}

void error_curve(const SimConfig& c, ShotNoiseModel mode, std::ostream& os) {
  const auto dts = log_grid(c.dt_lo, c.dt_hi, c.n_out);
  const ErrorCurve curve = sample_error_curve(c.params(), c.initial_state(), dts, mode);
  CsvWriter csv(os);
  csv.header({"dt", "shot", "backaction", "total_sq"});
  for (std::size_t i = 0; i < curve.dts.size(); ++i) {
    csv.cell(curve.dts[i]).cell(curve.shot[i]).cell(curve.backaction[i]).cell(curve.total_sq[i]);
    csv.end_row();
  }
}

void optimal(const SimConfig& c, ShotNoiseModel mode, std::ostream& os) {
  const SystemParams p = c.params();
  const ErrorCurve curve =
      optimize_measurement_time(p, c.initial_state(), {c.dt_lo, c.dt_hi}, mode);
  const PrecisionLimit weak = closed_form_weak(p);
  const PrecisionLimit zeno = closed_form_zeno(p);
  const Visibility vis = single_run_visibility(p);

  nlohmann::ordered_json doc;
  doc["dt_star_numeric"] = curve.argmin_dt;
  doc["min_total_sq"] = curve.min_total_sq;
  doc["dt_star_weak"] = weak.dt_star;
  doc["delta2_sq_weak"] = weak.delta2_sq;
  doc["dt_star_zeno"] = zeno.dt_star;
  doc["delta2_sq_zeno"] = zeno.delta2_sq;
  doc["visibility_ratio"] = vis.ratio;
  auto warnings = nlohmann::ordered_json::array();
  if (weak.warning) warnings.push_back(*weak.warning);
  if (zeno.warning) warnings.push_back(*zeno.warning);
  if (curve.bracket_miss) warnings.push_back("optimum sits on the edge of the dt bracket");
  doc["warnings"] = warnings;
  os << doc.dump(2) << '\n';

  if (curve.bracket_miss) {
    throw SoftFailure("bracket miss: best window on the edge of [dt_lo, dt_hi]; widen the bracket");
  }
}

struct Check {
  const char* name;
  std::function<bool()> run;
};

double total_variation(const CountingDistribution& a, const CountingDistribution& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < std::max(a.probs.size(), b.probs.size()); ++n) {
    const double x = n < a.probs.size() ? a.probs[n] : 0.0;
    const double y = n < b.probs.size() ? b.probs[n] : 0.0;
    s += std::abs(x - y);
  }
  return 0.5 * s;
}

std::vector<Check> invariant_suite() {
  const SystemParams ref(1.0, 0.0, 26.0, 24.0);
  const SystemParams generic(0.7, -0.3, 9.0, 3.0);
  const QubitState mixed{0.6, {0.2, -0.1}};
  return {
      {"trace conservation",
       [=] {
         std::vector<double> g;
         for (int i = 0; i <= 10; ++i) g.push_back(0.2 * i);
         const auto l = evolve_ladder(ref, QubitState::dot1(), g, choose_n_max(ref, 2.0));
         for (const auto& x : l.ladders) {
           if (std::abs(x.total_mass() + x.lost_mass - 1.0) > 1e-8) return false;
         }
         return true;
       }},
      {"marginal consistency",
       [=] {
         std::vector<double> g;
         for (int i = 0; i <= 10; ++i) g.push_back(0.3 * i);
         const auto l = evolve_ladder(generic, mixed, g, choose_n_max(generic, 3.0));
         const auto r = evolve_reduced(generic, mixed, g);
         for (std::size_t i = 0; i < g.size(); ++i) {
           const QubitState m = l.ladders[i].marginal();
           if (std::abs(m.sigma11 - r.states[i].sigma11) > 1e-6) return false;
           if (std::abs(m.sigma12 - r.states[i].sigma12) > 1e-6) return false;
         }
         return true;
       }},
      {"poisson limit",
       [] {
         const SystemParams p(0.0, 0.0, 1.0, 0.0);
         const std::array<double, 2> g{0.0, 1.0};
         const auto ladder = electron_distribution(evolve_ladder(p, QubitState::dot1(), g, 40).ladders.back());
         const auto oracle = counting_field_distribution(p, QubitState::dot1(), 1.0, 64);
         double f = std::exp(-1.0);
         for (std::size_t n = 0; n <= 30; ++n) {
           if (n > 0) f /= static_cast<double>(n);
           if (std::abs(ladder.probs[n] - f) > 1e-10 || std::abs(oracle.probs[n] - f) > 1e-10) return false;
         }
         return true;
       }},
      {"oracle equivalence",
       [=] {
         const double t = 0.5;
         const auto n_max = choose_n_max(ref, t);
         const std::array<double, 2> g{0.0, t};
         const auto a = electron_distribution(evolve_ladder(ref, QubitState::dot1(), g, n_max).ladders.back());
         const auto b = counting_field_distribution(ref, QubitState::dot1(), t, transform_size_for(n_max));
         return total_variation(a, b) <= 1e-7;
       }},
      {"moment consistency",
       [=] {
         const double t = 1.5;
         const std::array<double, 2> g{0.0, t};
         const auto d = electron_distribution(
             evolve_ladder(generic, mixed, g, choose_n_max(generic, t)).ladders.back());
         const MomentState m = evolve_moments(generic, mixed, g).states.back();
         const double mean = m.m1_11 + m.m1_22;
         const double second = m.m2_11 + m.m2_22;
         return std::abs(d.mean() - mean) <= 1e-6 * mean &&
                std::abs(d.second_moment() - second) <= 1e-6 * second;
       }},
      {"aligned closed form",
       [] {
         for (double gamma : {0.04, 16.0}) {
           const auto p = SystemParams::from_decoherence(1.0, 0.0, gamma, 25.0);
           std::vector<double> g;
           for (int i = 0; i <= 400; ++i) g.push_back(20.0 / gamma * i / 400.0);
           const auto r = evolve_reduced(p, QubitState::dot1(), g);
           for (std::size_t i = 0; i < g.size(); ++i) {
             if (std::abs(r.states[i].sigma11 - sigma11_aligned_closed(p, g[i])) > 1e-8) return false;
           }
         }
         return true;
       }},
      {"zeno asymptotics",
       [] {
         const auto p = SystemParams::from_decoherence(0.1, 0.0, 8.0, 25.0);
         std::vector<double> g{0.0};
         for (int i = 0; i <= 100; ++i) g.push_back(5.0 / 8.0 + (200.0 - 5.0 / 8.0) * i / 100.0);
         const auto r = evolve_reduced(p, QubitState::dot1(), g);
         for (std::size_t i = 1; i < g.size(); ++i) {
           const double z = zeno_sigma11(p, g[i]);
           if (std::abs(r.states[i].sigma11 - z) > 0.05 * z) return false;
         }
         return true;
       }},
      {"short-window shot noise",
       [=] {
         const double dt = 1e-3 / ref.d1();
         const auto d = current_dispersion(ref, QubitState::dot1(), dt);
         return std::abs(d.exact - d.asymptotic) <= 0.01 * d.asymptotic;
       }},
      {"zero-window back-action",
       [=] { return backaction_error(generic, mixed, 0.0) == 0.0; }},
  };
}

int validate(std::ostream& os) {
  bool all = true;
  for (const Check& c : invariant_suite()) {
    bool ok = false;
    try {
      ok = c.run();
    } catch (const std::exception&) {
      ok = false;
    }
    all = all && ok;
    os << (ok ? "pass " : "FAIL ") << c.name << '\n';
  }
  return all ? kSuccess : kPhysicsFailure;
}

ShotNoiseModel parse_mode(const std::string& s) {
  if (s == "asymptotic") return ShotNoiseModel::asymptotic;
  if (s == "exact") return ShotNoiseModel::exact;
  throw UsageError("--mode must be 'asymptotic' or 'exact'");
}

// Writes to the --out file when given. The file is only replaced once the
// command has produced its full output.
int emit(const std::string& out_path, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (out_path.empty()) {
    body(out);
    return kSuccess;
  }
  std::ostringstream buf;
  std::optional<SoftFailure> soft;
  try {
    body(buf);
  } catch (const SoftFailure& e) {
    soft = e;
  }
  std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
  if (!file) throw UsageError("cannot write " + out_path);
  file << buf.str();
  if (soft) throw *soft;
  return kSuccess;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Qubit measurement by a point-contact detector", "qpc"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  std::string mode_flag;
  bool with_oracle = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (key: value per line)")
        ->required();
    sub->add_option("--out", out_path, "output file (default: stdout)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "reduced qubit dynamics and detector current");
  add_common(sim);
  CLI::App* dist = app.add_subcommand("distribution", "P_n at t_max from the number-resolved ladder");
  add_common(dist);
  dist->add_flag("--oracle", with_oracle, "add the counting-field oracle column");
  CLI::App* curve = app.add_subcommand("error-curve", "shot, back-action and total error per window");
  add_common(curve);
  curve->add_option("--mode", mode_flag, "shot-noise model: asymptotic|exact");
  CLI::App* opt = app.add_subcommand("optimal", "optimal measurement window and precision limits");
  add_common(opt);
  opt->add_option("--mode", mode_flag, "shot-noise model: asymptotic|exact");
  CLI::App* val = app.add_subcommand("validate", "run the built-in invariant checks");
  val->add_option("--out", out_path, "output file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "qpc: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (val->parsed()) {
      int status = kSuccess;
      emit(out_path, out, [&](std::ostream& os) { status = validate(os); });
      return status;
    }
    const SimConfig cfg = load_config(config_path);
    const ShotNoiseModel mode = mode_flag.empty() ? cfg.error_mode : parse_mode(mode_flag);
    if (sim->parsed()) return emit(out_path, out, [&](std::ostream& os) { simulate(cfg, os); });
    if (dist->parsed()) {
      return emit(out_path, out, [&](std::ostream& os) { distribution(cfg, with_oracle, os); });
    }
    if (curve->parsed()) return emit(out_path, out, [&](std::ostream& os) { error_curve(cfg, mode, os); });
    return emit(out_path, out, [&](std::ostream& os) { optimal(cfg, mode, os); });
  } catch (const ConfigError& e) {
    err << "qpc: " << e.what() << '\n';
    return kUsageError;
  } catch (const UsageError& e) {
    err << "qpc: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "qpc: " << e.what() << '\n';
    return kPhysicsFailure;
  }
}

}  // namespace qpc::cli
