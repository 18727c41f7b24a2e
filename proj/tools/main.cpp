// Command-line front end: inspect a Lagrangian's derived geometry at a
// point, verify the identity suite over seeded samples, integrate the
// semispray/horizontal flows, or run one of the built-in perturbation
// families end to end.
//
// Exit codes: 0 pass, 1 identity/witness failure, 2 input error,
// 3 degenerate Lagrangian.

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "lagspace/counterexample.hpp"
#include "lagspace/errors.hpp"
#include "lagspace/flow.hpp"
#include "lagspace/geometry.hpp"

using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitInputError = 2;
constexpr int kExitDegenerate = 3;

struct Options {
  int dim = 2;
  std::string lagrangian;
  std::string lagrangian_file;
  std::string family;
  std::string point;
  int samples = 50;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  double step = 1e-3;
  double t_end = 1.0;
  std::string json_path;
  std::string csv_prefix;
  bool no_timestamp = false;
};

struct Input {
  lagspace::LagrangianField field;
  lagspace::SampleBox box;
  const lagspace::CounterexampleFamily* family = nullptr;
};

Input resolve_input(const Options& opt) {
  if (!opt.family.empty()) {
    const lagspace::CounterexampleFamily* fam = lagspace::find_family(opt.family);
    if (fam == nullptr) {
      std::string names;
      for (const auto& f : lagspace::builtin_families()) names += " " + f.name;
      throw std::invalid_argument("unknown family '" + opt.family + "'; available:" + names);
    }
    return {lagspace::perturb_with_gradient(fam->metric, fam->potential), fam->metric.box, fam};
  }
  std::string text = opt.lagrangian;
  if (!opt.lagrangian_file.empty()) {
    std::ifstream in(opt.lagrangian_file);
    if (!in) throw std::invalid_argument("cannot read " + opt.lagrangian_file);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  }
  if (text.empty()) {
    throw std::invalid_argument("provide a Lagrangian via --lagrangian, --lagrangian-file or --family");
  }
  return {lagspace::parse_lagrangian(text, opt.dim), lagspace::SampleBox::cube(opt.dim), nullptr};
}

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    std::size_t used = 0;
    const double value = std::stod(item, &used);
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw std::invalid_argument("trailing characters in '" + item + "'");
    out.push_back(value);
  }
  return out;
}

// "--point x1,..,xn;y1,..,yn"
lagspace::TangentPoint parse_point(const std::string& text, int dim) {
  const std::size_t split = text.find(';');
  if (split == std::string::npos) {
    throw std::invalid_argument("point must look like \"x1,..,xn;y1,..,yn\"");
  }
  std::vector<double> xs, ys;
  try {
    xs = parse_reals(text.substr(0, split));
    ys = parse_reals(text.substr(split + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("point coordinates must be real numbers");
  }
  if (static_cast<int>(xs.size()) != dim || static_cast<int>(ys.size()) != dim) {
    throw std::invalid_argument("point needs " + std::to_string(dim) + " base and fiber entries");
  }
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(xs.data(), dim);
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(ys.data(), dim);
  return {x, y};
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&tt));
  return buf;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

json check_json(const lagspace::CheckResult& c) {
  json out;
  out["name"] = c.name;
  out["max_residual"] = c.max_residual;
  out["tolerance"] = c.tolerance;
  out["passed"] = c.passed;
  out["skipped"] = c.skipped;
  out["points_evaluated"] = c.points_evaluated;
  out["points_skipped"] = c.points_skipped;
  if (!c.note.empty()) out["note"] = c.note;
  return out;
}

json config_json(const Options& opt, const std::string& command) {
  json cfg;
  cfg["dim"] = opt.dim;
  cfg["lagrangian"] = opt.lagrangian;
  cfg["family"] = opt.family;
  cfg["point"] = opt.point;
  cfg["samples"] = opt.samples;
  cfg["seed"] = opt.seed;
  cfg["tol"] = opt.tol;
  cfg["step"] = opt.step;
  cfg["t_end"] = opt.t_end;
  cfg["command"] = command;
  return cfg;
}

json report_shell(const Options& opt, const std::string& command) {
  json report;
  report["schema_version"] = 1;
  report["command"] = command;
  report["config"] = config_json(opt, command);
  if (!opt.no_timestamp) report["timestamp"] = iso_timestamp();
  return report;
}

void write_report(const Options& opt, const json& report) {
  if (opt.json_path.empty()) return;
  std::ofstream out(opt.json_path);
  if (!out) throw std::invalid_argument("cannot write " + opt.json_path);
  out << report.dump(2) << "\n";
}

void print_check_line(const lagspace::CheckResult& c) {
  std::printf("  %-34s ", c.name.c_str());
  if (c.skipped) {
    std::printf("SKIP   (%s)\n", c.note.c_str());
    return;
  }
  std::printf("%s   max residual %.3e  (tol %.1e, %d points", c.passed ? "pass" : "FAIL",
              c.max_residual, c.tolerance, c.points_evaluated);
  if (c.points_skipped > 0) std::printf(", %d skipped", c.points_skipped);
  std::printf(")\n");
}

const Eigen::IOFormat kMatrixFmt(Eigen::StreamPrecision, 0, ", ", "\n", "    [", "]");

int cmd_inspect(const Options& opt) {
  const Input input = resolve_input(opt);
  if (opt.point.empty()) throw std::invalid_argument("inspect needs --point");
  const lagspace::TangentPoint u = parse_point(opt.point, input.field.dimension());
  const lagspace::GeometryBundle b = lagspace::geometry_at(input.field, u);

  std::cout << "Lagrangian: " << lagspace::to_string(input.field.expression()) << "\n";
  std::cout << "at x = " << u.x.transpose() << ",  y = " << u.y.transpose() << "\n\n";
  std::cout << "L            = " << b.jet.value << "\n";
  std::cout << "E_L          = " << b.energy << "\n";
  std::cout << "S(L)         = " << b.spray_derivative << "\n";
  std::cout << "theta_L      = " << b.theta.transpose() << "\n";
  std::cout << "G            = " << b.spray.transpose() << "\n";
  std::cout << "d_hL         = " << b.dh.transpose() << "\n";
  std::cout << "det g        = " << b.metric.det << "\n";
  std::cout << "g:\n" << b.metric.g.format(kMatrixFmt) << "\n";
  std::cout << "g_inv:\n" << b.metric.g_inv.format(kMatrixFmt) << "\n";
  std::cout << "N:\n" << b.connection.format(kMatrixFmt) << "\n";
  std::cout << "omega_L:\n" << b.omega.format(kMatrixFmt) << "\n";
  std::cout << "projector h:\n" << b.projector.format(kMatrixFmt) << "\n";

  json report = report_shell(opt, "inspect");
  report["bundle"] = {{"L", b.jet.value},
                      {"energy", b.energy},
                      {"spray_derivative", b.spray_derivative},
                      {"theta", vector_json(b.theta)},
                      {"spray", vector_json(b.spray)},
                      {"dh", vector_json(b.dh)},
                      {"det_g", b.metric.det},
                      {"g", matrix_json(b.metric.g)},
                      {"g_inv", matrix_json(b.metric.g_inv)},
                      {"connection", matrix_json(b.connection)},
                      {"omega", matrix_json(b.omega)},
                      {"projector", matrix_json(b.projector)}};
  report["overall_pass"] = true;
  write_report(opt, report);
  return kExitPass;
}

int cmd_verify(const Options& opt) {
  const Input input = resolve_input(opt);

  // A Lagrangian degenerate across the whole sample cannot produce a
  // meaningful report; isolated degenerate points are recorded as skips.
  {
    lagspace::SplitMix64 probe_rng(opt.seed);
    const auto probe_points = lagspace::sample_points(probe_rng, input.box, opt.samples);
    std::string last_reason;
    bool any_regular = false;
    for (const auto& u : probe_points) {
      try {
        lagspace::metric_tensor(lagspace::jet3(input.field, u, 2));
        any_regular = true;
        break;
      } catch (const lagspace::DegenerateLagrangian& e) {
        last_reason = e.what();
      } catch (const lagspace::EvalDomainError&) {
      }
    }
    if (!any_regular && !last_reason.empty()) throw lagspace::DegenerateLagrangian(last_reason);
  }

  lagspace::SuiteConfig cfg;
  cfg.sample_count = opt.samples;
  cfg.seed = opt.seed;
  cfg.tolerance = opt.tol;
  const lagspace::IdentityReport report = lagspace::run_identity_suite(input.field, input.box, cfg);

  std::cout << "identity suite: " << input.field.name() << ", " << opt.samples
            << " points, seed " << opt.seed << "\n";
  for (const auto& check : report.checks) print_check_line(check);
  const bool pass = report.overall_pass();
  std::cout << (pass ? "overall: pass" : "overall: FAIL") << "\n";

  json out = report_shell(opt, "verify");
  out["checks"] = json::array();
  for (const auto& check : report.checks) out["checks"].push_back(check_json(check));
  out["overall_pass"] = pass;
  write_report(opt, out);
  return pass ? kExitPass : kExitCheckFailure;
}

json drift_json(const lagspace::DriftSummary& d) {
  json out;
  out["l_initial"] = d.l_initial;
  out["l_final"] = d.l_final;
  out["e_initial"] = d.e_initial;
  out["e_final"] = d.e_final;
  out["max_l_drift"] = d.max_l_drift;
  out["final_l_drift"] = d.final_l_drift;
  out["max_e_drift"] = d.max_e_drift;
  out["final_e_drift"] = d.final_e_drift;
  out["rel_max_e_drift"] = d.rel_max_e_drift;
  out["rel_final_l_drift"] = d.rel_final_l_drift;
  out["max_dldt_residual"] = d.max_dldt_residual;
  return out;
}

int cmd_flow(const Options& opt) {
  const Input input = resolve_input(opt);
  if (opt.point.empty()) throw std::invalid_argument("flow needs --point for the initial condition");
  const lagspace::TangentPoint u0 = parse_point(opt.point, input.field.dimension());
  const lagspace::IntegratorConfig cfg{opt.step, opt.t_end};

  const lagspace::Trajectory semispray = lagspace::integrate_semispray(input.field, u0, cfg);
  const lagspace::Trajectory horizontal = lagspace::integrate_horizontal(input.field, u0, cfg);
  const double gap = lagspace::max_pointwise_gap(semispray, horizontal);
  const bool coincide = gap <= 1e-8 && !semispray.truncated && !horizontal.truncated;

  auto describe = [](const char* name, const lagspace::Trajectory& traj) {
    std::printf("%s flow: %zu samples%s%s\n", name, traj.samples.size(),
                traj.truncated ? ", TRUNCATED: " : "",
                traj.truncated ? traj.truncation_reason.c_str() : "");
    if (traj.fiber_collapse) std::printf("  fiber collapse flagged (||y|| < 0.1 ||y0||)\n");
    lagspace::DriftSummary d;
    if (traj.samples.size() < 2) return d;  // truncated before the first step
    d = lagspace::drift_report(traj);
    std::printf("  L: %.12g -> %.12g (max drift %.3e)\n", d.l_initial, d.l_final, d.max_l_drift);
    std::printf("  E: %.12g -> %.12g (max drift %.3e, rel %.3e)\n", d.e_initial, d.e_final,
                d.max_e_drift, d.rel_max_e_drift);
    std::printf("  dL/dt residual vs predicted: %.3e\n", d.max_dldt_residual);
    return d;
  };
  const lagspace::DriftSummary ds = describe("semispray", semispray);
  const lagspace::DriftSummary dh = describe("horizontal", horizontal);
  std::printf("max pointwise gap between the flows: %.3e -> %s\n", gap,
              coincide ? "coincide" : "distinct");

  if (!opt.csv_prefix.empty()) {
    auto dump = [&](const std::string& suffix, const lagspace::Trajectory& traj) {
      const std::string path = opt.csv_prefix + suffix;
      std::ofstream out(path);
      if (!out) throw std::invalid_argument("cannot write " + path);
      lagspace::write_trajectory_csv(traj, out);
      std::printf("wrote %s\n", path.c_str());
    };
    dump("-semispray.csv", semispray);
    dump("-horizontal.csv", horizontal);
  }

  json report = report_shell(opt, "flow");
  report["semispray"] = drift_json(ds);
  report["semispray"]["truncated"] = semispray.truncated;
  report["semispray"]["fiber_collapse"] = semispray.fiber_collapse;
  report["horizontal"] = drift_json(dh);
  report["horizontal"]["truncated"] = horizontal.truncated;
  report["horizontal"]["fiber_collapse"] = horizontal.fiber_collapse;
  report["max_pointwise_gap"] = gap;
  report["coincide"] = coincide;
  report["overall_pass"] = true;  // truncation is flagged, not fatal
  write_report(opt, report);
  return kExitPass;
}

int cmd_counterexample(const Options& opt) {
  if (opt.family.empty()) throw std::invalid_argument("counterexample needs --family");
  const Input input = resolve_input(opt);
  const lagspace::CounterexampleFamily& fam = *input.family;

  lagspace::SplitMix64 rng(opt.seed);
  const std::vector<lagspace::TangentPoint> points =
      lagspace::sample_points(rng, fam.metric.box, opt.samples);

  const lagspace::LagrangianField quadratic = lagspace::build_riemannian_quadratic(fam.metric);

  // Witness: the largest horizontal-differential component seen, computed
  // through the jets; the closed form cross-checks it.
  double witness = 0.0;
  double closed_form_gap = 0.0;
  double obstruction_max = 0.0;
  bool positive_definite = true;
  for (const auto& u : points) {
    const Eigen::VectorXd dh = lagspace::horizontal_differential(lagspace::jet3(input.field, u));
    const Eigen::VectorXd closed = lagspace::dhl_closed_form(fam.metric, fam.potential, u);
    witness = std::max(witness, dh.cwiseAbs().maxCoeff());
    closed_form_gap = std::max(closed_form_gap, (dh - closed).cwiseAbs().maxCoeff());
    obstruction_max = std::max(
        obstruction_max,
        lagspace::obstruction_tensor(fam.metric, fam.potential, u.x).cwiseAbs().maxCoeff());
    positive_definite = positive_definite && lagspace::metric_positive_definite(fam.metric, u.x);
  }

  const std::vector<lagspace::CheckResult> structures =
      lagspace::compare_structures(quadratic, input.field, points, opt.tol);
  const lagspace::EquivalenceProbe probe = lagspace::equivalence_probe(input.field, points, opt.tol);

  const Eigen::MatrixXd sample_tensor =
      lagspace::obstruction_tensor(fam.metric, fam.potential, points.front().x);

  std::cout << "family: " << fam.name << "\n";
  std::cout << "perturbed Lagrangian: " << lagspace::to_string(input.field.expression()) << "\n";
  std::cout << "obstruction tensor at first sample point:\n"
            << sample_tensor.format(kMatrixFmt) << "\n";
  std::printf("metric positive definite at all %d sample points: %s\n", opt.samples,
              positive_definite ? "yes" : "NO");
  std::printf("max |T_ij| over %d points: %.6g\n", opt.samples, obstruction_max);
  std::printf("witness max |L_{|i}|: %.6g (%s expected)\n", witness,
              fam.expects_witness ? "nonzero" : "zero");
  std::printf("closed-form vs jet d_hL gap: %.3e\n", closed_form_gap);
  for (const auto& check : structures) print_check_line(check);
  std::printf("equivalence probe (tol %.1e): both zero %d, S(L) only %d, d_hL only %d, both nonzero %d\n",
              probe.tolerance, probe.both_zero, probe.spray_zero_only, probe.dh_zero_only,
              probe.both_nonzero);

  bool pass = fam.expects_witness ? witness > 0.1 : witness <= opt.tol;
  pass = pass && closed_form_gap <= opt.tol && positive_definite;
  for (const auto& check : structures) pass = pass && check.passed;
  std::cout << (pass ? "family behaves as claimed" : "family FAILED its contract") << "\n";

  json report = report_shell(opt, "counterexample");
  report["family"] = fam.name;
  report["expects_witness"] = fam.expects_witness;
  report["witness_max_dh"] = witness;
  report["obstruction_max"] = obstruction_max;
  report["closed_form_gap"] = closed_form_gap;
  report["metric_positive_definite"] = positive_definite;
  report["checks"] = json::array();
  for (const auto& check : structures) report["checks"].push_back(check_json(check));
  report["probe"] = {{"both_zero", probe.both_zero},
                     {"spray_zero_only", probe.spray_zero_only},
                     {"dh_zero_only", probe.dh_zero_only},
                     {"both_nonzero", probe.both_nonzero},
                     {"tolerance", probe.tolerance}};
  report["overall_pass"] = pass;
  write_report(opt, report);
  return pass ? kExitPass : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Lagrange-space geometry engine: sprays, connections, Cartan forms"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dim", opt.dim, "manifold dimension n");
    sub->add_option("--lagrangian", opt.lagrangian, "Lagrangian expression, e.g. \"y1^2 + y2^2\"");
    sub->add_option("--lagrangian-file", opt.lagrangian_file, "file containing the expression");
    sub->add_option("--family", opt.family,
                    "built-in family: flat-quadratic-phi, polar-linear-phi, null-control, "
                    "homogeneous-control");
    sub->add_option("--point", opt.point, "tangent point \"x1,..,xn;y1,..,yn\"");
    sub->add_option("--samples", opt.samples, "number of sample points");
    sub->add_option("--seed", opt.seed, "PRNG seed (SplitMix64)");
    sub->add_option("--tol", opt.tol, "identity tolerance");
    sub->add_option("--step", opt.step, "integrator step size");
    sub->add_option("--t-end", opt.t_end, "integration end time");
    sub->add_option("--json", opt.json_path, "write a JSON report here");
    sub->add_option("--csv", opt.csv_prefix, "trajectory CSV path prefix");
    sub->add_flag("--no-timestamp", opt.no_timestamp, "omit the timestamp from reports");
  };

  CLI::App* inspect = app.add_subcommand("inspect", "print every derived object at a point");
  CLI::App* verify = app.add_subcommand("verify", "run the identity suite over sampled points");
  CLI::App* flow = app.add_subcommand("flow", "integrate the semispray and horizontal flows");
  CLI::App* counterexample =
      app.add_subcommand("counterexample", "run a built-in perturbation family end to end");
  for (CLI::App* sub : {inspect, verify, flow, counterexample}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitInputError;
  }

  try {
    if (inspect->parsed()) return cmd_inspect(opt);
    if (verify->parsed()) return cmd_verify(opt);
    if (flow->parsed()) return cmd_flow(opt);
    if (counterexample->parsed()) return cmd_counterexample(opt);
  } catch (const lagspace::ParseError& e) {
    std::cerr << "parse error at position " << e.position << ": " << e.what() << "\n";
    return kExitInputError;
  } catch (const lagspace::DegenerateLagrangian& e) {
    std::cerr << "degenerate Lagrangian: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const lagspace::EvalDomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
