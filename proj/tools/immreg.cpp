// immreg: batch experiments on the regularized isometric-immersion operator.
//
// One subcommand per run. Settings come from built-in defaults, then the
// JSON --config file, then explicit flags. Every run writes report.json into
// --out; failures print an error record (also saved as report.json when the
// output directory is usable) and exit nonzero.

#include "immreg/continuation.hpp"
#include "immreg/error.hpp"
#include "immreg/io.hpp"
#include "immreg/shapes.hpp"
#include "immreg/uniformization.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

using namespace immreg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Settings {
  int L = 16;
  double epsilon = 1.0;
  std::string variant = "additive";
  std::string shape = "sphere:1";
  std::string out = "immreg_out";
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int directions = 36;
  // config-file only (or subcommand flags)
  std::string start = "sphere:1";
  std::vector<double> eps_grid{1.0, 0.5, 0.25, 0.1};
  double eps_min = 0.05;
  double ratio = 0.7;
  double first = 0.3;
  int sweeps = 3;
  int max_iter = 30;
  double gap_min = 1e3;
};

struct Flags {
  std::optional<int> L;
  std::optional<double> epsilon;
  std::optional<std::string> variant;
  std::optional<std::string> shape;
  std::optional<std::string> out;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> directions;
  std::optional<std::string> start;
  std::optional<std::vector<double>> eps_grid;
};

template <class T>
void take(const json& cfg, const char* key, T& dst) {
  if (!cfg.contains(key)) return;
  try {
    dst = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

Settings load_settings(const Flags& f) {
  Settings s;
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw IoError("cannot read config '" + *f.config + "'");
    json cfg;
    try {
      in >> cfg;
    } catch (const json::parse_error& e) {
      throw ConfigError("config '" + *f.config + "': " + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known{"L",     "epsilon",  "variant", "shape",   "out",
                                                "seed",  "tol",      "directions", "start", "eps_grid",
                                                "eps_min", "ratio",  "first",   "sweeps",  "max_iter",
                                                "gap_min"};
    for (const auto& [k, v] : cfg.items())
      if (std::find(known.begin(), known.end(), k) == known.end())
        throw ConfigError("config: unknown key '" + k + "'");
    take(cfg, "L", s.L);
    take(cfg, "epsilon", s.epsilon);
    take(cfg, "variant", s.variant);
    take(cfg, "shape", s.shape);
    take(cfg, "out", s.out);
    take(cfg, "seed", s.seed);
    take(cfg, "tol", s.tol);
    take(cfg, "directions", s.directions);
    take(cfg, "start", s.start);
    take(cfg, "eps_grid", s.eps_grid);
    take(cfg, "eps_min", s.eps_min);
    take(cfg, "ratio", s.ratio);
    take(cfg, "first", s.first);
    take(cfg, "sweeps", s.sweeps);
    take(cfg, "max_iter", s.max_iter);
    take(cfg, "gap_min", s.gap_min);
  }
  if (f.L) s.L = *f.L;
  if (f.epsilon) s.epsilon = *f.epsilon;
  if (f.variant) s.variant = *f.variant;
  if (f.shape) s.shape = *f.shape;
  if (f.out) s.out = *f.out;
  if (f.seed) s.seed = *f.seed;
  if (f.tol) s.tol = *f.tol;
  if (f.directions) s.directions = *f.directions;
  if (f.start) s.start = *f.start;
  if (f.eps_grid) s.eps_grid = *f.eps_grid;
  if (s.L < 2 || s.L > 64) throw ConfigError("L must lie in [2, 64]");
  if (s.directions < 1) throw ConfigError("directions must be positive");
  if (!(s.tol > 0.0)) throw ConfigError("tol must be positive");
  if (s.sweeps < 0 || s.max_iter < 1) throw ConfigError("sweeps >= 0 and max_iter >= 1 required");
  return s;
}

json settings_json(const Settings& s) {
  return {{"L", s.L},         {"epsilon", s.epsilon}, {"variant", s.variant},   {"shape", s.shape},
          {"seed", s.seed},   {"tol", s.tol},         {"directions", s.directions}, {"start", s.start},
          {"eps_grid", s.eps_grid}, {"eps_min", s.eps_min}, {"ratio", s.ratio}, {"first", s.first},
          {"sweeps", s.sweeps}, {"max_iter", s.max_iter}, {"gap_min", s.gap_min}};
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw IoError("cannot write '" + p.string() + "'");
  f.precision(17);
  return f;
}

void write_geometry_csv(const fs::path& p, const ImmersionMap& F) {
  const auto geo = second_form(F);
  const auto cd = solve_liouville(metric_from_immersion(F), geo.K);
  auto f = open_out(p);
  f << "theta,phi,H,K,lambda2\n";
  const SphereGrid& g = F.grid();
  for (int i = 0; i < g.size(); ++i)
    f << g.theta()[i] << ',' << g.phi()[i] << ',' << geo.H[i] << ',' << geo.K[i] << ',' << cd.lambda2[i] << '\n';
}

json spectral_json(const SpectralReport& r) {
  return {{"epsilon", r.epsilon},
          {"rows", r.rows},
          {"cols", r.cols},
          {"rank", r.rank},
          {"kernel_dim", r.kernel_dim},
          {"cokernel_dim", r.cokernel_dim},
          {"index", r.index},
          {"gap_ratio", r.gap_ratio},
          {"reliable", r.reliable},
          {"smallest_singular_values", r.smallest(12)},
          {"mode_labels", r.mode_labels}};
}

struct Run {
  const Settings& s;
  fs::path out;
  json report;
};

int check_gauss(Run& run) {
  const SphereGrid g(run.s.L);
  const auto F = make_immersion(parse_shape(run.s.shape), g);
  const double d = gauss_check(F);
  run.report["max_discrepancy"] = d;
  std::cout << "gauss: max |K_intrinsic - det(shape)| = " << d << "\n";
  write_geometry_csv(run.out / "geometry.csv", F);
  return 0;
}

int check_darboux(Run& run) {
  const SphereGrid g(run.s.L);
  const auto F = make_immersion(parse_shape(run.s.shape), g);
  std::mt19937_64 rng(run.s.seed);
  std::normal_distribution<double> nd;
  std::vector<std::array<double, 3>> dirs{{0.0, 0.0, 1.0}};
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector3d v(nd(rng), nd(rng), nd(rng));
    v.normalize();
    dirs.push_back({v[0], v[1], v[2]});
  }
  json rows = json::array();
  double worst = 0.0;
  for (const auto& e : dirs) {
    const double r = darboux_residual(F, e);
    worst = std::max(worst, r);
    rows.push_back({{"e", e}, {"residual", r}});
    std::cout << "darboux: e = (" << e[0] << ", " << e[1] << ", " << e[2] << ") residual " << r << "\n";
  }
  run.report["directions"] = rows;
  run.report["max_residual"] = worst;
  write_geometry_csv(run.out / "geometry.csv", F);
  return 0;
}

int uniformize(Run& run) {
  const SphereGrid g(run.s.L);
  const auto F = make_immersion(parse_shape(run.s.shape), g);
  const auto geo = second_form(F);
  const auto cd = solve_liouville(metric_from_immersion(F), geo.K);
  run.report["iterations"] = static_cast<int>(cd.residual_history.size()) - 1;
  run.report["residual_history"] = cd.residual_history;
  run.report["nodal_residual"] = cd.residual;
  run.report["mobius_boost"] = cd.gauge.boost;
  run.report["lambda2_min"] = cd.lambda2.minCoeff();
  run.report["lambda2_max"] = cd.lambda2.maxCoeff();
  std::cout << "uniformize: " << cd.residual_history.size() - 1 << " iterations, projected residual "
            << cd.residual_history.back() << ", nodal residual " << cd.residual << "\n";
  write_geometry_csv(run.out / "geometry.csv", F);
  return 0;
}

int symbol(Run& run) {
  const SphereGrid g(run.s.L);
  const auto F = make_immersion(parse_shape(run.s.shape), g);
  const auto scan = symbol_scan(symbol_context(F, run.s.epsilon, parse_variant(run.s.variant)), run.s.directions);
  const bool characteristic = scan.max_singular <= 1e-12;
  run.report["min_singular"] = scan.min_singular;
  run.report["max_of_min_singular"] = scan.max_singular;
  run.report["worst_node"] = scan.worst_node;
  run.report["worst_angle"] = scan.worst_angle;
  run.report["characteristic_all_sampled"] = characteristic;
  run.report["elliptic"] = scan.min_singular > 1e-12;
  std::cout << "symbol: min singular value " << scan.min_singular << " over " << g.size() << " nodes x "
            << scan.directions << " directions\n";
  if (characteristic) std::cout << "symbol: characteristic in all sampled directions\n";
  write_geometry_csv(run.out / "geometry.csv", F);
  return 0;
}

int index_cmd(Run& run) {
  const SphereGrid g(run.s.L);
  const auto F = make_immersion(parse_shape(run.s.shape), g);
  const auto op = assemble_linearization(F, run.s.epsilon, parse_variant(run.s.variant));
  const auto r = svd_report(op, run.s.gap_min);
  run.report["spectral"] = spectral_json(r);
  const auto b = based_report(op, killing_modes(F), run.s.gap_min);
  run.report["based"] = spectral_json(b);
  run.report["kernel_modes"] = identify_kernel(F, op, r).labels();
  std::cout << "index: kernel " << r.kernel_dim << " cokernel " << r.cokernel_dim << " index " << r.index
            << " gap " << r.gap_ratio << (r.reliable ? "" : " (unreliable)") << "\n";
  std::cout << "based: kernel " << b.kernel_dim << " cokernel " << b.cokernel_dim << " index " << b.index << "\n";
  write_geometry_csv(run.out / "geometry.csv", F);
  return 0;
}

int kernel_sweep(Run& run) {
  const SphereGrid g(run.s.L);
  const auto F = make_immersion(parse_shape(run.s.shape), g);
  SweepOptions opt;
  opt.variant = parse_variant(run.s.variant);
  opt.gap_min = run.s.gap_min;
  const auto reps = kernel_vs_epsilon(F, run.s.eps_grid, opt);
  json rows = json::array();
  for (const auto& r : reps) {
    rows.push_back(spectral_json(r));
    std::cout << "eps " << r.epsilon << ": kernel " << r.kernel_dim << " cokernel " << r.cokernel_dim << " index "
              << r.index << (r.reliable ? "" : " (unreliable)") << "\n";
  }
  run.report["sweep"] = rows;
  write_geometry_csv(run.out / "geometry.csv", F);
  return 0;
}

int solve(Run& run) {
  const SphereGrid g(run.s.L);
  const auto target_F = make_immersion(parse_shape(run.s.shape), g);
  const auto F0 = make_immersion(parse_shape(run.s.start), g);
  NewtonOptions opt;
  opt.tol = run.s.tol;
  opt.max_iter = run.s.max_iter;
  opt.gap_min = run.s.gap_min;
  const auto r = newton_solve(F0, target_from_immersion(target_F, run.s.epsilon, parse_variant(run.s.variant)), opt);
  run.report["solve_status"] = to_string(r.status);
  run.report["iterations"] = r.iterations;
  run.report["residual_history"] = r.residual_history;
  run.report["rejected_steps"] = r.rejected_steps;
  run.report["least_squares_floor"] = r.least_squares_floor;
  run.report["message"] = r.message;
  const double err = procrustes(r.F.position(), target_F.position()).max_error;
  run.report["procrustes_error"] = err;
  std::cout << "solve: " << to_string(r.status) << " after " << r.iterations << " iterations, residual "
            << r.residual_history.back() << ", aligned node error vs shape " << err << "\n";
  write_immersion_file(run.out / "solution.json", r.F);
  write_geometry_csv(run.out / "geometry.csv", r.F);
  if (!r.converged()) throw ConvergenceError(r.message);
  return 0;
}

int continue_cmd(Run& run) {
  const SphereGrid g(run.s.L);
  const auto shape_F = make_immersion(parse_shape(run.s.shape), g);
  const auto tm = make_target_metric(metric_from_immersion(shape_F));
  ContinuationOptions opt;
  opt.variant = parse_variant(run.s.variant);
  opt.sweeps = run.s.sweeps;
  opt.newton.tol = run.s.tol;
  opt.newton.max_iter = run.s.max_iter;
  opt.newton.gap_min = run.s.gap_min;
  const auto schedule = geometric_schedule(run.s.eps_min, run.s.ratio, run.s.first);
  const auto tr = epsilon_continuation(tm, schedule, opt);

  auto f = open_out(run.out / "trace.csv");
  f << "epsilon,iters,residual";
  for (int k = 1; k <= opt.num_singular; ++k) f << ",sv" << k;
  f << '\n';
  json steps = json::array();
  for (const auto& s : tr.steps) {
    steps.push_back({{"epsilon", s.epsilon},
                     {"iterations", s.iterations},
                     {"residual", s.residual},
                     {"accepted", s.accepted},
                     {"isometry_defect", s.accepted ? json(s.defect) : json(nullptr)}});
    if (!s.accepted) continue;
    f << s.epsilon << ',' << s.iterations << ',' << s.residual;
    for (double v : s.singular_values) f << ',' << v;
    f << '\n';
  }
  run.report["schedule"] = schedule;
  run.report["steps"] = steps;
  run.report["trace_status"] = to_string(tr.status);
  run.report["message"] = tr.message;
  if (const auto* last = tr.last_accepted()) {
    const auto F = ImmersionMap::from_coeffs(g, last->coeffs);
    run.report["final_epsilon"] = last->epsilon;
    run.report["final_isometry_defect"] = last->defect;
    std::cout << "continue: " << to_string(tr.status) << ", last accepted eps " << last->epsilon
              << ", isometry defect " << last->defect << "\n";
    write_immersion_file(run.out / "solution.json", F);
    write_geometry_csv(run.out / "geometry.csv", F);
  }
  if (tr.status != TraceStatus::ReachedEpsMin) throw ConvergenceError(tr.message);
  return 0;
}

int exit_code(const std::string& kind) {
  if (kind == "config") return 2;
  if (kind == "io") return 3;
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"immreg: regularized isometric-immersion experiments on the sphere"};
  app.require_subcommand(1);
  Flags flags;
  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(Run&);
  };
  const std::vector<Cmd> cmds{
      {"check-gauss", "intrinsic vs extrinsic Gauss curvature", check_gauss},
      {"check-darboux", "Darboux equation residual for e_z and two random directions", check_darboux},
      {"uniformize", "conformal class and conformal factor of the induced metric", uniformize},
      {"symbol", "principal symbol scan over nodes and directions", symbol},
      {"index", "kernel, cokernel and index of the linearization", index_cmd},
      {"kernel-sweep", "spectral report over an epsilon grid", kernel_sweep},
      {"solve", "Newton solve for the data of --shape from --start", solve},
      {"continue", "epsilon continuation toward the metric of --shape", continue_cmd},
  };
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--L", flags.L, "harmonic degree");
    sub->add_option("--epsilon", flags.epsilon, "regularization parameter in [0, 1]");
    sub->add_option("--variant", flags.variant, "additive | multiplicative")
        ->check(CLI::IsMember({"additive", "multiplicative"}));
    sub->add_option("--shape", flags.shape, "sphere:<r> | ellipsoid:<a>,<b>,<c> | perturbed:... | file:<path>");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--config", flags.config, "JSON settings file");
    sub->add_option("--seed", flags.seed, "seed for random directions");
    sub->add_option("--tol", flags.tol, "Newton tolerance");
    if (std::string(c.name) == "symbol") sub->add_option("--directions", flags.directions, "xi directions");
    if (std::string(c.name) == "solve") sub->add_option("--start", flags.start, "starting shape");
    if (std::string(c.name) == "kernel-sweep")
      sub->add_option("--eps-grid", flags.eps_grid, "epsilon values")->delimiter(',');
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_record("config", e.what()).dump() << "\n";
    return 2;
  }

  fs::path out;
  try {
    const Settings s = load_settings(flags);
    out = s.out;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory '" + s.out + "': " + ec.message());
    Run run{s, out, json::object()};
    run.report["schema"] = kSchema;
    const auto* sub = app.get_subcommands().front();
    run.report["command"] = sub->get_name();
    run.report["settings"] = settings_json(s);
    int rc = 0;
    std::string failure;
    for (const auto& c : cmds) {
      if (sub->get_name() != c.name) continue;
      try {
        rc = c.fn(run);
      } catch (const Error& e) {
        // Partial results stay in the report next to the error.
        run.report["status"] = "error";
        run.report["error"] = {{"kind", e.kind()}, {"message", e.what()}};
        write_json(out / "report.json", run.report);
        std::cerr << error_record(e.kind(), e.what()).dump() << "\n";
        return exit_code(e.kind());
      }
    }
    run.report["status"] = "ok";
    write_json(out / "report.json", run.report);
    return rc;
  } catch (const Error& e) {
    const json rec = error_record(e.kind(), e.what());
    std::cerr << rec.dump() << "\n";
    if (!out.empty() && fs::is_directory(out)) {
      try {
        write_json(out / "report.json", rec);
      } catch (const Error&) {
      }
    }
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << error_record("internal", e.what()).dump() << "\n";
    return 1;
  }
}
