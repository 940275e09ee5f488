// kdyn: command-line front end for the kernel fixed-point analysis library.
//
// Commands: analyze, table, iterate, cobweb, ode, simulate, depth-threshold,
// figure.  Every run writes one manifest (command, resolved configuration,
// seed, output paths, duration) next to its data files, so any output can be
// reproduced byte-for-byte from its manifest alone.
//
// Exit codes: 0 success, 2 usage error (unknown name, bad argument), 3
// numerical failure (degenerate statistics, diverged integration, I/O).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kerneldyn/kerneldyn.hpp"

namespace {

using nlohmann::json;
using namespace kerneldyn;

// ---------------------------------------------------------------------------
// Run context: output directory, shared flags, manifest bookkeeping.
// ---------------------------------------------------------------------------

struct run_ctx {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int K = default_truncation;
  bool want_json = false;
  bool want_csv = false;
  bool want_svg = false;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  std::string path(const std::string& file) const { return out_dir + "/" + file; }

  void wrote(const std::string& p) { outputs.push_back(p); }

  void finish(const std::string& command, const std::string& stem, json config) {
    config["seed"] = seed;
    config["K"] = K;
    config["out_dir"] = out_dir;
    RunManifest m;
    m.command = command;
    m.config = std::move(config);
    m.seed = seed;
    m.outputs = outputs;
    m.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_json_file(path(stem + "_manifest.json"), m.to_json());
  }
};

/// File-name-safe activation stem ("leaky_relu:0.1" -> "leaky_relu_0.1").
std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

/// Rows accumulated in memory so they can go to stdout and to a file.
struct csv_table {
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }

  void print() const {
    for (const auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i) {
        if (i) std::cout << ',';
        std::cout << csv_field(r[i]);
      }
      std::cout << '\n';
    }
  }

  void write(run_ctx& ctx, const std::string& file) const {
    csv_writer w(ctx.path(file));
    for (const auto& r : rows) w.row(r);
    ctx.wrote(ctx.path(file));
  }
};

std::string num(double v) { return format_number(v); }

// ---------------------------------------------------------------------------
// Shared pieces.
// ---------------------------------------------------------------------------

KernelMap map_for(const std::string& name, int K) {
  const Activation act = make_activation(name);
  return make_kernel_map(act, K);
}

/// Classification, or nothing for linear maps (where it does not apply but
/// iteration still does).
std::optional<FixedPointReport> try_report(const KernelMap& km) {
  try {
    return find_fixed_point(km);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

csv_table trajectory_rows(const Trajectory& t) {
  csv_table out;
  out.add({"ell_or_t", "rho", "bound", "functional_name"});
  for (size_t i = 0; i < t.times.size(); ++i) {
    out.add({num(t.times[i]), num(t.values[i]),
             i < t.bounds.size() ? num(t.bounds[i]) : std::string{},
             t.functional_name});
  }
  return out;
}

void plot_series(run_ctx& ctx, const std::string& file, const std::string& title,
                 const std::string& xlabel, const std::string& ylabel, bool log_y,
                 std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>
                     series) {
  svg_plot p(title, xlabel, ylabel);
  p.set_log_y(log_y);
  for (auto& [name, pts] : series) p.add_series(name, std::move(pts));
  p.write(ctx.path(file));
  ctx.wrote(ctx.path(file));
}

// ---------------------------------------------------------------------------
// Commands.
// ---------------------------------------------------------------------------

void cmd_analyze(run_ctx& ctx, const std::string& name) {
  const Activation act = make_activation(name);
  const KernelMap km = make_kernel_map(act, ctx.K);
  const FixedPointReport rep = find_fixed_point(km);
  const json j = report_to_json(name, act.C, rep);
  std::cout << j.dump(2) << "\n";

  const std::string stem = "analyze_" + sanitize(name);
  if (ctx.want_json) {
    write_json_file(ctx.path(stem + ".json"), j);
    ctx.wrote(ctx.path(stem + ".json"));
  }
  if (ctx.want_csv) {
    const HermiteExpansion ex = expand(act, ctx.K);
    csv_table t;
    t.add({"k", "c_k", "c_k_squared", "cumulative_energy"});
    double cum = 0.0;
    for (size_t k = 0; k < ex.coeffs.size(); ++k) {
      cum += ex.coeffs[k] * ex.coeffs[k];
      t.add({std::to_string(k), num(ex.coeffs[k]), num(ex.coeffs[k] * ex.coeffs[k]), num(cum)});
    }
    t.write(ctx, stem + "_expansion.csv");
  }
  ctx.finish("analyze", stem, json{{"activation", name}});
}

void cmd_table(run_ctx& ctx) {
  csv_table t;
  t.add({"name", "C", "alpha", "rho_star", "kappa_at_star", "kappa0", "dkappa0", "dkappa1",
         "dkappa_at_star", "case", "footnote"});
  for (const auto& name : catalog_names()) {
    if (name == "identity") continue;  // linear: the classification does not apply
    const Activation act = make_activation(name);
    const KernelMap km = make_kernel_map(act, ctx.K);
    const FixedPointReport rep = find_fixed_point(km);
    std::string footnote;
    if (rep.dkappa1_discrepancy) {
      footnote = "kink: series kappa'(1)=" + num(rep.dkappa1_series) +
                 " vs quadrature " + num(rep.dkappa1_quad);
      if (rep.alternative) {
        footnote += "; series-rate branch: " +
                    std::string(to_string(rep.alternative->case_label)) + " alpha=" +
                    num(rep.alternative->alpha);
      }
    } else if (name == "exp") {
      footnote =
          "alpha is the harmonic rate constant 1-kappa(0)-kappa'(0)=" + num(rep.alpha) +
          "; its complement 1-alpha=2/e=" + num(1.0 - rep.alpha) +
          " appears when the rate is quoted per unit distance";
    }
    t.add({name, num(act.C), num(rep.alpha), num(rep.rho_star),
           num(kernel_eval(km, rep.rho_star)), num(rep.kappa0), num(rep.dkappa0),
           num(rep.dkappa1_quad), num(rep.dkappa_at_star), to_string(rep.case_label),
           footnote});
  }
  t.print();
  if (ctx.want_csv) t.write(ctx, "table.csv");
  ctx.finish("table", "table", json::object());
}

void cmd_iterate(run_ctx& ctx, const std::string& name, double rho0, long depth) {
  const KernelMap km = map_for(name, ctx.K);
  const auto rep = try_report(km);
  const Trajectory traj =
      rep ? iterate(km, *rep, rho0, depth) : iterate(km, rho0, depth);
  const csv_table t = trajectory_rows(traj);
  t.print();
  const std::string stem = "iterate_" + sanitize(name);
  t.write(ctx, stem + ".csv");
  if (ctx.want_svg) {
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < traj.times.size(); ++i) pts.push_back({traj.times[i], traj.values[i]});
    plot_series(ctx, stem + ".svg", name + ": kernel sequence", "layer", "rho", false,
                {{"rho", std::move(pts)}});
  }
  ctx.finish("iterate", stem,
             json{{"activation", name}, {"rho0", rho0}, {"depth", depth}});
}

void cmd_cobweb(run_ctx& ctx, const std::string& name, double rho0, long steps) {
  const KernelMap km = map_for(name, ctx.K);
  const auto pairs = cobweb(km, rho0, steps);
  csv_table t;
  t.add({"step", "rho", "kappa_rho"});
  for (size_t i = 0; i < pairs.size(); ++i) {
    t.add({std::to_string(i), num(pairs[i].first), num(pairs[i].second)});
  }
  t.print();
  const std::string stem = "cobweb_" + sanitize(name);
  t.write(ctx, stem + ".csv");
  if (ctx.want_svg) {
    std::vector<std::pair<double, double>> curve, diag, path;
    for (int i = 0; i <= 200; ++i) {
      const double r = -1.0 + 2.0 * i / 200.0;
      curve.push_back({r, kernel_eval(km, r)});
      diag.push_back({r, r});
    }
    if (!pairs.empty()) path.push_back({pairs[0].first, pairs[0].first});
    for (const auto& [a, b] : pairs) {
      path.push_back({a, b});
      path.push_back({b, b});
    }
    plot_series(ctx, stem + ".svg", name + ": kernel map", "rho", "kappa(rho)", false,
                {{"map", std::move(curve)},
                 {"identity", std::move(diag)},
                 {"path", std::move(path)}});
  }
  ctx.finish("cobweb", stem,
             json{{"activation", name}, {"rho0", rho0}, {"steps", steps}});
}

void cmd_ode(run_ctx& ctx, const std::string& name, double rho0, double t_max, double dt) {
  const KernelMap km = map_for(name, ctx.K);
  OdeOptions opt;
  opt.t_max = t_max;
  opt.dt = dt;
  const Trajectory traj = ode_solve(km, rho0, opt);
  const csv_table t = trajectory_rows(traj);
  t.print();
  const std::string stem = "ode_" + sanitize(name);
  t.write(ctx, stem + ".csv");
  if (traj.range_flag) std::cerr << "note: trajectory left [-1, 1]\n";
  if (ctx.want_svg) {
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < traj.times.size(); ++i) pts.push_back({traj.times[i], traj.values[i]});
    plot_series(ctx, stem + ".svg", name + ": kernel flow", "t", "rho", false,
                {{"rho", std::move(pts)}});
  }
  ctx.finish("ode", stem,
             json{{"activation", name}, {"rho0", rho0}, {"t_max", t_max}, {"dt", dt}});
}

void cmd_simulate(run_ctx& ctx, SimConfig cfg) {
  cfg.seed = ctx.seed;
  const Activation act = make_activation(cfg.activation);
  const KernelMap km = make_kernel_map(act, ctx.K);
  const SimResult res = run(cfg, act, km);
  csv_table t;
  t.add({"layer", "mean_kernel", "stderr", "meanfield_kernel", "mean_norm_x", "mean_norm_y"});
  for (size_t l = 0; l < res.mean_kernel.size(); ++l) {
    t.add({std::to_string(l), num(res.mean_kernel[l]), num(res.stderr_kernel[l]),
           num(res.meanfield[l]), num(res.mean_norm_x[l]), num(res.mean_norm_y[l])});
  }
  t.print();
  if (res.degenerate_trials > 0) {
    std::cerr << "note: " << res.degenerate_trials << " of " << cfg.trials
              << " trials degenerate\n";
  }
  const std::string stem = "simulate_" + sanitize(cfg.activation);
  t.write(ctx, stem + ".csv");
  if (ctx.want_svg) {
    std::vector<std::pair<double, double>> emp, mf;
    for (size_t l = 0; l < res.mean_kernel.size(); ++l) {
      emp.push_back({static_cast<double>(l), res.mean_kernel[l]});
      mf.push_back({static_cast<double>(l), res.meanfield[l]});
    }
    plot_series(ctx, stem + ".svg", cfg.activation + ": finite width vs mean field", "layer",
                "kernel", false, {{"empirical", std::move(emp)}, {"mean field", std::move(mf)}});
  }
  ctx.finish("simulate", stem,
             json{{"activation", cfg.activation},
                  {"width", cfg.width},
                  {"depth", cfg.depth},
                  {"rho0", cfg.rho0},
                  {"trials", cfg.trials},
                  {"dist", to_string(cfg.dist)},
                  {"residual", cfg.residual},
                  {"norm", to_string(cfg.norm)},
                  {"threads", cfg.threads}});
}

void cmd_depth_threshold(run_ctx& ctx, const std::string& name, double epsilon, double rho0,
                         long max_iter) {
  const KernelMap km = map_for(name, ctx.K);
  const FixedPointReport rep = find_fixed_point(km);
  const auto formula = depth_threshold(rep, epsilon);
  const auto crossing = gap_crossing_depth(km, rho0, epsilon, max_iter);
  json j{{"activation", name},
         {"epsilon", epsilon},
         {"case", to_string(rep.case_label)},
         {"formula_depth", formula ? json(*formula) : json(nullptr)},
         {"iteration_depth", crossing ? json(*crossing) : json(nullptr)}};
  std::cout << j.dump(2) << "\n";
  const std::string stem = "depth_threshold_" + sanitize(name);
  ctx.finish("depth-threshold", stem,
             json{{"activation", name},
                  {"epsilon", epsilon},
                  {"rho0", rho0},
                  {"max_iter", max_iter}});
}

void cmd_figure(run_ctx& ctx, const std::vector<std::string>& names, double rho0, long depth) {
  std::string joined;
  for (const auto& name : names) {
    const Activation act = make_activation(name);
    const KernelMap km = make_kernel_map(act, ctx.K);
    const FixedPointReport rep = find_fixed_point(km);
    const Trajectory traj = iterate(km, rep, rho0, depth);
    const std::string stem = "figure_" + sanitize(name);
    joined += (joined.empty() ? "" : "_") + sanitize(name);

    csv_table curve;
    curve.add({"x", "f_raw", "f_normalized"});
    for (int i = 0; i <= 200; ++i) {
      const double x = -4.0 + 8.0 * i / 200.0;
      const double fn = act.f(x);
      curve.add({num(x), num(act.C * fn), num(fn)});
    }
    curve.write(ctx, stem + "_activation.csv");

    csv_table mapfile;
    mapfile.add({"series", "x", "y"});
    for (int i = 0; i <= 200; ++i) {
      const double r = -1.0 + 2.0 * i / 200.0;
      mapfile.add({"map", num(r), num(kernel_eval(km, r))});
      mapfile.add({"identity", num(r), num(r)});
    }
    for (const auto& [a, b] : cobweb(km, rho0, depth)) {
      mapfile.add({"cobweb", num(a), num(b)});
    }
    mapfile.write(ctx, stem + "_map.csv");

    csv_table seq;
    seq.add({"ell", "rho", "rho_star"});
    for (size_t i = 0; i < traj.times.size(); ++i) {
      seq.add({num(traj.times[i]), num(traj.values[i]), num(rep.rho_star)});
    }
    seq.write(ctx, stem + "_sequence.csv");

    csv_table dist;
    dist.add({"ell", "distance", "bound", "functional_name"});
    for (size_t i = 0; i < traj.times.size(); ++i) {
      dist.add({num(traj.times[i]), num(bound_functional_value(rep, traj.values[i])),
                i < traj.bounds.size() ? num(traj.bounds[i]) : std::string{},
                traj.functional_name});
    }
    dist.write(ctx, stem + "_distance.csv");

    if (ctx.want_svg) {
      std::vector<std::pair<double, double>> fpts;
      for (int i = 0; i <= 200; ++i) {
        const double x = -4.0 + 8.0 * i / 200.0;
        fpts.push_back({x, act.f(x)});
      }
      plot_series(ctx, stem + "_activation.svg", name + ": normalized activation", "x",
                  "f(x)", false, {{"f", std::move(fpts)}});

      std::vector<std::pair<double, double>> mcurve, mdiag, mpath;
      for (int i = 0; i <= 200; ++i) {
        const double r = -1.0 + 2.0 * i / 200.0;
        mcurve.push_back({r, kernel_eval(km, r)});
        mdiag.push_back({r, r});
      }
      const auto pairs = cobweb(km, rho0, depth);
      if (!pairs.empty()) mpath.push_back({pairs[0].first, pairs[0].first});
      for (const auto& [a, b] : pairs) {
        mpath.push_back({a, b});
        mpath.push_back({b, b});
      }
      plot_series(ctx, stem + "_map.svg", name + ": kernel map", "rho", "kappa(rho)", false,
                  {{"map", std::move(mcurve)},
                   {"identity", std::move(mdiag)},
                   {"path", std::move(mpath)}});

      std::vector<std::pair<double, double>> spts;
      for (size_t i = 0; i < traj.times.size(); ++i)
        spts.push_back({traj.times[i], traj.values[i]});
      plot_series(ctx, stem + "_sequence.svg", name + ": kernel sequence", "layer", "rho",
                  false, {{"rho", std::move(spts)}});

      std::vector<std::pair<double, double>> dpts, bpts;
      for (size_t i = 0; i < traj.times.size(); ++i) {
        dpts.push_back({traj.times[i], bound_functional_value(rep, traj.values[i])});
        if (i < traj.bounds.size()) bpts.push_back({traj.times[i], traj.bounds[i]});
      }
      plot_series(ctx, stem + "_distance.svg", name + ": distance to the fixed point",
                  "layer", traj.functional_name, true,
                  {{"distance", std::move(dpts)}, {"bound", std::move(bpts)}});
    }
  }
  for (const auto& p : ctx.outputs) std::cout << p << "\n";
  ctx.finish("figure", "figure_" + joined,
             json{{"activations", names}, {"rho0", rho0}, {"depth", depth}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel fixed-point analysis for wide networks"};
  app.require_subcommand(1);

  run_ctx ctx;
  if (const char* env = std::getenv("KD_OUT_DIR")) ctx.out_dir = env;
  app.add_option("--seed", ctx.seed, "random seed shared by all commands");
  app.add_option("--K", ctx.K, "series truncation (number of terms minus one)")
      ->check(CLI::Range(1, 200));
  app.add_option("--out-dir", ctx.out_dir, "output directory (env KD_OUT_DIR)");
  app.add_flag("--json", ctx.want_json, "also write JSON output files");
  app.add_flag("--csv", ctx.want_csv, "also write CSV output files");
  app.add_flag("--svg", ctx.want_svg, "also write SVG plots");

  std::string name;
  double rho0 = 0.5;
  long depth = 50;
  long steps = 30;
  double t_max = 500.0, dt = 0.01;
  double epsilon = 0.0;
  int epsilon_pow2 = 0;
  long max_iter = 200000;
  SimConfig sim;
  std::string sim_dist = "gaussian", sim_norm = "none";
  std::vector<std::string> fig_names;

  auto* analyze = app.add_subcommand("analyze", "classify one activation's kernel map");
  analyze->add_option("activation", name, "catalog name")->required();

  app.add_subcommand("table", "summary table over the whole catalog");

  auto* iterate_cmd = app.add_subcommand("iterate", "exact kernel-sequence iterates");
  iterate_cmd->add_option("activation", name)->required();
  iterate_cmd->add_option("--rho0", rho0, "initial correlation");
  iterate_cmd->add_option("--depth", depth, "number of layers")->check(CLI::NonNegativeNumber);

  auto* cobweb_cmd = app.add_subcommand("cobweb", "map/iterate pairs for a cobweb plot");
  cobweb_cmd->add_option("activation", name)->required();
  cobweb_cmd->add_option("--rho0", rho0, "initial correlation");
  cobweb_cmd->add_option("--steps", steps, "number of steps")->check(CLI::NonNegativeNumber);

  auto* ode_cmd = app.add_subcommand("ode", "continuous-time kernel flow");
  ode_cmd->add_option("activation", name)->required();
  ode_cmd->add_option("--rho0", rho0, "initial correlation");
  ode_cmd->add_option("--t-max", t_max, "integration horizon");
  ode_cmd->add_option("--dt", dt, "integration step");

  auto* sim_cmd = app.add_subcommand("simulate", "finite-width Monte-Carlo validation");
  sim_cmd->add_option("activation", sim.activation)->required();
  sim_cmd->add_option("--width", sim.width, "layer width d");
  sim_cmd->add_option("--depth", sim.depth, "number of layers");
  sim_cmd->add_option("--rho0", sim.rho0, "initial correlation");
  sim_cmd->add_option("--trials", sim.trials, "independent networks");
  sim_cmd->add_option("--dist", sim_dist, "gaussian | uniform_unit_var | rademacher");
  sim_cmd->add_option("--residual", sim.residual, "skip strength r in [0,1]");
  sim_cmd->add_option("--norm", sim_norm, "none | ln_before | ln_after | rn_before | rn_after");
  sim_cmd->add_option("--threads", sim.threads, "worker threads (0 = hardware)");

  auto* thresh = app.add_subcommand("depth-threshold",
                                    "depth at which the gap to one crosses epsilon");
  thresh->add_option("activation", name)->required();
  thresh->add_option("--epsilon", epsilon, "gap threshold in (0,1)");
  thresh->add_option("--epsilon-pow2", epsilon_pow2, "gap threshold as 2^-N")
      ->check(CLI::PositiveNumber);
  thresh->add_option("--rho0", rho0, "start of the confirming iteration")->default_val(0.0);
  thresh->add_option("--max-iter", max_iter, "iteration cap for the confirmation");

  auto* fig = app.add_subcommand("figure", "per-activation data files for the standard plots");
  fig->add_option("activations", fig_names, "catalog names")->required();
  fig->add_option("--rho0", rho0, "initial correlation");
  fig->add_option("--depth", depth, "number of layers")->check(CLI::NonNegativeNumber);

  // Global flags remain valid after the subcommand name.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::filesystem::create_directories(ctx.out_dir);
    if (analyze->parsed()) {
      cmd_analyze(ctx, name);
    } else if (app.get_subcommand("table")->parsed()) {
      cmd_table(ctx);
    } else if (iterate_cmd->parsed()) {
      cmd_iterate(ctx, name, rho0, depth);
    } else if (cobweb_cmd->parsed()) {
      cmd_cobweb(ctx, name, rho0, steps);
    } else if (ode_cmd->parsed()) {
      cmd_ode(ctx, name, rho0, t_max, dt);
    } else if (sim_cmd->parsed()) {
      sim.dist = parse_weight_dist(sim_dist);
      sim.norm = parse_norm_mode(sim_norm);
      cmd_simulate(ctx, sim);
    } else if (thresh->parsed()) {
      if (epsilon_pow2 > 0 && epsilon > 0.0) {
        std::cerr << "error: give either --epsilon or --epsilon-pow2, not both\n";
        return 2;
      }
      if (epsilon_pow2 > 0) epsilon = std::ldexp(1.0, -epsilon_pow2);
      if (!(epsilon > 0.0)) {
        std::cerr << "error: an epsilon is required (--epsilon or --epsilon-pow2)\n";
        return 2;
      }
      cmd_depth_threshold(ctx, name, epsilon, rho0, max_iter);
    } else if (fig->parsed()) {
      cmd_figure(ctx, fig_names, rho0, depth);
    }
  } catch (const degenerate_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const not_found_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
