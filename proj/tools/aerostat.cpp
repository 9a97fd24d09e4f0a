// aerostat — strained equilibrium shapes of inflated wrinkled membranes.
//
// Subcommands:
//   shapefind   generator + lay-flat gore pattern (ZPNS or pumpkin)
//   solve       full pipeline: shapefind -> mesh -> minimize -> report
//   verify      inequality / gradient oracle suites
//
// Exit codes: 0 success, 2 config error, 3 solver non-convergence,
//             4 oracle violation.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "aerostat/scenario.hpp"

namespace {

using namespace aerostat;

RunConfig load_base_config(const std::string& config_path, const std::string& mode) {
  RunConfig cfg;
  if (!config_path.empty()) {
    cfg = RunConfig::from_json_file(config_path);
  } else if (mode == "pumpkin") {
    cfg = table1_pumpkin_config();
  } else {
    cfg = table1_zpns_config();
  }
  if (!mode.empty()) {
    if (mode == "pumpkin" && cfg.mode != GoreMode::Pumpkin) {
      cfg = table1_pumpkin_config();
    } else if (mode == "zpns" && cfg.mode != GoreMode::Zpns) {
      cfg = table1_zpns_config();
    }
  }
  return cfg;
}

int cmd_shapefind(const std::string& config_path, const std::string& mode, double rb,
                  double p0, double volume_target, const std::string& generator_csv,
                  const std::string& vb_csv, const std::string& out_dir) {
  RunConfig cfg = load_base_config(config_path, mode);
  if (rb > 0.0) {
    cfg.design.bulge_radius = rb;
    cfg.mode = GoreMode::Pumpkin;
  }
  if (p0 >= 0.0) {
    cfg.design.constant_pressure = p0;
    cfg.loads.constant_pressure = p0;
    if (p0 > 0.0) cfg.mode = GoreMode::Pumpkin;
  }
  if (volume_target > 0.0) cfg.shapefind_volume_target = volume_target;
  if (!generator_csv.empty()) cfg.generator_csv = generator_csv;
  if (!vb_csv.empty()) cfg.vb_csv = vb_csv;
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  cfg.design.validate(cfg.mode);

  const ShapefindOutput shape = run_shapefind(cfg);
  write_shapefind_artifacts(cfg, shape);
  std::cout << "shapefind: L_d=" << shape.generator.length
            << " m, theta0=" << shape.generator.launch_angle
            << " rad, volume=" << shape.generator.volume << " m^3\n"
            << "pattern: L_c=" << shape.pattern.L_c << " L_t=" << shape.pattern.L_t
            << " L_s=" << shape.pattern.L_s
            << " (L_s/L_t=" << shape.pattern.L_s / shape.pattern.L_t << ")\n"
            << "artifacts in " << cfg.output_dir << "\n";
  return 0;
}

int cmd_solve(const std::string& config_path, const std::string& mode, bool closed,
              bool open, const std::string& tendons, const std::string& tendon_sense,
              double tendon_shorten, double thickness_scale, double omega0,
              const std::string& out_dir) {
  RunConfig cfg = load_base_config(config_path, mode);
  if (closed && open) throw ConfigError("solve: choose one of --closed/--open");
  if (closed) {
    cfg.closed_system = true;
    if (omega0 > 0.0) cfg.loads.target_volume = omega0;
    if (!cfg.loads.target_volume && cfg.shapefind_volume_target)
      cfg.loads.target_volume = cfg.shapefind_volume_target;
    if (cfg.mode == GoreMode::Zpns) cfg.loads.constant_pressure = 0.0;
  }
  if (open) {
    cfg.closed_system = false;
    cfg.loads.target_volume.reset();
  }
  if (tendons == "on") cfg.tendons_enabled = true;
  if (tendons == "off") cfg.tendons_enabled = false;
  if (tendon_sense == "le")
    cfg.tendon_sense = TendonSense::LessEqual;
  else if (tendon_sense == "eq")
    cfg.tendon_sense = TendonSense::Equal;
  else if (tendon_sense == "ge")
    cfg.tendon_sense = TendonSense::GreaterEqual;
  else if (!tendon_sense.empty())
    throw ConfigError("solve: --tendon-sense must be le|eq|ge");
  if (tendon_shorten > 0.0) cfg.tendon_shorten = tendon_shorten;
  if (thickness_scale > 0.0) cfg.thickness_scale = thickness_scale;
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  cfg.validate();

  const PipelineResult pr = run_pipeline(cfg);
  write_run_artifacts(cfg, pr);
  std::cout << "solve: converged=" << (pr.solution.converged ? "yes" : "no")
            << " E=" << pr.solution.total_energy << " J, V=" << pr.solution.volume
            << " m^3\n"
            << "max averaged strain=" << pr.report.max_avg_strain
            << ", max averaged resultant=" << pr.report.max_avg_resultant << " N/m\n"
            << "region fractions S/U/T = " << pr.report.slack_fraction << "/"
            << pr.report.wrinkled_fraction << "/" << pr.report.tense_fraction << "\n"
            << "artifacts in " << cfg.output_dir << "\n";
  return pr.solution.converged ? 0 : 3;
}

int cmd_verify(const std::string& config_path, long samples, std::uint64_t seed) {
  RunConfig cfg = load_base_config(config_path, "");
  cfg.validate();
  const MaterialProps mat = cfg.material;

  bool all_ok = true;
  auto report = [&](const char* name, const BoundsReport& r) {
    std::cout << (r.ok() ? "[pass] " : "[FAIL] ") << name << ": " << r.checked
              << " checks, " << r.violations << " violations";
    if (!r.ok()) std::cout << " (worst " << r.worst_margin << " at " << r.note << ")";
    std::cout << "\n";
    all_ok = all_ok && r.ok();
  };

  report("film energy bounds", verify_energy_bounds(mat, samples, seed));
  report("adj2 bounds", verify_adj2_bounds(samples, seed + 1));
  report("hydrostatic bounds",
         verify_load_bounds(cfg.loads, mat, 100.0, samples, -1.0, 2.0, seed + 2));

  // gradient audits on a small admissible pumpkin state
  RunConfig small = table1_pumpkin_config();
  small.strips = 2;
  small.tris_per_strip = 10;
  const ShapefindOutput shape = run_shapefind(small);
  RefMesh base = triangulate_half_gore(shape.pattern, small.strips, small.tris_per_strip);
  SymmetrySpec sym;
  sym.mode = SymmetryMode::HalfGore;
  sym.n_gores = small.design.n_gores;
  RefMesh mesh = apply_symmetry(base, sym);
  const DeformationState init = lift_initial_guess(mesh, shape.gore);
  Problem prob;
  prob.mesh = &mesh;
  prob.material = small.material;
  prob.loads = small.loads;
  TendonSpec ts;
  ts.seam = 0;
  ts.length = shape.pattern.L_t;
  prob.constraints.tendons.push_back(ts);
  prob.constraints.volume_target = enclosed_volume(init, mesh);

  const double e_err = finite_difference_audit(prob, init, 1e-6);
  const double c_err = finite_difference_audit_constraints(prob, init, 1e-6);
  std::cout << (e_err < 1e-6 ? "[pass] " : "[FAIL] ")
            << "energy gradient vs FD: " << e_err << "\n";
  std::cout << (c_err < 1e-6 ? "[pass] " : "[FAIL] ")
            << "constraint jacobians vs FD: " << c_err << "\n";
  all_ok = all_ok && e_err < 1e-6 && c_err < 1e-6;

  std::cout << (all_ok ? "verify: all oracle suites passed\n"
                       : "verify: ORACLE VIOLATIONS\n");
  return all_ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aerostat: equilibrium shapes of strained inflated wrinkled membranes"};
  app.require_subcommand(1);

  std::string config_path, mode, out_dir, generator_csv, vb_csv;
  double rb = -1.0, p0 = -1.0, volume_target = -1.0;

  auto* sf = app.add_subcommand("shapefind", "generator + lay-flat gore pattern");
  sf->add_option("--config", config_path, "JSON config file");
  sf->add_option("--mode", mode, "zpns|pumpkin")->check(CLI::IsMember({"zpns", "pumpkin"}));
  sf->add_option("--rb", rb, "bulge radius r_B [m] (pumpkin)");
  sf->add_option("--p0", p0, "constant differential pressure p0 [Pa]");
  sf->add_option("--volume-target", volume_target,
                 "close the design at this volume [m^3] instead of zero apex force");
  sf->add_option("--generator", generator_csv, "tabulated generator CSV (skip shooting)");
  sf->add_option("--vb", vb_csv, "tabulated bulge angle CSV (s,v_B)");
  sf->add_option("--out", out_dir, "output directory");

  bool closed = false, open = false;
  std::string tendons, tendon_sense;
  double tendon_shorten = -1.0, thickness_scale = -1.0, omega0 = -1.0;
  auto* so = app.add_subcommand("solve", "full pipeline to a strained equilibrium");
  so->add_option("--config", config_path, "JSON config file");
  so->add_option("--mode", mode, "zpns|pumpkin")->check(CLI::IsMember({"zpns", "pumpkin"}));
  so->add_flag("--closed", closed, "closed system: enforce V = omega0");
  so->add_flag("--open", open, "open system: pressure given, volume free");
  so->add_option("--tendons", tendons, "on|off")->check(CLI::IsMember({"on", "off"}));
  so->add_option("--tendon-sense", tendon_sense, "le|eq|ge");
  so->add_option("--tendon-shorten", tendon_shorten, "fractional shortening (e.g. 0.02)");
  so->add_option("--thickness-scale", thickness_scale, "film thickness multiplier");
  so->add_option("--omega0", omega0, "target volume for --closed [m^3]");
  so->add_option("--out", out_dir, "output directory");

  long samples = 100000;
  std::uint64_t seed = 20240810u;
  auto* ve = app.add_subcommand("verify", "run the inequality/gradient oracle suites");
  ve->add_option("--config", config_path, "JSON config file");
  ve->add_option("--samples", samples, "samples per sweep (default 1e5)");
  ve->add_option("--seed", seed, "RNG seed");

  try {
    app.parse(argc, argv);
    if (sf->parsed())
      return cmd_shapefind(config_path, mode, rb, p0, volume_target, generator_csv,
                           vb_csv, out_dir.empty() ? "out_shapefind" : out_dir);
    if (so->parsed())
      return cmd_solve(config_path, mode, closed, open, tendons, tendon_sense,
                       tendon_shorten, thickness_scale, omega0,
                       out_dir.empty() ? "out_solve" : out_dir);
    if (ve->parsed()) return cmd_verify(config_path, samples, seed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const aerostat::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const aerostat::ShootingError& e) {
    std::cerr << "shape finding failed: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
