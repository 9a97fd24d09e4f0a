#include "aerostat/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

namespace aerostat {

using nlohmann::json;

void RunConfig::validate() const {
  design.validate(mode);
  material.validate();
  loads.validate();
  if (strips < 1) throw ConfigError("mesh.strips must be >= 1");
  if (tris_per_strip < 2 || tris_per_strip % 2 != 0)
    throw ConfigError("mesh.tris_per_strip must be even and >= 2");
  if (symmetry == SymmetryMode::Lobe &&
      (lobes < 1 || design.n_gores % std::max(1, lobes) != 0))
    throw ConfigError("mesh.lobes must divide design.n_gores");
  if (tendon_shorten < 0.0 || tendon_shorten >= 1.0)
    throw ConfigError("tendon_shorten must lie in [0, 1)");
  if (!(thickness_scale > 0.0)) throw ConfigError("thickness_scale must be > 0");
  if (closed_system && !loads.target_volume)
    throw ConfigError("closed system requires loads.target_volume");
  solver.validate();
  if (const auto mism = loads.archimedes_mismatch(); mism && *mism > 0.01)
    std::cerr << "warning: Archimedes consistency b*omega0 vs b_d*omega0_d off by "
              << *mism * 100.0 << "%\n";
}

namespace {

json to_json(const RunConfig& c) {
  json j;
  j["mode"] = c.mode == GoreMode::Pumpkin ? "pumpkin" : "zpns";
  j["design"] = {{"n_gores", c.design.n_gores},
                 {"buoyancy", c.design.buoyancy},
                 {"payload", c.design.payload},
                 {"film_weight", c.design.film_weight},
                 {"tendon_weight", c.design.tendon_weight},
                 {"constant_pressure", c.design.constant_pressure},
                 {"bulge_radius", c.design.bulge_radius},
                 {"endplate_diameter", c.design.endplate_diameter},
                 {"circumferential_stress", c.design.circumferential_stress}};
  j["material"] = {{"thickness", c.material.thickness},
                   {"youngs_modulus", c.material.youngs},
                   {"poisson", c.material.poisson}};
  j["loads"] = {{"buoyancy", c.loads.buoyancy},
                {"constant_pressure", c.loads.constant_pressure}};
  if (c.loads.target_volume) j["loads"]["target_volume"] = *c.loads.target_volume;
  if (c.loads.design_buoyancy) j["loads"]["design_buoyancy"] = *c.loads.design_buoyancy;
  if (c.loads.design_volume) j["loads"]["design_volume"] = *c.loads.design_volume;
  j["mesh"] = {{"strips", c.strips},
               {"tris_per_strip", c.tris_per_strip},
               {"symmetry", c.symmetry == SymmetryMode::HalfGore ? "half_gore"
                            : c.symmetry == SymmetryMode::Lobe   ? "lobe"
                            : c.symmetry == SymmetryMode::Full   ? "full"
                                                                 : "none"},
               {"lobes", c.lobes}};
  j["tendons"] = {{"enabled", c.tendons_enabled},
                  {"sense", c.tendon_sense == TendonSense::LessEqual      ? "le"
                            : c.tendon_sense == TendonSense::GreaterEqual ? "ge"
                                                                          : "eq"},
                  {"form", c.tendon_form == TendonForm::Strain ? "strain" : "energy"},
                  {"stiffness", c.tendon_stiffness},
                  {"shorten", c.tendon_shorten}};
  j["thickness_scale"] = c.thickness_scale;
  j["shapefind"] = {{"tol", c.shooting_tol}};
  if (c.shapefind_volume_target)
    j["shapefind"]["volume_target"] = *c.shapefind_volume_target;
  if (c.generator_csv) j["shapefind"]["generator_csv"] = *c.generator_csv;
  if (c.vb_csv) j["shapefind"]["vb_csv"] = *c.vb_csv;
  j["closed_system"] = c.closed_system;
  j["solver"] = {{"outer_iterations", c.solver.outer_iterations},
                 {"penalty_growth", c.solver.penalty_growth},
                 {"penalty_initial", c.solver.penalty_initial},
                 {"inner", c.solver.inner == SolveConfig::Inner::QuasiNewton
                               ? "quasi_newton"
                               : "projected_newton"},
                 {"grad_tol", c.solver.grad_tol},
                 {"constraint_tol", c.solver.constraint_tol},
                 {"max_inner_iterations", c.solver.max_inner_iterations},
                 {"lbfgs_memory", c.solver.lbfgs_memory},
                 {"length_scale", c.solver.length_scale},
                 {"seed", c.solver.seed}};
  j["output_dir"] = c.output_dir;
  return j;
}

template <typename T>
void get_req(const json& j, const std::string& section, const std::string& key, T* out) {
  if (!j.contains(key))
    throw ConfigError("config: missing required field " + section + "." + key);
  try {
    *out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for " + section + "." + key);
  }
}

template <typename T>
void get_opt(const json& j, const std::string& section, const std::string& key, T* out) {
  if (!j.contains(key)) return;
  try {
    *out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for " + section + "." + key);
  }
}

}  // namespace

std::string RunConfig::canonical_json() const { return to_json(*this).dump(2); }

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig c;
  std::string mode = "zpns";
  get_opt(j, "", "mode", &mode);
  if (mode == "pumpkin")
    c.mode = GoreMode::Pumpkin;
  else if (mode == "zpns")
    c.mode = GoreMode::Zpns;
  else
    throw ConfigError("config: mode must be 'zpns' or 'pumpkin'");

  if (!j.contains("design")) throw ConfigError("config: missing required field design");
  const json& d = j["design"];
  get_req(d, "design", "n_gores", &c.design.n_gores);
  get_req(d, "design", "buoyancy", &c.design.buoyancy);
  get_req(d, "design", "payload", &c.design.payload);
  get_req(d, "design", "film_weight", &c.design.film_weight);
  get_req(d, "design", "tendon_weight", &c.design.tendon_weight);
  get_req(d, "design", "endplate_diameter", &c.design.endplate_diameter);
  get_opt(d, "design", "constant_pressure", &c.design.constant_pressure);
  get_opt(d, "design", "bulge_radius", &c.design.bulge_radius);
  get_opt(d, "design", "circumferential_stress", &c.design.circumferential_stress);

  if (!j.contains("material"))
    throw ConfigError("config: missing required field material");
  const json& m = j["material"];
  get_req(m, "material", "thickness", &c.material.thickness);
  get_req(m, "material", "youngs_modulus", &c.material.youngs);
  get_req(m, "material", "poisson", &c.material.poisson);

  if (j.contains("loads")) {
    const json& l = j["loads"];
    get_opt(l, "loads", "buoyancy", &c.loads.buoyancy);
    get_opt(l, "loads", "constant_pressure", &c.loads.constant_pressure);
    double tv = 0.0;
    if (l.contains("target_volume")) {
      get_req(l, "loads", "target_volume", &tv);
      c.loads.target_volume = tv;
    }
    if (l.contains("design_buoyancy")) {
      get_req(l, "loads", "design_buoyancy", &tv);
      c.loads.design_buoyancy = tv;
    }
    if (l.contains("design_volume")) {
      get_req(l, "loads", "design_volume", &tv);
      c.loads.design_volume = tv;
    }
  } else {
    c.loads.buoyancy = c.design.buoyancy;
    c.loads.constant_pressure = c.design.constant_pressure;
  }
  if (c.loads.buoyancy == 0.0) c.loads.buoyancy = c.design.buoyancy;

  if (j.contains("mesh")) {
    const json& me = j["mesh"];
    get_opt(me, "mesh", "strips", &c.strips);
    get_opt(me, "mesh", "tris_per_strip", &c.tris_per_strip);
    std::string sym = "half_gore";
    get_opt(me, "mesh", "symmetry", &sym);
    if (sym == "half_gore")
      c.symmetry = SymmetryMode::HalfGore;
    else if (sym == "lobe")
      c.symmetry = SymmetryMode::Lobe;
    else if (sym == "full")
      c.symmetry = SymmetryMode::Full;
    else if (sym == "none")
      c.symmetry = SymmetryMode::None;
    else
      throw ConfigError("config: mesh.symmetry must be half_gore|lobe|full|none");
    get_opt(me, "mesh", "lobes", &c.lobes);
  }

  if (j.contains("tendons")) {
    const json& t = j["tendons"];
    get_opt(t, "tendons", "enabled", &c.tendons_enabled);
    std::string sense = "le", form = "strain";
    get_opt(t, "tendons", "sense", &sense);
    get_opt(t, "tendons", "form", &form);
    if (sense == "le")
      c.tendon_sense = TendonSense::LessEqual;
    else if (sense == "eq")
      c.tendon_sense = TendonSense::Equal;
    else if (sense == "ge")
      c.tendon_sense = TendonSense::GreaterEqual;
    else
      throw ConfigError("config: tendons.sense must be le|eq|ge");
    if (form == "strain")
      c.tendon_form = TendonForm::Strain;
    else if (form == "energy")
      c.tendon_form = TendonForm::Energy;
    else
      throw ConfigError("config: tendons.form must be strain|energy");
    get_opt(t, "tendons", "stiffness", &c.tendon_stiffness);
    get_opt(t, "tendons", "shorten", &c.tendon_shorten);
  }
  get_opt(j, "", "thickness_scale", &c.thickness_scale);

  if (j.contains("shapefind")) {
    const json& s = j["shapefind"];
    get_opt(s, "shapefind", "tol", &c.shooting_tol);
    if (s.contains("volume_target")) {
      double v = 0.0;
      get_req(s, "shapefind", "volume_target", &v);
      c.shapefind_volume_target = v;
    }
    if (s.contains("generator_csv")) {
      std::string p;
      get_req(s, "shapefind", "generator_csv", &p);
      c.generator_csv = p;
    }
    if (s.contains("vb_csv")) {
      std::string p;
      get_req(s, "shapefind", "vb_csv", &p);
      c.vb_csv = p;
    }
  }
  get_opt(j, "", "closed_system", &c.closed_system);

  if (j.contains("solver")) {
    const json& s = j["solver"];
    get_opt(s, "solver", "outer_iterations", &c.solver.outer_iterations);
    get_opt(s, "solver", "penalty_growth", &c.solver.penalty_growth);
    get_opt(s, "solver", "penalty_initial", &c.solver.penalty_initial);
    get_opt(s, "solver", "grad_tol", &c.solver.grad_tol);
    get_opt(s, "solver", "constraint_tol", &c.solver.constraint_tol);
    get_opt(s, "solver", "max_inner_iterations", &c.solver.max_inner_iterations);
    get_opt(s, "solver", "lbfgs_memory", &c.solver.lbfgs_memory);
    get_opt(s, "solver", "length_scale", &c.solver.length_scale);
    get_opt(s, "solver", "seed", &c.solver.seed);
    std::string inner = "quasi_newton";
    get_opt(s, "solver", "inner", &inner);
    if (inner == "quasi_newton")
      c.solver.inner = SolveConfig::Inner::QuasiNewton;
    else if (inner == "projected_newton")
      c.solver.inner = SolveConfig::Inner::ProjectedNewton;
    else
      throw ConfigError("config: solver.inner must be quasi_newton|projected_newton");
  }
  get_opt(j, "", "output_dir", &c.output_dir);
  c.validate();
  return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

RunConfig table1_zpns_config() {
  RunConfig c;
  c.mode = GoreMode::Zpns;
  c.design.n_gores = 200;
  c.design.buoyancy = 0.068;
  c.design.payload = 4000.0;
  c.design.film_weight = 0.344;
  c.design.tendon_weight = 0.094;
  c.design.endplate_diameter = 1.32;
  c.design.constant_pressure = 0.0;
  c.material.thickness = 32e-6;
  c.material.youngs = 404.2e6;
  c.material.poisson = 0.825;
  c.loads.buoyancy = 0.068;
  c.loads.constant_pressure = 0.0;
  c.shapefind_volume_target = 137023.0;
  return c;
}

RunConfig table1_pumpkin_config() {
  RunConfig c = table1_zpns_config();
  c.mode = GoreMode::Pumpkin;
  c.design.constant_pressure = 200.0;
  c.design.bulge_radius = 0.785;
  c.loads.constant_pressure = 200.0;
  c.shapefind_volume_target.reset();
  return c;
}

ShapefindOutput run_shapefind(const RunConfig& cfg) {
  cfg.design.validate(cfg.mode);
  ShapefindOutput out;
  if (cfg.generator_csv) {
    out.generator = read_generator_csv(*cfg.generator_csv);
  } else {
    out.generator = solve_zpns_generator(cfg.design, cfg.shooting_tol,
                                         cfg.shapefind_volume_target);
  }
  if (cfg.mode == GoreMode::Pumpkin) {
    std::optional<std::vector<double>> vb;
    if (cfg.vb_csv) vb = read_vb_csv(*cfg.vb_csv, out.generator);
    out.gore = build_pumpkin_gore(out.generator, cfg.design.bulge_radius,
                                  cfg.design.n_gores, vb);
  } else {
    out.gore = build_zpns_gore(out.generator, cfg.design.n_gores);
  }
  out.pattern = layflat(out.gore);
  return out;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  PipelineResult pr;
  pr.shape = run_shapefind(cfg);

  RefMesh base = triangulate_half_gore(pr.shape.pattern, cfg.strips, cfg.tris_per_strip);
  SymmetrySpec sym;
  sym.mode = cfg.symmetry;
  sym.n_gores = cfg.design.n_gores;
  sym.lobes = cfg.lobes;
  pr.mesh = apply_symmetry(base, sym);
  pr.initial = lift_initial_guess(pr.mesh, pr.shape.gore);

  Problem prob;
  prob.mesh = &pr.mesh;
  prob.material = cfg.material;
  prob.material.thickness *= cfg.thickness_scale;
  prob.loads = cfg.loads;
  if (!cfg.closed_system) prob.loads.target_volume.reset();

  if (cfg.tendons_enabled) {
    TendonSpec t;
    t.seam = 0;
    t.length = pr.shape.pattern.L_t * (1.0 - cfg.tendon_shorten);
    t.sense = cfg.tendon_sense;
    t.form = cfg.tendon_form;
    t.stiffness = cfg.tendon_stiffness;
    prob.constraints.tendons.push_back(t);
  }
  if (cfg.closed_system) prob.constraints.volume_target = cfg.loads.target_volume;

  pr.solution = minimize(prob, pr.initial, cfg.solver);
  pr.report = averaged_profiles(pr.solution, pr.mesh);
  return pr;
}

namespace {

void write_manifest(const RunConfig& cfg, const std::string& command) {
  namespace fs = std::filesystem;
  const std::string cj = cfg.canonical_json();
  json j;
  j["command"] = command;
  j["config"] = json::parse(cj);
  j["config_hash"] = fnv1a(cj);
  j["seed"] = cfg.solver.seed;
  j["version"] = "0.1.0";
  std::ofstream os(fs::path(cfg.output_dir) / "manifest.json");
  os << j.dump(2) << '\n';
}

}  // namespace

void write_shapefind_artifacts(const RunConfig& cfg, const ShapefindOutput& shape) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  write_generator_csv(shape.generator, (fs::path(cfg.output_dir) / "generator.csv").string());
  write_pattern_csv(shape.pattern, (fs::path(cfg.output_dir) / "pattern.csv").string());
  std::ofstream os(fs::path(cfg.output_dir) / "shape.json");
  os << shape_summary_json(shape.generator, shape.pattern) << '\n';
  write_manifest(cfg, "shapefind");
}

void write_run_artifacts(const RunConfig& cfg, const PipelineResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const fs::path dir(cfg.output_dir);
  write_generator_csv(result.shape.generator, (dir / "generator.csv").string());
  write_pattern_csv(result.shape.pattern, (dir / "pattern.csv").string());
  {
    std::ofstream os(dir / "shape.json");
    os << shape_summary_json(result.shape.generator, result.shape.pattern) << '\n';
  }
  write_mesh_obj(result.mesh, result.solution.state, (dir / "mesh.txt").string());
  write_mesh_csv(result.mesh, (dir / "nodes.csv").string(),
                 (dir / "facets.csv").string());
  write_iteration_log(result.solution.log, (dir / "iterations.log").string());
  {
    std::ofstream os(dir / "result.json");
    os << solve_result_json(result.solution) << '\n';
  }
  write_profiles_csv(result.report, (dir / "profiles.csv").string());
  write_profiles_dat(result.report, (dir / "profiles.dat").string());
  write_responses_csv(result.solution, result.mesh, (dir / "responses.csv").string());
  {
    std::ofstream os(dir / "summary.json");
    os << report_summary_json(result.report) << '\n';
  }
  write_manifest(cfg, "solve");
}

}  // namespace aerostat
