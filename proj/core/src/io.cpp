#include "aerostat/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace aerostat {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os.precision(17);
  return os;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

}  // namespace

void write_generator_csv(const GeneratorCurve& gen, const std::string& path) {
  auto os = open_out(path);
  os << "s,R,Z,theta,sigma_m,kappa\n";
  for (const auto& p : gen.samples)
    os << p.s << ',' << p.R << ',' << p.Z << ',' << p.theta << ',' << p.sigma_m << ','
       << p.kappa << '\n';
}

GeneratorCurve read_generator_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  GeneratorCurve gen;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() < 6) throw ConfigError("generator csv: expected 6 columns");
    GeneratorSample s;
    s.s = std::stod(f[0]);
    s.R = std::stod(f[1]);
    s.Z = std::stod(f[2]);
    s.theta = std::stod(f[3]);
    s.sigma_m = std::stod(f[4]);
    s.kappa = std::stod(f[5]);
    s.m = s.R * s.sigma_m;
    gen.samples.push_back(s);
  }
  if (gen.samples.size() < 2) throw ConfigError("generator csv: too few samples");
  gen.length = gen.samples.back().s;
  gen.launch_angle = gen.samples.front().theta;
  gen.base_tension = gen.samples.front().m;
  for (const auto& s : gen.samples) gen.r_max = std::max(gen.r_max, s.R);
  double vol = 0.0;
  for (size_t i = 1; i < gen.samples.size(); ++i) {
    const auto& a = gen.samples[i - 1];
    const auto& b = gen.samples[i];
    vol += 0.5 *
           (kPi * a.R * a.R * std::cos(a.theta) + kPi * b.R * b.R * std::cos(b.theta)) *
           (b.s - a.s);
  }
  gen.volume = vol;
  return gen;
}

void write_pattern_csv(const GorePattern& pattern, const std::string& path) {
  auto os = open_out(path);
  os << "v,h\n";
  for (size_t i = 0; i < pattern.v.size(); ++i)
    os << pattern.v[i] << ',' << pattern.h[i] << '\n';
}

std::vector<double> read_vb_csv(const std::string& path, const GeneratorCurve& gen) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::vector<double> ss, vb;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() < 2) throw ConfigError("v_B csv: expected 2 columns (s, v_B)");
    ss.push_back(std::stod(f[0]));
    vb.push_back(std::stod(f[1]));
  }
  if (ss.size() < 2) throw ConfigError("v_B csv: too few samples");
  // resample onto the generator grid
  std::vector<double> out(gen.samples.size());
  for (size_t i = 0; i < gen.samples.size(); ++i) {
    const double s = gen.samples[i].s;
    if (s <= ss.front()) {
      out[i] = vb.front();
    } else if (s >= ss.back()) {
      out[i] = vb.back();
    } else {
      const auto it = std::upper_bound(ss.begin(), ss.end(), s);
      const size_t k = size_t(it - ss.begin()) - 1;
      const double t = (s - ss[k]) / (ss[k + 1] - ss[k]);
      out[i] = (1.0 - t) * vb[k] + t * vb[k + 1];
    }
  }
  return out;
}

std::string shape_summary_json(const GeneratorCurve& gen, const GorePattern& pattern) {
  nlohmann::json j;
  j["L_d"] = gen.length;
  j["L_c"] = pattern.L_c;
  j["L_t"] = pattern.L_t;
  j["L_s"] = pattern.L_s;
  j["theta0"] = gen.launch_angle;
  j["volume"] = gen.volume;
  j["r_max"] = gen.r_max;
  j["mode"] = pattern.mode == GoreMode::Pumpkin ? "pumpkin" : "zpns";
  if (pattern.mode == GoreMode::Pumpkin) j["r_B"] = pattern.r_B;
  j["n_gores"] = pattern.n_gores;
  return j.dump(2);
}

void write_mesh_obj(const RefMesh& mesh, const DeformationState& state,
                    const std::string& path) {
  auto os = open_out(path);
  for (const Vec3& p : state.positions)
    os << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const Facet& f : mesh.facets)
    os << "f " << f.nodes[0] + 1 << ' ' << f.nodes[1] + 1 << ' ' << f.nodes[2] + 1
       << '\n';
}

void write_mesh_csv(const RefMesh& mesh, const std::string& nodes_path,
                    const std::string& facets_path) {
  {
    auto os = open_out(nodes_path);
    os << "node,u,v,dof_kind\n";
    for (size_t i = 0; i < mesh.nodes_uv.size(); ++i) {
      const char* kind = "free";
      switch (mesh.dofs[i].kind) {
        case DofKind::Free: kind = "free"; break;
        case DofKind::Fixed: kind = "fixed"; break;
        case DofKind::Plane: kind = "plane"; break;
        case DofKind::Axis: kind = "axis"; break;
      }
      os << i << ',' << mesh.nodes_uv[i].x() << ',' << mesh.nodes_uv[i].y() << ','
         << kind << '\n';
    }
  }
  {
    auto os = open_out(facets_path);
    os << "facet,n0,n1,n2,strip,ref_area\n";
    for (size_t i = 0; i < mesh.facets.size(); ++i) {
      const Facet& f = mesh.facets[i];
      os << i << ',' << f.nodes[0] << ',' << f.nodes[1] << ',' << f.nodes[2] << ','
         << f.strip << ',' << f.ref_area << '\n';
    }
  }
}

void write_iteration_log(const std::vector<IterationRecord>& log,
                         const std::string& path) {
  auto os = open_out(path);
  os << "outer,inner,energy,grad_norm,max_violation\n";
  for (const auto& r : log)
    os << r.outer << ',' << r.inner_iterations << ',' << r.energy << ',' << r.grad_norm
       << ',' << r.max_violation << '\n';
}

std::string solve_result_json(const SolveResult& result) {
  nlohmann::json j;
  j["converged"] = result.converged;
  j["total_energy"] = result.total_energy;
  j["film_energy"] = result.film_energy;
  j["pressure_potential"] = result.pressure_potential;
  j["volume"] = result.volume;
  j["kkt_residual"] = result.kkt_residual;
  j["max_constraint_violation"] = result.max_constraint_violation;
  j["multipliers"] = {{"volume", result.multipliers.volume},
                      {"tendons", result.multipliers.tendons},
                      {"tendon_tension", result.multipliers.tendon_tension}};
  j["tendon_strains"] = result.tendon_strains;
  j["self_intersections"] = result.self_intersections;
  j["inner_iterations_total"] = result.inner_iterations_total;
  j["outer_iterations"] = result.log.size();
  return j.dump(2);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace aerostat
