#pragma once

#include <string>

#include "aerostat/gore_mesh.hpp"
#include "aerostat/shape_finding.hpp"
#include "aerostat/solver.hpp"

namespace aerostat {

/// generator.csv with columns s,R,Z,theta,sigma_m,kappa.
void write_generator_csv(const GeneratorCurve& gen, const std::string& path);
GeneratorCurve read_generator_csv(const std::string& path);

/// pattern.csv with columns v,h.
void write_pattern_csv(const GorePattern& pattern, const std::string& path);

/// Tabulated bulge angle (columns s,v_B), for externally designed pumpkins.
std::vector<double> read_vb_csv(const std::string& path, const GeneratorCurve& gen);

/// Shape summary (L_d, L_c, L_t, L_s, theta0, volume, mode).
std::string shape_summary_json(const GeneratorCurve& gen, const GorePattern& pattern);

/// Simple text polygon format: "v x y z" vertex lines, "f i j k" face lines
/// (1-based), viewable as Wavefront OBJ.
void write_mesh_obj(const RefMesh& mesh, const DeformationState& state,
                    const std::string& path);

/// Node and facet CSV dumps of the reference mesh.
void write_mesh_csv(const RefMesh& mesh, const std::string& nodes_path,
                    const std::string& facets_path);

/// Line-delimited iteration records: outer,inner,E,grad_norm,max_violation.
void write_iteration_log(const std::vector<IterationRecord>& log,
                         const std::string& path);

/// Full SolveResult serialization.
std::string solve_result_json(const SolveResult& result);

/// FNV-1a hash of a string (manifest config hash).
std::uint64_t fnv1a(const std::string& s);

}  // namespace aerostat
