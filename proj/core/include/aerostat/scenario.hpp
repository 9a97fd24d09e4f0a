#pragma once

#include <optional>
#include <string>

#include "aerostat/io.hpp"
#include "aerostat/postprocess.hpp"
#include "aerostat/shape_finding.hpp"
#include "aerostat/solver.hpp"

namespace aerostat {

/// One full run description: shape finding + mesh + loads + constraints +
/// solver settings. Mirrors the Table-1/Table-2 vocabulary in its JSON form.
struct RunConfig {
  GoreMode mode = GoreMode::Zpns;
  DesignInput design;
  MaterialProps material;
  LoadSpec loads;

  // mesh
  int strips = 3;
  int tris_per_strip = 100;
  SymmetryMode symmetry = SymmetryMode::HalfGore;
  int lobes = 0;

  // tendon handling
  bool tendons_enabled = true;
  TendonSense tendon_sense = TendonSense::LessEqual;
  TendonForm tendon_form = TendonForm::Strain;
  double tendon_stiffness = 1.0;
  double tendon_shorten = 0.0;   // fractional shortening, e.g. 0.02
  double thickness_scale = 1.0;  // film thickness multiplier for the run

  // shape finding
  std::optional<double> shapefind_volume_target;
  double shooting_tol = 1e-9;
  std::optional<std::string> generator_csv;  // externally supplied generator
  std::optional<std::string> vb_csv;         // externally supplied v_B table

  bool closed_system = false;  // volume constraint from loads.target_volume
  SolveConfig solver;
  std::string output_dir = "out";

  void validate() const;
  std::string canonical_json() const;  // stable serialization for the manifest
  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json(const std::string& text);
};

/// Canonical Table-1/Table-2 configurations.
RunConfig table1_zpns_config();
RunConfig table1_pumpkin_config();

struct ShapefindOutput {
  GeneratorCurve generator;
  GoreSurface3D gore;
  GorePattern pattern;
};

/// Shape finding only (generator + gore surface + lay-flat pattern).
ShapefindOutput run_shapefind(const RunConfig& cfg);

struct PipelineResult {
  ShapefindOutput shape;
  RefMesh mesh;
  DeformationState initial;
  SolveResult solution;
  ProfileReport report;
};

/// Full pipeline: shapefind -> mesh -> lift -> minimize -> report.
PipelineResult run_pipeline(const RunConfig& cfg);

/// Write all run artifacts (generator.csv, pattern.csv, mesh.txt,
/// iterations.log, result.json, profiles.csv, shape.json, manifest.json)
/// under cfg.output_dir.
void write_run_artifacts(const RunConfig& cfg, const PipelineResult& result);
void write_shapefind_artifacts(const RunConfig& cfg, const ShapefindOutput& shape);

}  // namespace aerostat
