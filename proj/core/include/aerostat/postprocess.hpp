#pragma once

#include <string>
#include <vector>

#include "aerostat/solver.hpp"

namespace aerostat {

/// One averaged pair of adjacent facets in a strip.
struct PairEntry {
  int strip = 0;
  int pair = 0;          // 1-based, counted from the top of the gore
  double arc_position = 0.0;  // reference-centroid v midpoint
  double d1 = 0.0, d2 = 0.0;  // averaged principal strains
  double mu1 = 0.0, mu2 = 0.0;  // averaged relaxed resultants [N/m]
  Region region_a = Region::Tense, region_b = Region::Tense;
  double direction_mismatch = 0.0;  // angle between the pair's n1 axes [rad]
};

struct ProfileReport {
  std::vector<PairEntry> pairs;
  int strips = 0;
  int pairs_per_strip = 0;

  // Maximum averaged principal strain in tension: max over pairs of the
  // signed principal strains. Wrinkled facets can show large geometric
  // contraction (the gathered material), tracked separately as _abs.
  double max_avg_strain = 0.0;
  double max_avg_strain_abs = 0.0;
  double max_avg_resultant = 0.0;  // max averaged principal resultant [N/m]
  double max_raw_strain = 0.0;     // max raw tensile strain over facets
  double max_raw_resultant = 0.0;
  double slack_fraction = 0.0;   // reference-area fractions, sum to 1
  double wrinkled_fraction = 0.0;
  double tense_fraction = 0.0;
  double volume = 0.0;
  double film_energy = 0.0;
  double pressure_potential = 0.0;
  double total_energy = 0.0;
  Multipliers multipliers;
  std::vector<double> tendon_strains;

  /// Averaged meridional (mu1) profile of one strip, ordered bottom-to-top.
  std::vector<double> meridional_profile(int strip) const;
};

/// Reference-area fraction of wrinkled facets within one strip.
double wrinkled_fraction_in_strip(const SolveResult& result, const RefMesh& mesh,
                                  int strip);

/// Pairwise averaging per §-style reporting convention: facets are paired
/// (2i-1, 2i) from the top of each strip; the pair's quantities are arithmetic
/// means of the two facets' principal values.
ProfileReport averaged_profiles(const SolveResult& result, const RefMesh& mesh);

/// profiles.csv: strip,pair,s_mid,d1_avg,d2_avg,mu1_avg,mu2_avg,region,angle_mismatch
void write_profiles_csv(const ProfileReport& report, const std::string& path);
ProfileReport read_profiles_csv(const std::string& path);  // round-trip aid

/// JSON summary (maxima, fractions, energies, multipliers).
std::string report_summary_json(const ProfileReport& report);

/// gnuplot-ready profile blocks (one block per strip).
void write_profiles_dat(const ProfileReport& report, const std::string& path);

/// Per-facet response dump: facet,strip,ref_area,region,d1,d2,mu1,mu2.
void write_responses_csv(const SolveResult& result, const RefMesh& mesh,
                         const std::string& path);

}  // namespace aerostat
