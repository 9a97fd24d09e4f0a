#include "aerostat/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace aerostat {

namespace {

Region region_from_code(const std::string& s) {
  if (s == "S") return Region::Slack;
  if (s == "U") return Region::Wrinkled;
  if (s == "T") return Region::Tense;
  throw ConfigError("unknown region code '" + s + "'");
}

}  // namespace

std::vector<double> ProfileReport::meridional_profile(int strip) const {
  std::vector<PairEntry> sel;
  for (const auto& p : pairs)
    if (p.strip == strip) sel.push_back(p);
  std::sort(sel.begin(), sel.end(),
            [](const PairEntry& a, const PairEntry& b) {
              return a.arc_position < b.arc_position;
            });
  std::vector<double> out;
  out.reserve(sel.size());
  for (const auto& p : sel) out.push_back(p.mu1);
  return out;
}

double wrinkled_fraction_in_strip(const SolveResult& result, const RefMesh& mesh,
                                  int strip) {
  double a_wrink = 0.0, a_tot = 0.0;
  for (size_t fi = 0; fi < mesh.facets.size(); ++fi) {
    if (mesh.facets[fi].strip != strip) continue;
    a_tot += mesh.facets[fi].ref_area;
    if (result.facets[fi].region == Region::Wrinkled)
      a_wrink += mesh.facets[fi].ref_area;
  }
  return a_tot > 0.0 ? a_wrink / a_tot : 0.0;
}

ProfileReport averaged_profiles(const SolveResult& result, const RefMesh& mesh) {
  if (mesh.mode == SymmetryMode::Full || mesh.mode == SymmetryMode::Lobe)
    throw ConfigError("averaged_profiles: profile reporting expects an unstitched "
                      "(half-gore) mesh with the strip/pairing layout");
  if (result.facets.size() != mesh.facets.size())
    throw ConfigError("averaged_profiles: facet response list does not match the mesh");

  ProfileReport rep;
  rep.strips = mesh.strips;
  const int per_strip = mesh.tris_per_strip;
  if (per_strip % 2 != 0)
    throw ConfigError("averaged_profiles: odd facet count in a strip; cannot pair");
  rep.pairs_per_strip = per_strip / 2;

  double a_slack = 0.0, a_wrink = 0.0, a_tense = 0.0, a_tot = 0.0;
  for (size_t fi = 0; fi < mesh.facets.size(); ++fi) {
    const double A = mesh.facets[fi].ref_area;
    a_tot += A;
    switch (result.facets[fi].region) {
      case Region::Slack: a_slack += A; break;
      case Region::Wrinkled: a_wrink += A; break;
      case Region::Tense: a_tense += A; break;
    }
    rep.max_raw_strain = std::max({rep.max_raw_strain, result.facets[fi].d1,
                                   result.facets[fi].d2});
    rep.max_raw_resultant =
        std::max({rep.max_raw_resultant, result.facets[fi].mu1, result.facets[fi].mu2});
  }
  rep.slack_fraction = a_slack / a_tot;
  rep.wrinkled_fraction = a_wrink / a_tot;
  rep.tense_fraction = a_tense / a_tot;

  for (int s = 0; s < mesh.strips; ++s) {
    for (int p = 0; p < rep.pairs_per_strip; ++p) {
      const size_t ia = size_t(s * per_strip + 2 * p);
      const size_t ib = ia + 1;
      const auto& fa = result.facets[ia];
      const auto& fb = result.facets[ib];
      PairEntry e;
      e.strip = s;
      e.pair = p + 1;
      e.arc_position =
          0.5 * (mesh.facets[ia].centroid_uv.y() + mesh.facets[ib].centroid_uv.y());
      e.d1 = 0.5 * (fa.d1 + fb.d1);
      e.d2 = 0.5 * (fa.d2 + fb.d2);
      e.mu1 = 0.5 * (fa.mu1 + fb.mu1);
      e.mu2 = 0.5 * (fa.mu2 + fb.mu2);
      e.region_a = fa.region;
      e.region_b = fb.region;
      const double ca = std::abs(fa.n1.dot(fb.n1));
      e.direction_mismatch = std::acos(std::clamp(ca, 0.0, 1.0));
      rep.pairs.push_back(e);
      rep.max_avg_strain = std::max({rep.max_avg_strain, e.d1, e.d2});
      rep.max_avg_strain_abs =
          std::max({rep.max_avg_strain_abs, std::abs(e.d1), std::abs(e.d2)});
      rep.max_avg_resultant = std::max({rep.max_avg_resultant, e.mu1, e.mu2});
    }
  }

  rep.volume = result.volume;
  rep.film_energy = result.film_energy;
  rep.pressure_potential = result.pressure_potential;
  rep.total_energy = result.total_energy;
  rep.multipliers = result.multipliers;
  rep.tendon_strains = result.tendon_strains;
  return rep;
}

void write_profiles_csv(const ProfileReport& rep, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os.precision(17);
  os << "strip,pair,s_mid,d1_avg,d2_avg,mu1_avg,mu2_avg,region,angle_mismatch\n";
  for (const auto& e : rep.pairs)
    os << e.strip << ',' << e.pair << ',' << e.arc_position << ',' << e.d1 << ','
       << e.d2 << ',' << e.mu1 << ',' << e.mu2 << ',' << region_name(e.region_a)
       << region_name(e.region_b) << ',' << e.direction_mismatch << '\n';
}

ProfileReport read_profiles_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  ProfileReport rep;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    PairEntry e;
    std::getline(ss, tok, ','); e.strip = std::stoi(tok);
    std::getline(ss, tok, ','); e.pair = std::stoi(tok);
    std::getline(ss, tok, ','); e.arc_position = std::stod(tok);
    std::getline(ss, tok, ','); e.d1 = std::stod(tok);
    std::getline(ss, tok, ','); e.d2 = std::stod(tok);
    std::getline(ss, tok, ','); e.mu1 = std::stod(tok);
    std::getline(ss, tok, ','); e.mu2 = std::stod(tok);
    std::getline(ss, tok, ',');
    e.region_a = region_from_code(tok.substr(0, 1));
    e.region_b = region_from_code(tok.substr(1, 1));
    std::getline(ss, tok, ','); e.direction_mismatch = std::stod(tok);
    rep.pairs.push_back(e);
    rep.strips = std::max(rep.strips, e.strip + 1);
    rep.max_avg_strain = std::max({rep.max_avg_strain, e.d1, e.d2});
    rep.max_avg_strain_abs =
        std::max({rep.max_avg_strain_abs, std::abs(e.d1), std::abs(e.d2)});
    rep.max_avg_resultant = std::max({rep.max_avg_resultant, e.mu1, e.mu2});
  }
  if (!rep.pairs.empty()) rep.pairs_per_strip = int(rep.pairs.size()) / rep.strips;
  return rep;
}

std::string report_summary_json(const ProfileReport& rep) {
  nlohmann::json j;
  j["max_avg_strain"] = rep.max_avg_strain;
  j["max_avg_strain_abs"] = rep.max_avg_strain_abs;
  j["max_avg_resultant"] = rep.max_avg_resultant;
  j["max_raw_strain"] = rep.max_raw_strain;
  j["max_raw_resultant"] = rep.max_raw_resultant;
  j["area_fractions"] = {{"slack", rep.slack_fraction},
                         {"wrinkled", rep.wrinkled_fraction},
                         {"tense", rep.tense_fraction}};
  j["volume"] = rep.volume;
  j["energy"] = {{"total", rep.total_energy},
                 {"film", rep.film_energy},
                 {"pressure", rep.pressure_potential}};
  j["multipliers"] = {{"volume", rep.multipliers.volume},
                      {"tendons", rep.multipliers.tendons},
                      {"tendon_tension", rep.multipliers.tendon_tension}};
  j["tendon_strains"] = rep.tendon_strains;
  return j.dump(2);
}

void write_responses_csv(const SolveResult& result, const RefMesh& mesh,
                         const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os.precision(17);
  os << "facet,strip,ref_area,region,d1,d2,mu1,mu2\n";
  for (size_t i = 0; i < result.facets.size(); ++i) {
    const auto& r = result.facets[i];
    os << i << ',' << mesh.facets[i].strip << ',' << mesh.facets[i].ref_area << ','
       << region_name(r.region) << ',' << r.d1 << ',' << r.d2 << ',' << r.mu1 << ','
       << r.mu2 << '\n';
  }
}

void write_profiles_dat(const ProfileReport& rep, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os.precision(17);
  for (int s = 0; s < rep.strips; ++s) {
    os << "# strip " << s << ": s_mid d1 d2 mu1 mu2\n";
    std::vector<PairEntry> sel;
    for (const auto& p : rep.pairs)
      if (p.strip == s) sel.push_back(p);
    std::sort(sel.begin(), sel.end(), [](const PairEntry& a, const PairEntry& b) {
      return a.arc_position < b.arc_position;
    });
    for (const auto& p : sel)
      os << p.arc_position << ' ' << p.d1 << ' ' << p.d2 << ' ' << p.mu1 << ' '
         << p.mu2 << '\n';
    os << "\n\n";
  }
}

}  // namespace aerostat
