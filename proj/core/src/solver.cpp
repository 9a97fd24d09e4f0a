#include "aerostat/solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>

namespace aerostat {

EnergyBreakdown total_energy(const DeformationState& state, const RefMesh& mesh,
                             const MaterialProps& mat, const LoadSpec& loads) {
  const double mult = mesh.multiplicity;
  EnergyBreakdown out;
  out.nodal_gradient.assign(state.positions.size(), Vec3::Zero());

  std::vector<double> film(mesh.facets.size());
  std::vector<double> pres(mesh.facets.size());
  for (size_t fi = 0; fi < mesh.facets.size(); ++fi) {
    const Facet& f = mesh.facets[fi];
    const Vec3& x0 = state.positions[size_t(f.nodes[0])];
    const Vec3& x1 = state.positions[size_t(f.nodes[1])];
    const Vec3& x2 = state.positions[size_t(f.nodes[2])];

    const Mat32 F = deformation_gradient(f, state);
    const PrincipalStrains ps = principal_strains(F);
    const RelaxedResponse rel = relaxed_energy(ps.d1, ps.d2, mat);
    film[fi] = f.ref_area * rel.W;
    pres[fi] = facet_pressure_potential(x0, x1, x2, loads.buoyancy,
                                        loads.constant_pressure);
    if (!std::isfinite(film[fi]) || !std::isfinite(pres[fi])) {
      std::ostringstream os;
      os << "total_energy: non-finite contribution at facet " << fi;
      throw NumericalError(os.str());
    }

    // film gradient: dW/dD = (F S*) Binv^T, columns map to x1, x2
    const Mat2 S = rel.mu1 * ps.n1 * ps.n1.transpose() + rel.mu2 * ps.n2 * ps.n2.transpose();
    const Mat32 dWdD = (F * S) * f.ref_edge_inv.transpose();
    const double w = mult * f.ref_area;
    out.nodal_gradient[size_t(f.nodes[1])] += w * dWdD.col(0);
    out.nodal_gradient[size_t(f.nodes[2])] += w * dWdD.col(1);
    out.nodal_gradient[size_t(f.nodes[0])] -= w * (dWdD.col(0) + dWdD.col(1));

    accumulate_pressure_gradient(x0, x1, x2, loads.buoyancy, loads.constant_pressure,
                                 mult, &out.nodal_gradient[size_t(f.nodes[0])],
                                 &out.nodal_gradient[size_t(f.nodes[1])],
                                 &out.nodal_gradient[size_t(f.nodes[2])]);
  }
  out.film = mult * pairwise_sum(film);
  out.pressure = mult * pairwise_sum(pres);
  out.total = out.film + out.pressure;
  return out;
}

double enclosed_volume(const DeformationState& state, const RefMesh& mesh) {
  std::vector<double> v(mesh.facets.size());
  for (size_t fi = 0; fi < mesh.facets.size(); ++fi) {
    const Facet& f = mesh.facets[fi];
    v[fi] = facet_volume_contribution(state.positions[size_t(f.nodes[0])],
                                      state.positions[size_t(f.nodes[1])],
                                      state.positions[size_t(f.nodes[2])]);
  }
  return mesh.multiplicity * pairwise_sum(v);
}

namespace {

// ---------------------------------------------------------------------------
// L-BFGS with a strong-Wolfe line search.
// ---------------------------------------------------------------------------

struct LbfgsOptions {
  int memory = 20;
  int max_iterations = 20000;
  double grad_tol = 1e-6;
};

struct LbfgsOutcome {
  int iterations = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
};

using Objective = std::function<double(const VecX&, VecX*)>;

// cubic-interpolation strong Wolfe search (Nocedal-Wright style)
bool wolfe_search(const Objective& fn, const VecX& x, double f0, const VecX& g0,
                  const VecX& d, double* alpha_out, VecX* x_new, double* f_new,
                  VecX* g_new) {
  const double c1 = 1e-4, c2 = 0.9;
  const double dg0 = g0.dot(d);
  if (!(dg0 < 0.0)) return false;
  double alpha = 1.0, alpha_prev = 0.0;
  double f_prev = f0;
  const int max_evals = 60;
  double lo = 0.0, hi = 0.0, f_lo = f0;
  bool bracketed = false;

  VecX xt, gt;
  double ft = 0.0;
  auto eval = [&](double a) {
    xt = x + a * d;
    ft = fn(xt, &gt);
  };

  int evals = 0;
  for (; evals < max_evals; ++evals) {
    eval(alpha);
    if (!std::isfinite(ft)) {
      alpha = 0.5 * (alpha_prev + alpha);
      continue;
    }
    if (ft > f0 + c1 * alpha * dg0 || (evals > 0 && ft >= f_prev)) {
      lo = alpha_prev;
      f_lo = f_prev;
      hi = alpha;
      bracketed = true;
      break;
    }
    const double dg = gt.dot(d);
    if (std::abs(dg) <= -c2 * dg0) {
      *alpha_out = alpha;
      *x_new = xt;
      *f_new = ft;
      *g_new = gt;
      return true;
    }
    if (dg >= 0.0) {
      lo = alpha;
      f_lo = ft;
      hi = alpha_prev;
      bracketed = true;
      break;
    }
    alpha_prev = alpha;
    f_prev = ft;
    alpha *= 2.0;
  }
  if (!bracketed) return false;

  for (; evals < max_evals; ++evals) {
    const double a = 0.5 * (lo + hi);
    eval(a);
    if (!std::isfinite(ft) || ft > f0 + c1 * a * dg0 || ft >= f_lo) {
      hi = a;
      continue;
    }
    const double dg = gt.dot(d);
    if (std::abs(dg) <= -c2 * dg0) {
      *alpha_out = a;
      *x_new = xt;
      *f_new = ft;
      *g_new = gt;
      return true;
    }
    if (dg * (hi - lo) >= 0.0) hi = lo;
    lo = a;
    f_lo = ft;
  }
  // fall back to the best sufficient-decrease point found
  if (std::isfinite(ft) && ft < f0) {
    *alpha_out = 0.5 * (lo + hi);
    *x_new = xt;
    *f_new = ft;
    *g_new = gt;
    return true;
  }
  return false;
}

LbfgsOutcome lbfgs_minimize(const Objective& fn, VecX* x, const LbfgsOptions& opt) {
  const int n = int(x->size());
  VecX g(n), x_new(n), g_new(n);
  double f = fn(*x, &g);
  std::deque<VecX> S, Y;
  std::deque<double> rho;

  LbfgsOutcome out;
  out.f = f;
  out.grad_norm = g.norm();
  if (out.grad_norm <= opt.grad_tol) {
    out.converged = true;
    return out;
  }

  for (int it = 0; it < opt.max_iterations; ++it) {
    // two-loop recursion
    VecX q = g;
    std::vector<double> alpha(S.size());
    for (int i = int(S.size()) - 1; i >= 0; --i) {
      alpha[size_t(i)] = rho[size_t(i)] * S[size_t(i)].dot(q);
      q -= alpha[size_t(i)] * Y[size_t(i)];
    }
    double gamma = 1.0;
    if (!S.empty()) {
      const double yy = Y.back().squaredNorm();
      if (yy > 0.0) gamma = S.back().dot(Y.back()) / yy;
    }
    q *= gamma;
    for (size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * Y[i].dot(q);
      q += (alpha[i] - beta) * S[i];
    }
    VecX d = -q;
    if (!(g.dot(d) < 0.0)) {
      d = -g;  // reset on a non-descent direction
      S.clear();
      Y.clear();
      rho.clear();
    }

    double step = 0.0, f_new = 0.0;
    if (!wolfe_search(fn, *x, f, g, d, &step, &x_new, &f_new, &g_new)) {
      // steepest-descent retry before giving up
      if (d != -g) {
        d = -g;
        S.clear();
        Y.clear();
        rho.clear();
        if (!wolfe_search(fn, *x, f, g, d, &step, &x_new, &f_new, &g_new)) break;
      } else {
        break;
      }
    }

    const VecX s = x_new - *x;
    const VecX y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (int(S.size()) > opt.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    *x = x_new;
    f = f_new;
    g = g_new;
    out.iterations = it + 1;
    out.grad_norm = g.norm();
    if (out.grad_norm <= opt.grad_tol) {
      out.converged = true;
      break;
    }
  }
  out.f = f;
  return out;
}

// ---------------------------------------------------------------------------
// Projected (Gauss-Newton) inner solver for linear-constraints-only problems.
// The DOF map already eliminates all linear constraints, so this is a damped
// Newton method on the reduced coordinates with a GN material tangent plus the
// exact geometric and pressure second derivatives.
// ---------------------------------------------------------------------------

struct NewtonContext {
  const RefMesh* mesh;
  const DofMap* dofs;
  MaterialProps mat;
  LoadSpec loads;
  double mult;
};

// material tangent in facet D-coordinates (6x6 over [d1|d2] columns)
void facet_hessian(const NewtonContext& ctx, const Facet& f,
                   const DeformationState& state, Eigen::Matrix<double, 9, 9>* Hn) {
  const Mat2 Binv = f.ref_edge_inv;
  const Mat32 F = deformation_gradient(f, state);
  const PrincipalStrains ps = principal_strains(F);
  const RelaxedResponse rel = relaxed_energy(ps.d1, ps.d2, ctx.mat);
  const Mat2 S = rel.mu1 * ps.n1 * ps.n1.transpose() + rel.mu2 * ps.n2 * ps.n2.transpose();
  const double tau = ctx.mat.tau();
  const double nu = ctx.mat.poisson;
  const double tE = ctx.mat.te();

  Eigen::Matrix<double, 6, 6> HD = Eigen::Matrix<double, 6, 6>::Zero();
  const double A = f.ref_area;
  // columns of D indexed (i, a): flat index 3*a + i
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 3; ++i) {
      Mat32 dD = Mat32::Zero();
      dD(i, a) = 1.0;
      const Mat32 dF = dD * Binv;
      const Mat2 dG =
          0.5 * (dF.transpose() * F + F.transpose() * dF);
      Mat2 dS;
      if (rel.region == Region::Tense) {
        dS = tau * ((1.0 - nu) * dG + nu * dG.trace() * Mat2::Identity());
      } else if (rel.region == Region::Wrinkled) {
        const double dd = (rel.mu1 > 0.0)
                              ? ps.n1.dot(dG * ps.n1)
                              : ps.n2.dot(dG * ps.n2);
        const Vec2 n = (rel.mu1 > 0.0) ? ps.n1 : ps.n2;
        dS = tE * dd * n * n.transpose();
      } else {
        dS.setZero();
      }
      const Mat32 dGrad = (dF * S + F * dS) * Binv.transpose();
      for (int b = 0; b < 2; ++b)
        for (int j = 0; j < 3; ++j) HD(3 * b + j, 3 * a + i) = A * dGrad(j, b);
    }
  HD = 0.5 * (HD + HD.transpose()).eval();

  // expand D = [x1-x0 | x2-x0] to nodal (x0,x1,x2) 9x9
  Hn->setZero();
  auto node_of = [](int col) { return col + 1; };  // D col 0 -> x1, col 1 -> x2
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 3; ++i)
      for (int b = 0; b < 2; ++b)
        for (int j = 0; j < 3; ++j) {
          const double h = HD(3 * b + j, 3 * a + i);
          const int na = node_of(a), nb = node_of(b);
          (*Hn)(3 * nb + j, 3 * na + i) += h;
          (*Hn)(3 * 0 + j, 3 * na + i) -= h;
          (*Hn)(3 * nb + j, 3 * 0 + i) -= h;
          (*Hn)(3 * 0 + j, 3 * 0 + i) += h;
        }

  // pressure Hessian: E_P = -(k.a) Phi(z), a = (u x v)/2, u = x1-x0, v = x2-x0
  const Vec3& x0 = state.positions[size_t(f.nodes[0])];
  const Vec3& x1 = state.positions[size_t(f.nodes[1])];
  const Vec3& x2 = state.positions[size_t(f.nodes[2])];
  const Vec3 u = x1 - x0, v = x2 - x0;
  const double b_ = ctx.loads.buoyancy, p0 = ctx.loads.constant_pressure;
  auto phi = [&](double z) { return 0.5 * b_ * z * z + p0 * z; };
  auto dphi = [&](double z) { return b_ * z + p0; };
  const double z01 = 0.5 * (x0.z() + x1.z());
  const double z12 = 0.5 * (x1.z() + x2.z());
  const double z20 = 0.5 * (x2.z() + x0.z());
  const double Phi = (phi(z01) + phi(z12) + phi(z20)) / 3.0;
  const double ak = 0.5 * u.cross(v).z();

  // gradients of (k.a) wrt nodes
  Vec3 da[3];
  da[1] = 0.5 * v.cross(Vec3::UnitZ());
  da[2] = 0.5 * Vec3::UnitZ().cross(u);
  da[0] = -da[1] - da[2];
  // gradients of Phi wrt nodal z
  double dPhi[3] = {(dphi(z01) + dphi(z20)) / 6.0, (dphi(z01) + dphi(z12)) / 6.0,
                    (dphi(z12) + dphi(z20)) / 6.0};
  // z-Hessian of Phi
  double HPhi[3][3] = {{b_ / 6, b_ / 12, b_ / 12},
                       {b_ / 12, b_ / 6, b_ / 12},
                       {b_ / 12, b_ / 12, b_ / 6}};
  // cross second derivative of (k.a): d^2(k.(u x v))/du_i dv_j = (e_i x e_j).k
  Eigen::Matrix3d K;
  K << 0, 1, 0, -1, 0, 0, 0, 0, 0;  // K_ij = (e_i x e_j).k

  Eigen::Matrix<double, 9, 9> HP = Eigen::Matrix<double, 9, 9>::Zero();
  // -Phi * d2(k.a): blocks via u,v mapping (u: +x1 -x0; v: +x2 -x0)
  struct Term {
    int node;
    double sign;
  };
  const Term uT[2] = {{1, 1.0}, {0, -1.0}};
  const Term vT[2] = {{2, 1.0}, {0, -1.0}};
  for (const Term& tu : uT)
    for (const Term& tv : vT)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double val = -Phi * 0.5 * K(i, j) * tu.sign * tv.sign;
          HP(3 * tu.node + i, 3 * tv.node + j) += val;
          HP(3 * tv.node + j, 3 * tu.node + i) += val;
        }
  // -(da_i Phi') cross terms and -(k.a) Phi''
  for (int na = 0; na < 3; ++na)
    for (int nb = 0; nb < 3; ++nb) {
      for (int i = 0; i < 3; ++i) {
        HP(3 * na + i, 3 * nb + 2) += -da[na][i] * dPhi[nb];
        HP(3 * nb + 2, 3 * na + i) += -da[na][i] * dPhi[nb];
      }
      HP(3 * na + 2, 3 * nb + 2) += -ak * HPhi[na][nb];
    }
  *Hn += HP;
}

}  // namespace

namespace {

struct Scaling {
  double length = 1.0;
  double energy = 1.0;  // tau * length^2 (fundamental-domain scale)
  double mult = 1.0;
};

Scaling make_scaling(const DeformationState& init, const RefMesh& mesh,
                     const MaterialProps& mat, double override_length) {
  Scaling s;
  double ext = 0.0;
  for (const Vec3& p : init.positions) ext = std::max(ext, p.norm());
  s.length = override_length > 0.0 ? override_length : std::max(1.0, ext);
  s.mult = mesh.multiplicity;
  s.energy = mat.tau() * s.length * s.length;
  return s;
}

}  // namespace

SolveResult minimize(const Problem& problem, const DeformationState& init,
                     const SolveConfig& cfg) {
  cfg.validate();
  problem.loads.validate();
  problem.material.validate();
  const RefMesh& mesh = *problem.mesh;
  problem.constraints.validate(mesh);
  if (cfg.inner == SolveConfig::Inner::ProjectedNewton && !problem.constraints.empty())
    throw ConfigError(
        "solver: projected-Newton path handles linear constraints only; use the "
        "quasi-Newton inner solver for tendon/volume constraints");

  const DofMap dofs = DofMap::build(mesh, init);
  const Scaling sc = make_scaling(init, mesh, problem.material, cfg.length_scale);

  DeformationState work = init;
  const auto& tendons = problem.constraints.tendons;
  const int n_tendon = int(tendons.size());
  const bool has_volume = problem.constraints.volume_target.has_value();
  const int n_rows = n_tendon + (has_volume ? 1 : 0);

  // nondimensional constraint values + reduced jacobians
  auto eval_constraints = [&](const DeformationState& st, VecX* c,
                              std::vector<VecX>* jac) {
    const auto rows = assemble_constraints(st, mesh, problem.constraints);
    c->resize(n_rows);
    if (jac) jac->assign(size_t(n_rows), VecX());
    for (int r = 0; r < n_rows; ++r) {
      const auto& row = rows[size_t(r)];
      double scale = 1.0;
      if (row.tendon_index < 0)
        scale = 1.0 / (sc.mult * sc.length * sc.length * sc.length);
      else if (tendons[size_t(row.tendon_index)].form == TendonForm::Energy)
        scale = 1.0 / sc.energy;
      (*c)[r] = row.value * scale;
      if (jac) {
        std::vector<Vec3> nodal(st.positions.size(), Vec3::Zero());
        for (const auto& [nid, g] : row.jacobian) nodal[size_t(nid)] = g * scale;
        (*jac)[size_t(r)] = dofs.reduce(nodal) * sc.length;  // d c / d q_hat
      }
    }
  };

  // nondimensional energy objective
  auto eval_energy = [&](const VecX& qhat, VecX* grad, EnergyBreakdown* br) {
    DeformationState st;
    dofs.unpack(qhat * sc.length, &st);
    const EnergyBreakdown b = total_energy(st, mesh, problem.material, problem.loads);
    if (grad) *grad = dofs.reduce(b.nodal_gradient) * (sc.length / (sc.energy * sc.mult));
    if (br) *br = b;
    return b.total / (sc.energy * sc.mult);
  };

  VecX lambda = VecX::Zero(n_rows);
  std::vector<bool> is_eq(size_t(n_rows), false);
  for (int t = 0; t < n_tendon; ++t)
    is_eq[size_t(t)] = tendons[size_t(t)].sense == TendonSense::Equal;
  if (has_volume) is_eq[size_t(n_rows - 1)] = true;

  double mu = cfg.penalty_initial;
  VecX qhat = dofs.pack(work) / sc.length;

  SolveResult result;
  int total_inner = 0;
  double prev_viol = std::numeric_limits<double>::infinity();
  bool converged = false;

  const int n_outer = problem.constraints.empty() ? 1 : cfg.outer_iterations;
  for (int outer = 0; outer < n_outer; ++outer) {
    // augmented Lagrangian objective at current (lambda, mu)
    Objective fn = [&](const VecX& q, VecX* g) {
      VecX ge;
      const double E = eval_energy(q, g ? &ge : nullptr, nullptr);
      double L = E;
      if (g) *g = ge;
      if (n_rows > 0) {
        DeformationState st;
        dofs.unpack(q * sc.length, &st);
        VecX c;
        std::vector<VecX> J;
        eval_constraints(st, &c, g ? &J : nullptr);
        for (int r = 0; r < n_rows; ++r) {
          if (is_eq[size_t(r)]) {
            L += lambda[r] * c[r] + 0.5 * mu * c[r] * c[r];
            if (g) *g += (lambda[r] + mu * c[r]) * J[size_t(r)];
          } else {
            const double t = lambda[r] + mu * c[r];
            if (t > 0.0) {
              L += (lambda[r] * c[r] + 0.5 * mu * c[r] * c[r]);
              if (g) *g += t * J[size_t(r)];
            } else {
              L += -0.5 * lambda[r] * lambda[r] / mu;
            }
          }
        }
      }
      return L;
    };

    int inner_iters = 0;
    if (cfg.inner == SolveConfig::Inner::QuasiNewton || n_rows > 0) {
      LbfgsOptions opt;
      opt.memory = cfg.lbfgs_memory;
      opt.max_iterations = cfg.max_inner_iterations;
      opt.grad_tol = cfg.grad_tol;
      const LbfgsOutcome oc = lbfgs_minimize(fn, &qhat, opt);
      inner_iters = oc.iterations;
    } else {
      // Projected (Gauss-)Newton with Levenberg damping. The admissibility
      // basis B (nodal <- reduced) is constant; build it once.
      NewtonContext ctx{&mesh, &dofs, problem.material, problem.loads, sc.mult};
      const int n_nodes = int(work.positions.size());
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3 * n_nodes, dofs.size());
      for (int k = 0; k < dofs.size(); ++k) {
        VecX e = VecX::Zero(dofs.size());
        e[k] = 1.0;
        const auto cols = dofs.spread(e);
        for (int nid = 0; nid < n_nodes; ++nid)
          B.block<3, 1>(3 * nid, k) = cols[size_t(nid)];
      }

      VecX g;
      double f = fn(qhat, &g);
      double shift = 0.0;
      const double hscale = sc.length * sc.length / (sc.energy * sc.mult);
      for (; inner_iters < cfg.max_inner_iterations; ++inner_iters) {
        if (g.norm() <= cfg.grad_tol) break;
        DeformationState st;
        dofs.unpack(qhat * sc.length, &st);
        std::vector<Eigen::Triplet<double>> trips;
        Eigen::Matrix<double, 9, 9> Hn;
        for (const Facet& fct : mesh.facets) {
          facet_hessian(ctx, fct, st, &Hn);
          for (int an = 0; an < 3; ++an)
            for (int bn = 0; bn < 3; ++bn)
              for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                  const double v = Hn(3 * an + i, 3 * bn + j);
                  if (v != 0.0)
                    trips.emplace_back(3 * fct.nodes[size_t(an)] + i,
                                       3 * fct.nodes[size_t(bn)] + j,
                                       v * sc.mult * hscale);
                }
        }
        Eigen::SparseMatrix<double> Hnod(3 * n_nodes, 3 * n_nodes);
        Hnod.setFromTriplets(trips.begin(), trips.end());
        const Eigen::MatrixXd Hr = B.transpose() * (Hnod * B);

        VecX step;
        bool have_step = false;
        for (int tries = 0; tries < 16; ++tries) {
          Eigen::MatrixXd Hs = Hr;
          Hs.diagonal().array() += shift;
          Eigen::LDLT<Eigen::MatrixXd> ldlt(Hs);
          step = ldlt.solve(-g);
          if (ldlt.info() == Eigen::Success && g.dot(step) < 0.0) {
            have_step = true;
            break;
          }
          shift = std::max(1e-8, shift * 10.0);
        }
        if (!have_step) break;
        double alpha = 0.0, f_new = 0.0;
        VecX x_new, g_new;
        if (!wolfe_search(fn, qhat, f, g, step, &alpha, &x_new, &f_new, &g_new)) break;
        qhat = x_new;
        f = f_new;
        g = g_new;
        shift *= 0.25;
        if (shift < 1e-12) shift = 0.0;
      }
    }
    total_inner += inner_iters;

    // evaluate KKT residual and feasibility with updated multipliers
    DeformationState st;
    dofs.unpack(qhat * sc.length, &st);
    VecX c;
    std::vector<VecX> J;
    if (n_rows > 0) eval_constraints(st, &c, &J);
    double viol = 0.0;
    for (int r = 0; r < n_rows; ++r) {
      const double v = is_eq[size_t(r)] ? std::abs(c[r]) : std::max(0.0, c[r]);
      viol = std::max(viol, v);
      if (is_eq[size_t(r)])
        lambda[r] += mu * c[r];
      else
        lambda[r] = std::max(0.0, lambda[r] + mu * c[r]);
    }
    VecX gE;
    EnergyBreakdown br;
    const double Ehat = eval_energy(qhat, &gE, &br);
    (void)Ehat;
    VecX kkt = gE;
    for (int r = 0; r < n_rows; ++r) kkt += lambda[r] * J[size_t(r)];
    const double kkt_norm = kkt.norm();

    result.log.push_back({outer, inner_iters, br.total, kkt_norm, viol});

    if (kkt_norm <= 10.0 * cfg.grad_tol && viol <= cfg.constraint_tol) {
      converged = true;
      break;
    }
    if (viol > 0.25 * prev_viol && outer > 0) mu *= cfg.penalty_growth;
    prev_viol = viol;
  }

  dofs.unpack(qhat * sc.length, &work);
  work.tag = converged ? DeformationState::Tag::Converged
                       : DeformationState::Tag::Iterate;

  const EnergyBreakdown br = total_energy(work, mesh, problem.material, problem.loads);
  result.state = work;
  result.total_energy = br.total;
  result.film_energy = br.film;
  result.pressure_potential = br.pressure;
  result.volume = enclosed_volume(work, mesh);
  result.converged = converged;
  result.inner_iterations_total = total_inner;
  if (!result.log.empty()) {
    result.kkt_residual = result.log.back().grad_norm;
    result.max_constraint_violation = result.log.back().max_violation;
  }

  // physical multipliers
  result.multipliers.tendons.assign(size_t(n_tendon), 0.0);
  result.multipliers.tendon_tension.assign(size_t(n_tendon), 0.0);
  for (int t = 0; t < n_tendon; ++t) {
    // lambda_hat acts on eps against E_fund/energy-scale; per tendon
    double lam = lambda[t] * sc.energy * sc.mult / std::max(1, mesh.n_gores);
    if (tendons[size_t(t)].sense == TendonSense::GreaterEqual) lam = -lam;
    result.multipliers.tendons[size_t(t)] = lam;
    result.multipliers.tendon_tension[size_t(t)] = lam / tendons[size_t(t)].length;
  }
  if (has_volume)
    result.multipliers.volume =
        lambda[n_rows - 1] * problem.material.tau() / sc.length;

  // converged tendon strains
  for (const auto& t : tendons) {
    const double len = tendon_length(work, mesh.seams[size_t(t.seam)]);
    result.tendon_strains.push_back(tendon_strain(len, t.length));
  }

  result.facets.reserve(mesh.facets.size());
  for (const Facet& f : mesh.facets)
    result.facets.push_back(
        facet_response(deformation_gradient(f, work), problem.material));
  result.self_intersections = self_intersection_count(work, mesh);
  return result;
}

double finite_difference_audit(const Problem& problem, const DeformationState& state,
                               double step, int max_dofs) {
  const RefMesh& mesh = *problem.mesh;
  const DofMap dofs = DofMap::build(mesh, state);
  VecX q = dofs.pack(state);
  const EnergyBreakdown br = total_energy(state, mesh, problem.material, problem.loads);
  const VecX g = dofs.reduce(br.nodal_gradient);
  const double gscale = g.norm() / std::sqrt(double(std::max<Eigen::Index>(1, g.size())));

  auto energy_at = [&](const VecX& qq) {
    DeformationState st;
    dofs.unpack(qq, &st);
    return total_energy(st, mesh, problem.material, problem.loads).total;
  };

  const int n = int(q.size());
  const int stride = std::max(1, n / std::max(1, max_dofs));
  double worst = 0.0;
  for (int k = 0; k < n; k += stride) {
    const double h = step * (1.0 + std::abs(q[k]));
    VecX qp = q, qm = q;
    qp[k] += h;
    qm[k] -= h;
    const double fd = (energy_at(qp) - energy_at(qm)) / (2.0 * h);
    const double denom = std::abs(g[k]) + 1e-9 * (gscale + 1.0);
    worst = std::max(worst, std::abs(fd - g[k]) / denom);
  }
  return worst;
}

double finite_difference_audit_constraints(const Problem& problem,
                                           const DeformationState& state, double step,
                                           int max_dofs) {
  const RefMesh& mesh = *problem.mesh;
  const DofMap dofs = DofMap::build(mesh, state);
  VecX q = dofs.pack(state);
  const auto rows = assemble_constraints(state, mesh, problem.constraints);
  if (rows.empty()) return 0.0;

  double worst = 0.0;
  for (size_t r = 0; r < rows.size(); ++r) {
    std::vector<Vec3> nodal(state.positions.size(), Vec3::Zero());
    for (const auto& [nid, gv] : rows[r].jacobian) nodal[size_t(nid)] = gv;
    const VecX g = dofs.reduce(nodal);
    const double gscale =
        g.norm() / std::sqrt(double(std::max<Eigen::Index>(1, g.size())));

    auto value_at = [&](const VecX& qq) {
      DeformationState st;
      dofs.unpack(qq, &st);
      return assemble_constraints(st, mesh, problem.constraints)[r].value;
    };
    const int n = int(q.size());
    const int stride = std::max(1, n / std::max(1, max_dofs));
    for (int k = 0; k < n; k += stride) {
      const double h = step * (1.0 + std::abs(q[k]));
      VecX qp = q, qm = q;
      qp[k] += h;
      qm[k] -= h;
      const double fd = (value_at(qp) - value_at(qm)) / (2.0 * h);
      const double denom = std::abs(g[k]) + 1e-9 * (gscale + 1.0);
      worst = std::max(worst, std::abs(fd - g[k]) / denom);
    }
  }
  return worst;
}

}  // namespace aerostat
