#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "aerostat/types.hpp"

namespace aerostat {

/// Dormand-Prince 5(4) adaptive integrator for small fixed-size systems.
/// Smooth, non-stiff right-hand sides only (shape-finding generator ODE).
template <int N>
class Rk45 {
 public:
  using State = Eigen::Matrix<double, N, 1>;
  using Rhs = std::function<State(double, const State&)>;

  struct Node {
    double s;
    State y;
    State f;  // rhs at (s, y), kept for Hermite sampling
  };

  double rtol = 1e-11;
  double atol = 1e-13;
  double max_step = std::numeric_limits<double>::infinity();

  /// Integrate from (s0, y0) to exactly s1. Returns y(s1).
  State integrate_to(const Rhs& rhs, double s0, const State& y0, double s1) const {
    std::vector<Node> unused;
    return run(rhs, s0, y0, s1, nullptr, &unused, false);
  }

  /// Integrate and keep every accepted step (plus both endpoints).
  std::vector<Node> integrate_dense(const Rhs& rhs, double s0, const State& y0,
                                    double s1) const {
    std::vector<Node> nodes;
    run(rhs, s0, y0, s1, nullptr, &nodes, true);
    return nodes;
  }

  /// Integrate until event(s, y) first crosses zero from positive to negative,
  /// or until s_max. Returns the crossing location through `s_event` (quadratic
  /// refinement on the last step); the integration state at the crossing is
  /// returned. If no crossing happens, s_event is set to NaN and y(s_max) is
  /// returned.
  State integrate_until(const Rhs& rhs, double s0, const State& y0, double s_max,
                        const std::function<double(double, const State&)>& event,
                        double* s_event) const {
    *s_event = std::numeric_limits<double>::quiet_NaN();
    double s = s0;
    State y = y0;
    double ev_prev = event(s, y);
    double h = initial_step(rhs, s, y, s_max);
    while (s < s_max) {
      h = std::min(h, s_max - s);
      State y_new;
      double err = attempt(rhs, s, y, h, &y_new);
      if (err <= 1.0) {
        const double s_new = s + h;
        const double ev_new = event(s_new, y_new);
        if (ev_prev > 0.0 && ev_new <= 0.0) {
          // bisect the step for the crossing
          double lo = s, hi = s_new;
          State ylo = y;
          for (int it = 0; it < 80 && (hi - lo) > 1e-14 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            const State ymid = integrate_to(rhs, lo, ylo, mid);
            if (event(mid, ymid) > 0.0) {
              lo = mid;
              ylo = ymid;
            } else {
              hi = mid;
            }
          }
          *s_event = hi;
          return integrate_to(rhs, lo, ylo, hi);
        }
        s = s_new;
        y = y_new;
        ev_prev = ev_new;
      }
      h *= step_factor(err);
      h = std::min(h, max_step);
      if (!(h > 1e-14 * std::max(1.0, std::abs(s))))
        throw NumericalError("ode: step size underflow at s=" + std::to_string(s));
    }
    return y;
  }

 private:
  // Dormand-Prince coefficients
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  double step_factor(double err) const {
    const double f = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    return std::clamp(f, 0.2, 5.0);
  }

  double initial_step(const Rhs& rhs, double s, const State& y, double s1) const {
    const State f = rhs(s, y);
    const double d0 = y.norm(), d1 = f.norm();
    double h = (d1 > 1e-10) ? 0.01 * std::max(d0, 1.0) / d1 : 1e-3 * (s1 - s);
    return std::min({h, (s1 - s), max_step});
  }

  // One trial step; returns scaled error estimate, fills y_new on success.
  double attempt(const Rhs& rhs, double s, const State& y, double h, State* y_new) const {
    const State k1 = rhs(s, y);
    const State k2 = rhs(s + c2 * h, y + h * (k1 / 5.0));
    const State k3 = rhs(s + c3 * h, y + h * (3.0 / 40 * k1 + 9.0 / 40 * k2));
    const State k4 =
        rhs(s + c4 * h, y + h * (44.0 / 45 * k1 - 56.0 / 15 * k2 + 32.0 / 9 * k3));
    const State k5 =
        rhs(s + c5 * h, y + h * (19372.0 / 6561 * k1 - 25360.0 / 2187 * k2 +
                                 64448.0 / 6561 * k3 - 212.0 / 729 * k4));
    const State k6 =
        rhs(s + h, y + h * (9017.0 / 3168 * k1 - 355.0 / 33 * k2 + 46732.0 / 5247 * k3 +
                            49.0 / 176 * k4 - 5103.0 / 18656 * k5));
    const State y5 = y + h * (35.0 / 384 * k1 + 500.0 / 1113 * k3 + 125.0 / 192 * k4 -
                              2187.0 / 6784 * k5 + 11.0 / 84 * k6);
    const State k7 = rhs(s + h, y5);
    const State y4 = y + h * (5179.0 / 57600 * k1 + 7571.0 / 16695 * k3 +
                              393.0 / 640 * k4 - 92097.0 / 339200 * k5 +
                              187.0 / 2100 * k6 + 1.0 / 40 * k7);
    double err = 0.0;
    for (int i = 0; i < N; ++i) {
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      const double e = (y5[i] - y4[i]) / sc;
      err += e * e;
    }
    err = std::sqrt(err / N);
    *y_new = y5;
    return err;
  }

  State run(const Rhs& rhs, double s0, const State& y0, double s1,
            const void* /*unused*/, std::vector<Node>* nodes, bool keep) const {
    double s = s0;
    State y = y0;
    if (keep) nodes->push_back({s, y, rhs(s, y)});
    double h = initial_step(rhs, s, y, s1);
    while (s < s1) {
      h = std::min(h, s1 - s);
      State y_new;
      const double err = attempt(rhs, s, y, h, &y_new);
      if (err <= 1.0) {
        s += h;
        y = y_new;
        if (keep) nodes->push_back({s, y, rhs(s, y)});
      }
      h = std::min(h * step_factor(err), max_step);
      if (!(h > 1e-15 * std::max(1.0, std::abs(s))))
        throw NumericalError("ode: step size underflow at s=" + std::to_string(s));
    }
    return y;
  }
};

/// Cubic Hermite sample of a dense solution at s (nodes must be sorted).
template <int N>
Eigen::Matrix<double, N, 1> hermite_sample(
    const std::vector<typename Rk45<N>::Node>& nodes, double s) {
  if (nodes.empty()) throw NumericalError("hermite_sample: empty solution");
  if (s <= nodes.front().s) return nodes.front().y;
  if (s >= nodes.back().s) return nodes.back().y;
  size_t lo = 0, hi = nodes.size() - 1;
  while (hi - lo > 1) {
    const size_t mid = (lo + hi) / 2;
    if (nodes[mid].s <= s)
      lo = mid;
    else
      hi = mid;
  }
  const auto& a = nodes[lo];
  const auto& b = nodes[hi];
  const double h = b.s - a.s;
  const double t = (s - a.s) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * a.y + (t3 - 2 * t2 + t) * h * a.f +
         (-2 * t3 + 3 * t2) * b.y + (t3 - t2) * h * b.f;
}

}  // namespace aerostat
