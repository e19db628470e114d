#pragma once

#include "ahg/models.hpp"

namespace ahg {

// ---------------------------------------------------------------------------
// Coordinate Christoffel symbols from finite differences of the metric.
// ---------------------------------------------------------------------------

inline std::vector<MatX> coordinate_christoffels(const ManifoldSpec& M, int chart,
                                                 const VecX& x) {
  const int d = M.real_dim();
  MatX g = M.metric(chart, x);
  MatX ginv = g.inverse();
  std::vector<MatX> dg(d);
  const double h = FdConfig::step(M.fd.h_frame, x);
  for (int mu = 0; mu < d; ++mu) {
    dg[mu] = d1_axis([&](const VecX& y) { return M.metric(chart, y); }, x, mu, h,
                     M.fd.richardson);
  }
  std::vector<MatX> gam(d, MatX::Zero(d, d));
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu)
      for (int sg = 0; sg < d; ++sg) {
        double v = 0;
        for (int tau = 0; tau < d; ++tau)
          v += ginv(mu, tau) * (dg[nu](tau, sg) + dg[sg](tau, nu) - dg[tau](nu, sg));
        gam[mu](nu, sg) = 0.5 * v;
      }
  return gam;
}

// ---------------------------------------------------------------------------
// Geodesic integration (Levi-Civita, RK4 on the second-order system) with
// chart transitions where the model atlas provides them.
// ---------------------------------------------------------------------------

struct GeodesicPath {
  PointRef origin;
  VecX direction;  // g-unit initial velocity
  double step = 0.01;
  std::vector<double> rho;
  std::vector<PointRef> points;
  std::vector<VecX> velocity;  // coordinate velocity at each sample
  bool analytic = false;

  size_t size() const { return rho.size(); }
};

namespace detail {

// Jacobian of the chart transition map at p (finite differences).
inline MatX transition_jacobian(const ManifoldSpec& M, const PointRef& p, int target) {
  const int d = M.real_dim();
  MatX Jm(d, d);
  const double h = FdConfig::step(M.fd.h_frame, p.x);
  for (int mu = 0; mu < d; ++mu) {
    VecX col = d1_axis(
        [&](const VecX& y) { return M.transition(PointRef{p.chart, y}, target).x; }, p.x, mu,
        h, true);
    Jm.col(mu) = col;
  }
  return Jm;
}

// Switch chart when the point drifts into the outer margin of its box.
inline bool maybe_transition(const ManifoldSpec& M, PointRef& p, VecX& v) {
  if (!M.transition || M.charts.size() < 2) return false;
  const Chart& ch = M.chart(p.chart);
  double safe = 0.25;  // stay well inside
  if (ch.contains(p.x, safe)) return false;
  for (const Chart& other : M.charts) {
    if (other.id == p.chart) continue;
    PointRef q = M.transition(p, other.id);
    if (M.chart(other.id).contains(q.x, 2.0 * safe)) {
      MatX Jt = transition_jacobian(M, p, other.id);
      v = Jt * v;
      p = q;
      return true;
    }
  }
  return false;
}

}  // namespace detail

inline GeodesicPath integrate_geodesic(const ManifoldSpec& M, const PointRef& o, const VecX& v,
                                       double rho_max, double step = 0.01) {
  MatX g0 = M.g_at(o);
  double nv = std::sqrt(v.dot(g0 * v));
  if (nv <= 0) throw DomainError(M.name + ": zero geodesic direction");
  GeodesicPath path;
  path.origin = o;
  path.direction = v / nv;
  path.step = step;

  const int d = M.real_dim();
  PointRef p = o;
  VecX vel = path.direction;

  auto accel = [&](int chart, const VecX& x, const VecX& u) {
    std::vector<MatX> gam = coordinate_christoffels(M, chart, x);
    VecX a(d);
    for (int mu = 0; mu < d; ++mu) a[mu] = -u.dot(gam[mu] * u);
    return a;
  };

  path.rho.push_back(0.0);
  path.points.push_back(p);
  path.velocity.push_back(vel);
  int steps = static_cast<int>(std::ceil(rho_max / step));
  double h = rho_max / steps;
  for (int k = 0; k < steps; ++k) {
    // RK4 on (x, v)
    VecX x = p.x;
    VecX k1x = vel, k1v = accel(p.chart, x, vel);
    VecX k2x = vel + 0.5 * h * k1v, k2v = accel(p.chart, x + 0.5 * h * k1x, k2x);
    VecX k3x = vel + 0.5 * h * k2v, k3v = accel(p.chart, x + 0.5 * h * k2x, k3x);
    VecX k4x = vel + h * k3v, k4v = accel(p.chart, x + h * k3x, k4x);
    p.x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x);
    vel = vel + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v);
    if (!M.chart(p.chart).contains(p.x, 0.0)) {
      PointRef tryp = p;
      VecX tryv = vel;
      if (!detail::maybe_transition(M, tryp, tryv)) {
        throw OutOfChartError(M.name + ": geodesic left the chart atlas at rho = " +
                              std::to_string(path.rho.back() + h));
      }
      p = tryp;
      vel = tryv;
    } else {
      detail::maybe_transition(M, p, vel);
    }
    path.rho.push_back((k + 1) * h);
    path.points.push_back(p);
    path.velocity.push_back(vel);
  }
  return path;
}

// Geodesic through the model's analytic map when available, else RK4.
inline GeodesicPath model_geodesic(const Model& m, const PointRef& o, const VecX& v,
                                   double rho_max, double step = 0.01) {
  const ManifoldSpec& M = m.spec;
  if (M.geodesic) {
    PointRef probe = M.geodesic(o, v, rho_max * 0.5);
    if (probe.chart >= 0) {
      GeodesicPath path;
      path.origin = o;
      MatX g0 = M.g_at(o);
      path.direction = v / std::sqrt(v.dot(g0 * v));
      path.step = step;
      path.analytic = true;
      int steps = static_cast<int>(std::ceil(rho_max / step));
      double h = rho_max / steps;
      // analytic velocity by a small rho-stencil of the geodesic map, pulled
      // into the sample's chart (the maps are smooth in rho, including rho<0)
      auto velocity = [&](double r, int chart) {
        const double hr = 1e-4;
        auto pos = [&](double rr) {
          PointRef q = rr == 0.0 ? o : M.geodesic(o, v, rr);
          if (q.chart != chart) q = M.transition(q, chart);
          return q.x;
        };
        return VecX((pos(r - 2 * hr) - 8 * pos(r - hr) + 8 * pos(r + hr) - pos(r + 2 * hr)) /
                    (12 * hr));
      };
      for (int k = 0; k <= steps; ++k) {
        double r = k * h;
        PointRef q = k == 0 ? o : M.geodesic(o, v, r);
        path.rho.push_back(r);
        path.points.push_back(q);
        path.velocity.push_back(velocity(r, q.chart));
      }
      return path;
    }
  }
  return integrate_geodesic(M, o, v, rho_max, step);
}

inline double unit_speed_residual(const ManifoldSpec& M, const GeodesicPath& path) {
  double r = 0;
  for (size_t k = 0; k < path.size(); ++k) {
    if (path.velocity[k].size() == 0) continue;
    MatX g = M.g_at(path.points[k]);
    r = std::max(r, std::abs(path.velocity[k].dot(g * path.velocity[k]) - 1.0));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Parallel transport of the adapted unitary frame along a geodesic:
// e_1(0) = (gamma'(0) - i J gamma'(0))/sqrt(2), transported by the requested
// connection. State carried as complexified coordinate vectors; each RK4 step
// works in the components of a frame field based at the step start.
// ---------------------------------------------------------------------------

struct FrameAlongPath {
  std::vector<double> rho;
  std::vector<PointRef> points;
  std::vector<CMatX> frames;     // 2n x n coordinate components (chart of point)
  std::vector<VecX> velocity;    // coordinate velocity (for adapted-frame checks)
};

inline FrameAlongPath parallel_frame_along(const ManifoldSpec& M, const GeodesicPath& path,
                                           ConnectionKind kind) {
  if (path.size() < 3) throw DomainError("parallel_frame_along: path too short");
  const int n = M.n, D = 2 * n;
  GammaPath gpath = kind == ConnectionKind::levi_civita ? GammaPath::levi_civita
                                                        : canonical_path_for(M);

  // velocities: prefer stored (RK4) ones; otherwise differentiate the
  // analytic path samples
  auto velocity_at = [&](size_t k) -> VecX {
    if (path.velocity[k].size() != 0) return path.velocity[k];
    // one-sided/central difference of positions within the same chart
    size_t a = k > 0 ? k - 1 : k, b = k + 1 < path.size() ? k + 1 : k;
    if (path.points[a].chart != path.points[k].chart) a = k;
    if (path.points[b].chart != path.points[k].chart) b = k;
    if (a == b) throw DomainError("parallel_frame_along: cannot estimate velocity");
    return (path.points[b].x - path.points[a].x) / (path.rho[b] - path.rho[a]);
  };

  FrameAlongPath out;
  UnitaryFrame F0 = unitary_frame_at(M, path.origin, velocity_at(0));
  CMatX cur = F0.vectors;  // coordinate components, current chart
  out.rho.push_back(path.rho[0]);
  out.points.push_back(path.points[0]);
  out.frames.push_back(cur);
  out.velocity.push_back(velocity_at(0));

  // transport over sample pairs [k, k+2] (RK4 with midpoint at k+1)
  for (size_t k = 0; k + 2 < path.size(); k += 2) {
    PointRef p0 = path.points[k], p1 = path.points[k + 1], p2 = path.points[k + 2];
    // unify charts for the step: pull p1, p2 into p0's chart if needed
    VecX v1 = velocity_at(k + 1), v2 = velocity_at(k + 2);
    auto pull = [&](PointRef q, VecX& vq) {
      if (q.chart != p0.chart) {
        MatX Jt = detail::transition_jacobian(M, q, p0.chart);
        vq = Jt * vq;
        q = M.transition(q, p0.chart);
      }
      return q;
    };
    PointRef q1 = pull(p1, v1), q2 = pull(p2, v2);

    FrameField ff(M, p0, std::nullopt);
    MatX g0m = M.metric(p0.chart, p0.x);
    // frame components of the transported vectors
    CMatX E0 = ff(p0.x);
    CMatX W(D, n);
    for (int c = 0; c < n; ++c) W.col(c) = frame_components(g0m, E0, cur.col(c));

    auto omega = [&](const PointRef& q, const VecX& vq) {
      std::vector<cplx> gam = gamma_field_eval(ff, q.x, M.fd, gpath, n);
      MatX gq = M.metric(p0.chart, q.x);
      CVecX vc = frame_components(gq, ff(q.x), vq.cast<cplx>());
      CMatX om = CMatX::Zero(D, D);
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) {
          cplx s = 0;
          for (int c = 0; c < D; ++c) s += gam[g3(a, c, b, D)] * vc[c];
          om(a, b) = s;
        }
      return om;
    };

    double h2 = path.rho[k + 2] - path.rho[k];
    CMatX om0 = omega(p0, velocity_at(k));
    CMatX om1 = omega(q1, v1);
    CMatX om2 = omega(q2, v2);
    CMatX k1 = -om0 * W;
    CMatX k2 = -om1 * (W + 0.5 * h2 * k1);
    CMatX k3 = -om1 * (W + 0.5 * h2 * k2);
    CMatX k4 = -om2 * (W + h2 * k3);
    W += (h2 / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);

    // back to coordinate vectors at the end point (in p0's chart), then to
    // the sample's own chart
    CMatX E2 = ff(q2.x);
    CMatX full = full_frame(E2);
    cur = full * W;
    if (p2.chart != p0.chart) {
      MatX Jt = detail::transition_jacobian(M, q2, p2.chart);
      cur = Jt.cast<cplx>() * cur;
    }
    out.rho.push_back(path.rho[k + 2]);
    out.points.push_back(p2);
    out.frames.push_back(cur);
    out.velocity.push_back(velocity_at(k + 2));
  }
  return out;
}

// max over samples of ||<e_i, bar e_j> - delta|| for the transported frame
inline double transport_unitarity_residual(const ManifoldSpec& M, const FrameAlongPath& fr) {
  double r = 0;
  for (size_t k = 0; k < fr.frames.size(); ++k) {
    MatX g = M.g_at(fr.points[k]);
    const int n = M.n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        cplx h = g_herm(g, fr.frames[k].col(i), fr.frames[k].col(j));
        r = std::max(r, std::abs(h - (i == j ? 1.0 : 0.0)));
      }
  }
  return r;
}

// max over samples of || e_1 - (gamma' - i J gamma')/sqrt(2) ||
inline double radial_e1_drift(const ManifoldSpec& M, const FrameAlongPath& fr) {
  double r = 0;
  for (size_t k = 0; k < fr.frames.size(); ++k) {
    MatX J = M.j_at(fr.points[k]);
    VecX u = fr.velocity[k];
    MatX g = M.g_at(fr.points[k]);
    u /= std::sqrt(u.dot(g * u));
    VecX Ju = J * u;
    CVecX rad(u.size());
    for (int i = 0; i < u.size(); ++i) rad[i] = cplx(u[i], -Ju[i]) / std::sqrt(2.0);
    r = std::max(r, (fr.frames[k].col(0) - rad).cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace ahg
