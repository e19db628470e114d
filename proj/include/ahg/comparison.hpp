#pragma once

#include "ahg/curvature.hpp"
#include "ahg/geodesic.hpp"
#include "ahg/riccati.hpp"
#include "ahg/verify.hpp"

namespace ahg {

// ---------------------------------------------------------------------------
// Complex Hessian of the distance function in the adapted unitary frame
// (e_1 radial: seeded with grad rho), canonical connection.
// ---------------------------------------------------------------------------

struct HessianSample {
  double rho = 0;
  PointRef point;
  CMatX H;      // full mixed-index rho_{ab}
  CVecX grad;   // rho_a
  std::shared_ptr<const FrameField> field;
  GammaPath path = GammaPath::canonical_general;

  // rho_{k bar l} block
  CMatX X() const {
    const int n = static_cast<int>(H.rows()) / 2;
    return H.block(0, n, n, n);
  }
};

inline ScalarField distance_field(const Model& m, const PointRef& o, int chart) {
  return [&m, o, chart](const VecX& x) { return m.spec.distance(o, PointRef{chart, x}); };
}

inline HessianSample distance_hessian(const Model& m, const PointRef& o, const PointRef& p) {
  const ManifoldSpec& M = m.spec;
  bool at_cut = false;
  double rho = analytic_distance(m, o, p, &at_cut);
  if (at_cut) throw CutLocusError(M.name + ": distance Hessian at the cut locus");
  ScalarField f = distance_field(m, o, p.chart);

  // radial seed: grad rho = g^{-1} d rho
  const double h1 = FdConfig::step(M.fd.h_scalar, p.x);
  VecX df(M.real_dim());
  for (int mu = 0; mu < M.real_dim(); ++mu)
    df[mu] = partial_derivative(f, p.x, {{mu, 1}}, h1, M.fd.richardson);
  VecX u = M.g_at(p).ldlt().solve(df);

  HessianSample s;
  s.rho = rho;
  s.point = p;
  s.field = make_field(M, p, u);
  s.path = canonical_path_for(M);
  ConnectionCoeffs can = canonical_coeffs(M, p, s.field);
  s.H = covariant_hessian(M, p, f, can);
  s.grad = frame_gradient((*s.field)(p.x), df);
  return s;
}

// First-order evolution identities rho_{ia} rho_{bi} + rho_i rho_{bi a} = 0.
inline double first_order_identity_residual(const HessianSample& s) {
  const int n = static_cast<int>(s.H.rows()) / 2;
  double r = 0;
  for (int a = 0; a < 2 * n; ++a) {
    cplx v = 0;
    for (int i = 0; i < n; ++i)
      v += s.H(i, a) * s.grad[i + n] + s.grad[i] * s.H(i + n, a);
    r = std::max(r, std::abs(v));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Comparison reports.
// ---------------------------------------------------------------------------

struct ComparisonEntry {
  int dir = 0;
  double rho = 0;
  double margin = 0;        // bound minus measured (min eigenvalue)
  double equality_gap = 0;  // max |bound - measured| where equality is asserted
};

struct ComparisonReport {
  std::string check_id;
  double min_margin = std::numeric_limits<double>::infinity();
  double max_equality_gap = 0;
  double tolerance = 1e-4;
  bool equality_expected = false;
  bool pass = false;
  std::vector<ComparisonEntry> entries;
  PointRef worst;

  void add(const ComparisonEntry& e, const PointRef& at) {
    entries.push_back(e);
    if (e.margin < min_margin) {
      min_margin = e.margin;
      worst = at;
    }
    max_equality_gap = std::max(max_equality_gap, e.equality_gap);
  }
  void finish() {
    pass = min_margin >= -tolerance && (!equality_expected || max_equality_gap <= tolerance);
  }
};

inline std::vector<VecX> seeded_directions(const ManifoldSpec& M, const PointRef& o,
                                           int count, uint64_t seed) {
  RngStream rng = RngStream(seed).fork(0xd17);
  std::vector<VecX> dirs;
  dirs.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    RngStream s = rng.fork(static_cast<uint64_t>(k));
    dirs.push_back(random_unit_tangent(M, o, s));
  }
  return dirs;
}

inline PointRef geodesic_point(const Model& m, const PointRef& o, const VecX& v, double rho,
                               double step = 0.005) {
  if (m.spec.geodesic) {
    PointRef q = m.spec.geodesic(o, v, rho);
    if (q.chart >= 0) return q;
  }
  GeodesicPath path = integrate_geodesic(m.spec, o, v, rho, step);
  return path.points.back();
}

// ---------------------------------------------------------------------------
// General Hessian comparison:
//   rho_{i bj} <= [ 1/rho + ((4 sqrt(n)+3) A1^2 + 2 A2 + K)^(1/2) ] g_{i bj}
// for bisectional curvature >= -K (K >= 0; positive lower bounds truncate to
// K = 0), torsion <= A1, (2,0)-curvature <= A2.
// ---------------------------------------------------------------------------

inline double general_bound_constant(int n, const CurvatureBounds& b) {
  double K_thm = std::max(0.0, -b.K_lower);
  return std::sqrt((4.0 * std::sqrt(static_cast<double>(n)) + 3.0) * b.A1 * b.A1 +
                   2.0 * b.A2 + K_thm);
}

inline ComparisonReport check_hessian_comparison_general(const Model& m, const PointRef& o,
                                                         const std::vector<VecX>& dirs,
                                                         const std::vector<double>& rho_grid,
                                                         const CurvatureBounds& bounds) {
  const ManifoldSpec& M = m.spec;
  const int n = M.n;
  ComparisonReport rep;
  rep.check_id = "hessian_comparison_general";
  const double c = general_bound_constant(n, bounds);
  for (size_t d = 0; d < dirs.size(); ++d) {
    for (double rho : rho_grid) {
      PointRef p = geodesic_point(m, o, dirs[d], rho);
      HessianSample s = distance_hessian(m, o, p);
      double B = 1.0 / rho + c;
      CMatX gap = B * CMatX::Identity(n, n) - s.X();
      ComparisonEntry e;
      e.dir = static_cast<int>(d);
      e.rho = rho;
      e.margin = min_eig_hermitian(gap);
      rep.tolerance = 1e-4 * (1.0 + std::abs(B));
      rep.add(e, p);
    }
  }
  rep.finish();
  return rep;
}

// ---------------------------------------------------------------------------
// Riccati cross-check along one geodesic: the measured Hessian in the
// canonically-parallel frame must stay dominated by the solution of
//   dY/drho = -Y^2 - A Y - Y A^* + sigma I,
// started at the measured X on the first grid node, where
// sigma = (2 sqrt(n) + 1/2) A1^2 + A2 + K/2 bounds the right-hand side and
// A_{kl} = sum_lam rho_{bar lam} tau^l_{lam k}.
// Also verifies the proof's bound A + A^* >= -sqrt(2) A1 I.
// ---------------------------------------------------------------------------

struct RiccatiCrossCheck {
  double min_domination_margin = std::numeric_limits<double>::infinity();
  double min_a_bound_margin = std::numeric_limits<double>::infinity();
  bool escaped = false;
};

inline RiccatiCrossCheck riccati_cross_check(const Model& m, const PointRef& o, const VecX& v,
                                             const std::vector<double>& rho_grid,
                                             const CurvatureBounds& bounds) {
  const ManifoldSpec& M = m.spec;
  const int n = M.n;
  const double step = 0.005;
  GeodesicPath path = model_geodesic(m, o, v, rho_grid.back() + step, step);
  FrameAlongPath fr = parallel_frame_along(M, path, ConnectionKind::canonical);

  auto node_index = [&](double rho) {
    size_t best = 0;
    double err = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < fr.rho.size(); ++k) {
      if (std::abs(fr.rho[k] - rho) < err) {
        err = std::abs(fr.rho[k] - rho);
        best = k;
      }
    }
    return best;
  };

  std::vector<CMatX> Xs, As;
  std::vector<double> rhos;
  RiccatiCrossCheck out;
  for (double rho : rho_grid) {
    size_t k = node_index(rho);
    const PointRef& p = fr.points[k];
    HessianSample s = distance_hessian(m, o, p);
    ConnectionCoeffs can = canonical_coeffs(M, p, s.field);
    TorsionTensor t = torsion_at(M, p, can);
    MatX g = M.g_at(p);
    CMatX E = (*s.field)(p.x);
    // components of the transported frame in the sample's frame
    CMatX U(n, n);
    for (int c = 0; c < n; ++c) {
      CVecX comp = frame_components(g, E, fr.frames[k].col(c));
      U.col(c) = comp.head(n);
    }
    // rotate: X' = U^T X conj(U); tau'^l_{lam k}; rho'_lam = U^T rho
    CMatX Xp = U.transpose() * s.X() * U.conjugate();
    CVecX gp = U.transpose() * s.grad.head(n);
    CMatX A = CMatX::Zero(n, n);
    for (int kk = 0; kk < n; ++kk)
      for (int l = 0; l < n; ++l) {
        cplx a = 0;
        for (int lam = 0; lam < n; ++lam) {
          // tau'^l_{lam kk} in the transported frame
          cplx tp = 0;
          for (int mm = 0; mm < n; ++mm)
            for (int ii = 0; ii < n; ++ii)
              for (int jj = 0; jj < n; ++jj)
                tp += t.T(mm, ii, jj) * std::conj(U(mm, l)) * U(ii, lam) * U(jj, kk);
          a += std::conj(gp[lam]) * tp;
        }
        A(kk, l) = a;
      }
    Xs.push_back(Xp);
    As.push_back(A);
    rhos.push_back(fr.rho[k]);
    double a_margin = min_eig_hermitian(A + A.adjoint()) + std::sqrt(2.0) * bounds.A1;
    out.min_a_bound_margin = std::min(out.min_a_bound_margin, a_margin);
  }

  double K_thm = std::max(0.0, -bounds.K_lower);
  double sigma = (2.0 * std::sqrt(static_cast<double>(n)) + 0.5) * bounds.A1 * bounds.A1 +
                 bounds.A2 + 0.5 * K_thm;
  RiccatiProblem prob;
  prob.n = n;
  prob.rho0 = rhos.front();
  prob.rho1 = rhos.back();
  prob.X0 = Xs.front();
  prob.S = [sigma, n](double) { return CMatX(sigma * CMatX::Identity(n, n)); };
  prob.A = [rhos, As](double r) {
    if (r <= rhos.front()) return As.front();
    if (r >= rhos.back()) return As.back();
    size_t k = 1;
    while (k < rhos.size() && rhos[k] < r) ++k;
    double w = (r - rhos[k - 1]) / (rhos[k] - rhos[k - 1]);
    return CMatX((1.0 - w) * As[k - 1] + w * As[k]);
  };
  RiccatiSolution sol = riccati_solve(prob, rhos, 1e-3);
  out.escaped = sol.escaped;
  for (size_t k = 0; k < sol.rho.size() && k < Xs.size(); ++k) {
    out.min_domination_margin =
        std::min(out.min_domination_margin, min_eig_hermitian(sol.X[k] - Xs[k]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sharp nearly Kaehler Hessian comparison and its Laplacian corollary.
// Bound in the adapted frame (e_1 radial):
//   K > 0: diag( sqrt(2K)/2 cot(sqrt(2K) rho),  sqrt(K/2) cot(sqrt(K/2) rho) I )
//   K = 0: diag( 1/(2 rho), (1/rho) I )
//   K < 0: cot -> coth with |K|.
// ---------------------------------------------------------------------------

inline double nk_radial_bound(double K, double rho) {
  if (K > 1e-12) return 0.5 * std::sqrt(2 * K) / std::tan(std::sqrt(2 * K) * rho);
  if (K < -1e-12) return 0.5 * std::sqrt(-2 * K) / std::tanh(std::sqrt(-2 * K) * rho);
  return 0.5 / rho;
}

inline double nk_transverse_bound(double K, double rho) {
  if (K > 1e-12) return std::sqrt(K / 2) / std::tan(std::sqrt(K / 2) * rho);
  if (K < -1e-12) return std::sqrt(-K / 2) / std::tanh(std::sqrt(-K / 2) * rho);
  return 1.0 / rho;
}

inline double nk_laplacian_bound(int n, double K, double rho) {
  // Delta rho <= 2 * ( radial + (n-1) * transverse ), the trace of the bound
  return 2.0 * (nk_radial_bound(K, rho) + (n - 1) * nk_transverse_bound(K, rho));
}

struct NkComparisonReport {
  ComparisonReport hessian;
  ComparisonReport laplacian;
};

inline NkComparisonReport check_hessian_comparison_nk(const Model& m, const PointRef& o,
                                                      const std::vector<VecX>& dirs,
                                                      const std::vector<double>& rho_grid,
                                                      double K, bool expect_equality) {
  const ManifoldSpec& M = m.spec;
  if (M.declared_class != ManifoldClass::nearly_kaehler &&
      M.declared_class != ManifoldClass::kaehler) {
    throw ClassificationError(M.name + ": sharp Hessian comparison needs nearly Kaehler");
  }
  const int n = M.n;
  NkComparisonReport rep;
  rep.hessian.check_id = "hessian_comparison_nk";
  rep.hessian.equality_expected = expect_equality;
  rep.laplacian.check_id = "laplacian_comparison_nk";
  rep.laplacian.equality_expected = expect_equality;

  for (size_t d = 0; d < dirs.size(); ++d) {
    for (double rho : rho_grid) {
      PointRef p = geodesic_point(m, o, dirs[d], rho);
      HessianSample s = distance_hessian(m, o, p);
      CMatX bound = CMatX::Zero(n, n);
      bound(0, 0) = nk_radial_bound(K, rho);
      for (int i = 1; i < n; ++i) bound(i, i) = nk_transverse_bound(K, rho);
      CMatX gap = bound - s.X();
      ComparisonEntry e;
      e.dir = static_cast<int>(d);
      e.rho = rho;
      e.margin = min_eig_hermitian(gap);
      if (expect_equality) e.equality_gap = gap.cwiseAbs().maxCoeff();
      rep.hessian.add(e, p);

      double lap = 2.0 * s.X().real().trace();
      double lap_bound = nk_laplacian_bound(n, K, rho);
      ComparisonEntry el;
      el.dir = static_cast<int>(d);
      el.rho = rho;
      el.margin = lap_bound - lap;
      if (expect_equality) el.equality_gap = std::abs(lap_bound - lap);
      rep.laplacian.add(el, p);
    }
  }
  rep.hessian.finish();
  rep.laplacian.finish();
  return rep;
}

// ---------------------------------------------------------------------------
// Diameter estimate: QH >= K > 0 forces
//   f(rho) = rho_{k bl} rho_{bk} rho_l = rho_{1 b1}/2 <= (sqrt(K)/4) cot(sqrt(K) rho)
// and d(M) <= pi / sqrt(K).
// ---------------------------------------------------------------------------

inline ComparisonReport check_diameter(const Model& m, const PointRef& o,
                                       const std::vector<VecX>& dirs,
                                       const std::vector<double>& rho_grid, double K) {
  if (!(K > 0)) throw DomainError(m.spec.name + ": diameter bound needs K > 0");
  const int n = m.spec.n;
  ComparisonReport rep;
  rep.check_id = "diameter_radial_bound";
  const double rho_cap = 0.97 * kPi / std::sqrt(K);
  for (size_t d = 0; d < dirs.size(); ++d) {
    for (double rho : rho_grid) {
      if (rho >= rho_cap) continue;
      PointRef p = geodesic_point(m, o, dirs[d], rho);
      HessianSample s = distance_hessian(m, o, p);
      cplx f = 0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) f += s.H(k, l + n) * s.grad[k + n] * s.grad[l];
      double bound = 0.25 * std::sqrt(K) / std::tan(std::sqrt(K) * rho);
      ComparisonEntry e;
      e.dir = static_cast<int>(d);
      e.rho = rho;
      e.margin = bound - f.real();
      rep.add(e, p);
    }
  }
  rep.finish();
  // model diameter against the theorem bound
  if (std::isfinite(m.analytic_diameter)) {
    double slack = kPi / std::sqrt(K) - m.analytic_diameter;
    rep.pass = rep.pass && slack >= -1e-3;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Second-order evolution identity of the distance function: the full
// curvature-and-torsion expression for rho_{k bl i} rho_{bi} + rho_{k bl bi} rho_i,
// exercising third covariant derivatives, curvature and torsion at once.
// ---------------------------------------------------------------------------

inline ResidualReport check_evolution_identity(const Model& m, const PointRef& o,
                                               const VecX& v,
                                               const std::vector<double>& rho_grid) {
  const ManifoldSpec& M = m.spec;
  const int n = M.n;
  ResidualReport rep = ResidualReport::make("evolution_identity_2nd_order", 0.0, o, 1e-4);
  for (double rho : rho_grid) {
    PointRef p = geodesic_point(m, o, v, rho);
    HessianSample s = distance_hessian(m, o, p);
    ConnectionCoeffs can = canonical_coeffs(M, p, s.field);
    CurvatureTensor R = curvature_at(M, p, can);
    TorsionTensor t = torsion_at(M, p, can);
    ScalarField f = distance_field(m, o, p.chart);
    auto hess_field = [&](const VecX& x) {
      CMatX Hx = covariant_hessian_at(M, x, f, s.field, s.path);
      FrameTensor T(n, {'l', 'l'});
      for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b) T.at({a, b}) = Hx(a, b);
      return T;
    };
    FrameTensor T3 = covariant_derivative_tensor(M, p, hess_field, can);
    const CMatX& H = s.H;
    const CVecX& g = s.grad;

    double resid = 0;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        cplx lhs = 0;
        for (int i = 0; i < n; ++i)
          lhs += T3.at({k, l + n, i}) * g[i + n] + T3.at({k, l + n, i + n}) * g[i];
        cplx rhs = 0;
        for (int i = 0; i < n; ++i) {
          rhs -= H(i, l + n) * H(i + n, k) + H(i, k) * H(i + n, l + n);
          for (int lam = 0; lam < n; ++lam) {
            rhs -= g[i + n] * t.T(lam, i, k) * H(lam, l + n);
            rhs -= H(k, lam + n) * t.T(lam + n, i + n, l + n) * g[i];
            rhs -= H(lam, k) * t.T(lam, i + n, l + n) * g[i];
            rhs -= g[i + n] * t.T(lam + n, i, k) * H(lam + n, l + n);
            cplx c1 = R.at(l + n, lam, i, k);
            cplx c2 = R.at(k, lam + n, i + n, l + n);
            cplx c3 = R.at(i, lam + n, k, l + n);
            for (int mu = 0; mu < n; ++mu) {
              c1 += t.T(mu + n, i, k) * t.T(lam + n, l + n, mu + n);
              c2 += t.T(lam, k, mu) * t.T(mu, i + n, l + n);
              c3 += t.T(i + n, k, mu) * t.T(mu, lam + n, l + n) +
                    t.T(mu + n, i, k) * t.T(lam, l + n, mu + n);
            }
            rhs -= c1 * g[lam + n] * g[i + n] + c2 * g[lam] * g[i] + c3 * g[lam] * g[i + n];
          }
        }
        resid = std::max(resid, std::abs(lhs - rhs));
      }
    rep.merge(ResidualReport::make(rep.identity_id, resid, p, rep.tolerance));
  }
  return rep;
}

}  // namespace ahg
