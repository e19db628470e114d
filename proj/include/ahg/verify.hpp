#pragma once

#include "ahg/curvature.hpp"
#include "ahg/models.hpp"

namespace ahg {

struct ResidualReport {
  std::string identity_id;
  double max_residual = 0.0;
  PointRef location;
  double tolerance = 0.0;
  bool pass = true;

  static ResidualReport make(std::string id, double res, PointRef loc, double tol) {
    ResidualReport r;
    r.identity_id = std::move(id);
    r.max_residual = res;
    r.location = std::move(loc);
    r.tolerance = tol;
    r.pass = res <= tol;
    return r;
  }
  // associative max-merge; keeps the worst location
  void merge(const ResidualReport& o) {
    if (o.max_residual > max_residual) {
      max_residual = o.max_residual;
      location = o.location;
    }
    pass = max_residual <= tolerance;
  }
};

// Tolerance ladder: algebraic identities 1e-7, first-derivative identities
// 1e-6, identities involving curvature or nabla tau 1e-5.
inline double default_tolerance(const std::string& id) {
  if (id.rfind("bianchi", 0) == 0 || id.find("curvature") != std::string::npos ||
      id.find("nabla_tau") != std::string::npos || id.find("section") != std::string::npos)
    return 1e-5;
  if (id.find("hessian") != std::string::npos || id.find("laplace") != std::string::npos ||
      id.find("divergence") != std::string::npos || id.find("connection_diff") != std::string::npos ||
      id.find("ricci_identity") != std::string::npos)
    return 1e-6;
  return 1e-7;
}

// ---------------------------------------------------------------------------
// First Bianchi identities of the canonical connection (unitary frame):
//  (1) R_{i bj k bl} - R_{k bj i bl} = tau^j_{ik;bl} - tau^{blam}_{ik} tau^j_{bl blam}
//  (2) R_{i bj k bl} - R_{i bl k bj} = tau^{bi}_{bj bl;k} - tau^{bi}_{k lam} tau^{lam}_{bj bl}
//  (3) R_{i bj k bl} - R_{k bl i bj} = tau^l_{ik;bj} + tau^{bi}_{bj bl;k}
//        - tau^{bi}_{k lam} tau^{lam}_{bj bl} - tau^{blam}_{ik} tau^l_{bj blam}
//  (4) R_{i bj k l} = -tau^{bi}_{kl;bj} + tau^{bi}_{bj blam} tau^{blam}_{kl}
// ---------------------------------------------------------------------------

struct BianchiContext {
  ConnectionCoeffs can;
  CurvatureTensor R;
  TorsionTensor t;
  FrameTensor nt;  // tau^a_{bc;d}
};

inline BianchiContext bianchi_context(const ManifoldSpec& M, const PointRef& p) {
  BianchiContext ctx{canonical_coeffs(M, p), {}, {}, {}};
  ctx.R = curvature_at(M, p, ctx.can);
  ctx.t = torsion_at(M, p, ctx.can);
  ctx.nt = nabla_torsion(M, p, ctx.can);
  return ctx;
}

inline std::array<ResidualReport, 4> check_bianchi(const ManifoldSpec& M, const PointRef& p) {
  BianchiContext ctx = bianchi_context(M, p);
  const int n = M.n;
  const auto& R = ctx.R;
  const auto& t = ctx.t;
  const auto& nt = ctx.nt;
  auto NT = [&](int a, int b, int c, int d) { return nt.at({a, b, c, d}); };

  double r1 = 0, r2 = 0, r3 = 0, r4 = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          cplx lhs1 = R.at(i, j + n, k, l + n) - R.at(k, j + n, i, l + n);
          cplx rhs1 = NT(j, i, k, l + n);
          for (int lam = 0; lam < n; ++lam)
            rhs1 -= t.T(lam + n, i, k) * t.T(j, l + n, lam + n);
          r1 = std::max(r1, std::abs(lhs1 - rhs1));

          cplx lhs2 = R.at(i, j + n, k, l + n) - R.at(i, l + n, k, j + n);
          cplx rhs2 = NT(i + n, j + n, l + n, k);
          for (int lam = 0; lam < n; ++lam)
            rhs2 -= t.T(i + n, k, lam) * t.T(lam, j + n, l + n);
          r2 = std::max(r2, std::abs(lhs2 - rhs2));

          cplx lhs3 = R.at(i, j + n, k, l + n) - R.at(k, l + n, i, j + n);
          cplx rhs3 = NT(l, i, k, j + n) + NT(i + n, j + n, l + n, k);
          for (int lam = 0; lam < n; ++lam) {
            rhs3 -= t.T(i + n, k, lam) * t.T(lam, j + n, l + n);
            rhs3 -= t.T(lam + n, i, k) * t.T(l, j + n, lam + n);
          }
          r3 = std::max(r3, std::abs(lhs3 - rhs3));

          cplx lhs4 = R.at(i, j + n, k, l);
          cplx rhs4 = -NT(i + n, k, l, j + n);
          for (int lam = 0; lam < n; ++lam)
            rhs4 += t.T(i + n, j + n, lam + n) * t.T(lam + n, k, l);
          r4 = std::max(r4, std::abs(lhs4 - rhs4));
        }

  return {ResidualReport::make("bianchi_1", r1, p, default_tolerance("bianchi_1")),
          ResidualReport::make("bianchi_2", r2, p, default_tolerance("bianchi_2")),
          ResidualReport::make("bianchi_3", r3, p, default_tolerance("bianchi_3")),
          ResidualReport::make("bianchi_4", r4, p, default_tolerance("bianchi_4"))};
}

// ---------------------------------------------------------------------------
// Ricci identities: function Hessian commutators and the full vector-section
// version D^2 s(X,Y) - D^2 s(Y,X) = -R(X,Y)s + D_{tau(X,Y)} s.
// ---------------------------------------------------------------------------

inline std::vector<ResidualReport> check_ricci_identity(const ManifoldSpec& M,
                                                        const PointRef& p,
                                                        const ScalarField& f) {
  const int n = M.n, D = 2 * n;
  auto field = make_field(M, p);
  ConnectionCoeffs can = canonical_coeffs(M, p, field);
  TorsionTensor t = torsion_at(M, p, can);
  CMatX H = covariant_hessian(M, p, f, can);
  ScalarJet jet = scalar_jet(f, p.x, M.fd);
  CVecX grad = frame_gradient((*field)(p.x), jet.df);

  double r_mixed = 0, r_20 = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      r_mixed = std::max(r_mixed, std::abs(H(i, j + n) - H(j + n, i)));
      cplx lhs = H(i, j) - H(j, i);
      cplx rhs = 0;
      for (int lam = 0; lam < D; ++lam) rhs += t.T(lam, i, j) * grad[lam];
      r_20 = std::max(r_20, std::abs(lhs - rhs));
    }

  // vector section s = (1,0)-projection of a fixed coordinate vector
  VecX v0 = VecX::Zero(D);
  v0[0] = 1.0;
  if (D > 1) v0[1] = 0.5;
  auto s_field = [&M, v0, field, n](const VecX& x) {
    MatX J = M.acs(field->chart(), x);
    MatX g = M.metric(field->chart(), x);
    VecX Jv = J * v0;
    CVecX s(2 * n);
    for (int i = 0; i < 2 * n; ++i) s[i] = cplx(v0[i], -Jv[i]) * 0.5;
    CVecX comp = frame_components(g, (*field)(x), s);
    FrameTensor T(n, {'u'});
    for (int a = 0; a < 2 * n; ++a) T.at({a}) = comp[a];
    return T;
  };
  auto ds_field = [&](const VecX& x) {
    return covariant_derivative_tensor_at(M, x, s_field, field, can.path, M.fd.h_frame);
  };
  FrameTensor s0 = s_field(p.x);
  FrameTensor ds = covariant_derivative_tensor(M, p, s_field, can, M.fd.h_frame);
  FrameTensor dds = covariant_derivative_tensor(M, p, ds_field, can);
  CurvatureTensor R = curvature_at(M, p, can);

  double r_sec = 0;
  for (int k = 0; k < D; ++k)
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) {
        // s^k_{;a;b} - s^k_{;b;a} = -R^k_{m a b} s^m + tau^c_{ab} s^k_{;c}
        // (derivative indices appended rightmost: outer derivative last)
        cplx lhs = dds.at({k, a, b}) - dds.at({k, b, a});
        cplx rhs = 0;
        for (int m = 0; m < D; ++m) rhs -= R.at(m, bar(k, n), a, b) * s0.at({m});
        for (int c = 0; c < D; ++c) rhs += t.T(c, a, b) * ds.at({k, c});
        r_sec = std::max(r_sec, std::abs(lhs - rhs));
      }

  return {ResidualReport::make("ricci_identity_mixed", r_mixed, p, 1e-6),
          ResidualReport::make("ricci_identity_20", r_20, p, 1e-6),
          ResidualReport::make("ricci_identity_section", r_sec, p, 1e-5)};
}

// ---------------------------------------------------------------------------
// Comparisons between Levi-Civita and canonical operators.
// ---------------------------------------------------------------------------

struct VectorField {
  // coordinate components of a real vector field on the chart
  std::function<VecX(const VecX&)> components;
};

inline std::vector<ResidualReport> check_connection_comparisons(const ManifoldSpec& M,
                                                                const PointRef& p,
                                                                const ScalarField& f,
                                                                const VectorField& X) {
  const int n = M.n, D = 2 * n;
  auto field = make_field(M, p);
  ConnectionCoeffs lc = levi_civita_coeffs(M, p, field);
  ConnectionCoeffs can = canonical_coeffs(M, p, field);
  TorsionTensor t = torsion_at(M, p, can);
  CMatX Hc = covariant_hessian(M, p, f, can);
  CMatX Hl = covariant_hessian(M, p, f, lc);
  ScalarJet jet = scalar_jet(f, p.x, M.fd);
  CVecX grad = frame_gradient((*field)(p.x), jet.df);

  // (1,1) Hessian comparison: f_{i bj} - f_{,i bj} = 1/2( tau^j_{i lam} f_{blam}
  //   + tau^{bi}_{bj blam} f_lam )
  double r_h11 = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx rhs = 0;
      for (int lam = 0; lam < n; ++lam)
        rhs += 0.5 * (t.T(j, i, lam) * grad[lam + n] +
                      t.T(i + n, j + n, lam + n) * grad[lam]);
      r_h11 = std::max(r_h11, std::abs(Hc(i, j + n) - Hl(i, j + n) - rhs));
    }

  // (2,0) Hessian comparison: f_{ij} - f_{,ij} = 1/2( tau^lam_{ij} f_lam
  //   + tau^{blam}_{ij} f_{blam} + tau^{bj}_{i lam} f_{blam} + tau^{bi}_{j lam} f_{blam} )
  double r_h20 = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx rhs = 0;
      for (int lam = 0; lam < n; ++lam) {
        rhs += 0.5 * (t.T(lam, i, j) * grad[lam] + t.T(lam + n, i, j) * grad[lam + n] +
                      t.T(j + n, i, lam) * grad[lam + n] + t.T(i + n, j, lam) * grad[lam + n]);
      }
      r_h20 = std::max(r_h20, std::abs(Hc(i, j) - Hl(i, j) - rhs));
    }

  // Laplacian comparison: Delta f - Delta_L f = tau^i_{i lam} f_{blam}
  //   + tau^{bi}_{bi blam} f_lam  (sums over i, lam)
  cplx dl = 0, dll = 0, rhs_lap = 0;
  for (int i = 0; i < n; ++i) {
    dl += 2.0 * Hc(i, i + n);
    dll += 2.0 * Hl(i, i + n);
    for (int lam = 0; lam < n; ++lam)
      rhs_lap += t.T(i, i, lam) * grad[lam + n] + t.T(i + n, i + n, lam + n) * grad[lam];
  }
  double r_lap = std::abs(dl - dll - rhs_lap);

  // divergence comparison: div X - div_L X = X^i tau^j_{ji} + X^{bi} tau^{bj}_{bj bi}
  auto x_field = [&M, &X, field, n](const VecX& x) {
    MatX g = M.metric(field->chart(), x);
    CVecX comp = frame_components(g, (*field)(x), X.components(x).cast<cplx>());
    FrameTensor T(n, {'u'});
    for (int a = 0; a < 2 * n; ++a) T.at({a}) = comp[a];
    return T;
  };
  FrameTensor x0 = x_field(p.x);
  FrameTensor dxc = covariant_derivative_tensor(M, p, x_field, can, M.fd.h_frame);
  FrameTensor dxl = covariant_derivative_tensor(M, p, x_field, lc, M.fd.h_frame);
  cplx div_c = 0, div_l = 0, rhs_div = 0;
  for (int a = 0; a < D; ++a) {
    div_c += dxc.at({a, a});
    div_l += dxl.at({a, a});
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      rhs_div += x0.at({i}) * t.T(j, j, i) + x0.at({i + n}) * t.T(j + n, j + n, i + n);
  double r_div = std::abs(div_c - div_l - rhs_div);

  // raw connection difference: <D_{e_c} e_b - nabla_{e_c} e_b, e_d>
  //   = 1/2( tau^{bd}_{bc} + tau^{bb}_{cd} - tau^{bc}_{db} )   (index-bar via metric)
  double r_diff = 0;
  for (int b = 0; b < D; ++b)
    for (int c = 0; c < D; ++c)
      for (int d = 0; d < D; ++d) {
        cplx lhs = lc.G(bar(d, n), c, b) - can.G(bar(d, n), c, b);
        cplx rhs = 0.5 * (t.T(bar(d, n), b, c) + t.T(bar(b, n), c, d) - t.T(bar(c, n), d, b));
        r_diff = std::max(r_diff, std::abs(lhs - rhs));
      }

  std::vector<ResidualReport> out = {
      ResidualReport::make("comp_hessian_11", r_h11, p, 1e-6),
      ResidualReport::make("comp_hessian_20", r_h20, p, 1e-6),
      ResidualReport::make("comp_laplace", r_lap, p, 1e-6),
      ResidualReport::make("comp_divergence", r_div, p, 1e-6),
      ResidualReport::make("comp_connection_diff", r_diff, p, 1e-6)};

  // quasi-Kaehler collapse: f_{i bj} = f_{,i bj}, Delta f = Delta_L f, div = div_L
  if (M.declared_class == ManifoldClass::kaehler ||
      M.declared_class == ManifoldClass::quasi_kaehler ||
      M.declared_class == ManifoldClass::nearly_kaehler) {
    double r_c11 = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        r_c11 = std::max(r_c11, std::abs(Hc(i, j + n) - Hl(i, j + n)));
    out.push_back(ResidualReport::make("comp_qk_hessian_collapse", r_c11, p, 1e-6));
    out.push_back(ResidualReport::make("comp_qk_laplace_collapse", std::abs(dl - dll), p, 1e-6));
    out.push_back(
        ResidualReport::make("comp_qk_divergence_collapse", std::abs(div_c - div_l), p, 1e-6));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structure classification by canonical-torsion components.
// ---------------------------------------------------------------------------

struct Classification {
  ManifoldClass cls = ManifoldClass::general;
  double r_total = 0;   // max |tau|
  double r_20 = 0;      // max |tau^k_{ij}|   (vanishes iff quasi Kaehler)
  double r_02 = 0;      // max |tau^{bk}_{ij}| (vanishes iff integrable/Hermitian)
  double r_nk = 0;      // max |tau^{bk}_{ij} - tau^{bi}_{jk}| (nearly Kaehler symmetry)
};

inline Classification classify(const ManifoldSpec& M, const std::vector<PointRef>& sample) {
  if (sample.empty()) throw DomainError(M.name + ": classify needs at least one point");
  Classification c;
  for (const PointRef& p : sample) {
    ConnectionCoeffs can = canonical_coeffs(M, p, nullptr, GammaPath::canonical_general);
    TorsionTensor t = torsion_at(M, p, can);
    const int n = M.n;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          c.r_20 = std::max(c.r_20, std::abs(t.T(k, i, j)));
          c.r_02 = std::max(c.r_02, std::abs(t.T(k + n, i, j)));
          c.r_nk = std::max(c.r_nk, std::abs(t.T(k + n, i, j) - t.T(i + n, j, k)));
        }
    c.r_total = std::max(c.r_total, max_torsion_norm(t));
  }
  const double th = 1e-5 * (1.0 + c.r_total);
  if (c.r_total <= th) c.cls = ManifoldClass::kaehler;
  else if (c.r_20 <= th && c.r_nk <= th) c.cls = ManifoldClass::nearly_kaehler;
  else if (c.r_20 <= th) c.cls = ManifoldClass::quasi_kaehler;
  else if (c.r_02 <= th) c.cls = ManifoldClass::hermitian;
  else c.cls = ManifoldClass::general;
  return c;
}

// Kirichenko: nabla tau = 0 on nearly Kaehler manifolds.
inline ResidualReport check_kirichenko(const ManifoldSpec& M,
                                       const std::vector<PointRef>& sample) {
  if (M.declared_class != ManifoldClass::nearly_kaehler &&
      M.declared_class != ManifoldClass::kaehler) {
    throw ClassificationError(M.name + ": Kirichenko's theorem needs a nearly Kaehler manifold");
  }
  ResidualReport rep = ResidualReport::make("nabla_tau", 0.0, sample.at(0), 1e-5);
  for (const PointRef& p : sample) {
    ConnectionCoeffs can = canonical_coeffs(M, p);
    FrameTensor nt = nabla_torsion(M, p, can);
    rep.merge(ResidualReport::make("nabla_tau", nt.max_abs(), p, 1e-5));
  }
  return rep;
}

}  // namespace ahg
