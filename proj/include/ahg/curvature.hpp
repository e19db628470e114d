#pragma once

#include "ahg/connection.hpp"

namespace ahg {

// ---------------------------------------------------------------------------
// Curvature tensor of a frame connection, stored in the ordering
// R(X,Y,Z,W) = <R(Z,W)X, Y>:  R_{abcd} = g_C( R(e_c,e_d) e_a, e_b ).
// ---------------------------------------------------------------------------

struct CurvatureTensor {
  PointRef base;
  int n = 1;
  ConnectionKind kind = ConnectionKind::canonical;
  std::vector<cplx> R;  // flat (2n)^4

  int dim() const { return 2 * n; }
  size_t flat(int a, int b, int c, int d) const {
    const size_t D = static_cast<size_t>(dim());
    return ((static_cast<size_t>(a) * D + b) * D + c) * D + d;
  }
  cplx at(int a, int b, int c, int d) const { return R[flat(a, b, c, d)]; }
};

inline CurvatureTensor curvature_at(const ManifoldSpec& M, const PointRef& p,
                                    const ConnectionCoeffs& conn) {
  const int n = M.n, D = 2 * n;
  M.require_in_chart(p, M.chart_margin(p.x));

  // coordinate partials of the coefficient field, then frame contraction
  auto gam_field = [&](const VecX& x) -> CVecX {
    std::vector<cplx> g = gamma_field_eval(*conn.field, x, M.fd, conn.path, n);
    return Eigen::Map<CVecX>(g.data(), static_cast<long>(g.size()));
  };
  const double h = FdConfig::step(M.fd.h_outer, p.x);
  std::vector<CVecX> dgam(D);
  for (int mu = 0; mu < D; ++mu) dgam[mu] = d1_axis(gam_field, p.x, mu, h, M.fd.richardson);

  CMatX E = (*conn.field)(p.x);
  // e_c(Gamma^a_{db}) for all (a,d,b,c)
  std::vector<cplx> eGam(static_cast<size_t>(D) * D * D * D);
  auto eg = [&](int a, int d, int b, int c) -> cplx& {
    return eGam[((static_cast<size_t>(a) * D + d) * D + b) * D + c];
  };
  for (int c = 0; c < D; ++c) {
    CVecX ec = detail::frame_col(E, c, n);
    for (int a = 0; a < D; ++a)
      for (int d = 0; d < D; ++d)
        for (int b = 0; b < D; ++b) {
          cplx v = 0;
          for (int mu = 0; mu < D; ++mu) v += ec[mu] * dgam[mu][g3(a, d, b, D)];
          eg(a, d, b, c) = v;
        }
  }

  CurvatureTensor out;
  out.base = p;
  out.n = n;
  out.kind = conn.kind;
  out.R.assign(static_cast<size_t>(D) * D * D * D, cplx(0, 0));
  // operator components R^a_{bcd}: R(e_c, e_d) e_b = R^a_{bcd} e_a
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        for (int d = 0; d < D; ++d) {
          cplx v = eg(a, d, b, c) - eg(a, c, b, d);
          for (int m = 0; m < D; ++m) {
            v += conn.G(a, c, m) * conn.G(m, d, b) - conn.G(a, d, m) * conn.G(m, c, b) -
                 conn.C(m, c, d) * conn.G(a, m, b);
          }
          // lower the first index with the frame metric: R_{b' a ...} pattern
          // R_{abcd} = R^{bar b}_{a c d}
          out.R[out.flat(b, bar(a, n), c, d)] = v;
        }
  return out;
}

// max |R_{abcd} + R_{bacd}| and |R_{abcd} + R_{abdc}|
inline double curvature_antisymmetry_residual(const CurvatureTensor& R) {
  const int D = R.dim();
  double r = 0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        for (int d = 0; d < D; ++d) {
          r = std::max(r, std::abs(R.at(a, b, c, d) + R.at(b, a, c, d)));
          r = std::max(r, std::abs(R.at(a, b, c, d) + R.at(a, b, d, c)));
        }
  return r;
}

// Canonical type preservation: R_{ij ab} = 0 (both sandwich indices (1,0)).
inline double curvature_type_residual(const CurvatureTensor& R) {
  const int n = R.n, D = R.dim();
  double r = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) {
          r = std::max(r, std::abs(R.at(i, j, a, b)));
          r = std::max(r, std::abs(R.at(i + n, j + n, a, b)));
        }
  return r;
}

inline double curvature_conjugation_residual(const CurvatureTensor& R) {
  const int n = R.n, D = R.dim();
  double r = 0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        for (int d = 0; d < D; ++d)
          r = std::max(r, std::abs(std::conj(R.at(a, b, c, d)) -
                                   R.at(bar(a, n), bar(b, n), bar(c, n), bar(d, n))));
  return r;
}

// ---------------------------------------------------------------------------
// Ricci variants (n x n matrices over (i, bar j)).
// ---------------------------------------------------------------------------

enum class RicciKind { first, second, quasi, levi_civita };

inline CMatX ricci_first(const CurvatureTensor& R) {
  const int n = R.n;
  CMatX out = CMatX::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) out(i, j) += R.at(l, l + n, i, j + n);
  return out;
}

inline CMatX ricci_second(const CurvatureTensor& R) {
  const int n = R.n;
  CMatX out = CMatX::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) out(i, j) += R.at(i, j + n, l, l + n);
  return out;
}

// Quasi Ricci of a quasi-Kaehler manifold:
// QR_{i bj} = R_{i bj lam blam}
//   - 1/2 ( tau^j_{blam bmu} tau^{bmu}_{lam i} + tau^{bi}_{lam mu} tau^{mu}_{blam bj} )
//   - 1/4 tau^{bi}_{lam mu} tau^j_{blam bmu}
inline CMatX ricci_quasi(const CurvatureTensor& R, const TorsionTensor& t) {
  const int n = R.n;
  CMatX out = ricci_second(R);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx corr = 0;
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) {
          corr += 0.5 * (t.T(j, l + n, m + n) * t.T(m + n, l, i) +
                         t.T(i + n, l, m) * t.T(m, l + n, j + n));
          corr += 0.25 * t.T(i + n, l, m) * t.T(j, l + n, m + n);
        }
      out(i, j) -= corr;
    }
  return out;
}

// Riemannian Ricci of the Levi-Civita connection in the complex frame:
// Ric(e_i, bar e_j) = sum_lam ( R_{bj blam lam i} + R_{bj lam blam i} ).
inline CMatX ricci_levi_civita(const CurvatureTensor& RL) {
  const int n = RL.n;
  CMatX out = CMatX::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        out(i, j) += RL.at(j + n, l + n, l, i) + RL.at(j + n, l, l + n, i);
  return out;
}

inline CMatX ricci_at(const ManifoldSpec& M, const PointRef& p, RicciKind kind) {
  auto field = make_field(M, p);
  if (kind == RicciKind::levi_civita) {
    ConnectionCoeffs lc = levi_civita_coeffs(M, p, field);
    return ricci_levi_civita(curvature_at(M, p, lc));
  }
  ConnectionCoeffs can = canonical_coeffs(M, p, field);
  CurvatureTensor R = curvature_at(M, p, can);
  switch (kind) {
    case RicciKind::first: return ricci_first(R);
    case RicciKind::second: return ricci_second(R);
    default: {
      if (M.declared_class != ManifoldClass::kaehler &&
          M.declared_class != ManifoldClass::quasi_kaehler &&
          M.declared_class != ManifoldClass::nearly_kaehler) {
        throw ClassificationError(M.name + ": quasi Ricci requires a quasi-Kaehler manifold");
      }
      return ricci_quasi(R, torsion_at(M, p, can));
    }
  }
}

// ---------------------------------------------------------------------------
// Pointwise curvature scalars over (1,0) vectors given by frame components.
// ---------------------------------------------------------------------------

// R(X, bar X, Y, bar Y)
inline double bisectional(const CurvatureTensor& R, const CVecX& X, const CVecX& Y) {
  const int n = R.n;
  cplx v = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          v += R.at(i, j + n, k, l + n) * X[i] * std::conj(X[j]) * Y[k] * std::conj(Y[l]);
  return v.real();
}

// R(bar X, Y, Y, X) — the (2,0)-part probe bounded by A2.
inline double curvature20(const CurvatureTensor& R, const CVecX& X, const CVecX& Y) {
  const int n = R.n;
  cplx v = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          v += R.at(i + n, j, k, l) * std::conj(X[i]) * Y[j] * Y[k] * X[l];
  return std::abs(v);
}

// Hermitian norm of tau(X,Y) for (1,0) frame components X, Y.
inline double torsion_vector_norm(const TorsionTensor& t, const CVecX& X, const CVecX& Y) {
  const int n = t.n, D = 2 * n;
  double s = 0;
  for (int a = 0; a < D; ++a) {
    cplx v = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v += t.T(a, i, j) * X[i] * Y[j];
    s += std::norm(v);
  }
  return std::sqrt(s);
}

// Quasi holomorphic sectional curvature of a real unit vector:
// QH(X) = R_{1 b1 1 b1} - sum_{i>=2} |tau^1_{i1} + tau^{b1}_{i1}|^2
// in a unitary frame with e_1 = (X - iJX)/sqrt(2).
inline double qh_sectional(const ManifoldSpec& M, const PointRef& p, const VecX& X) {
  if (X.norm() == 0.0) throw DomainError(M.name + ": QH of zero vector");
  auto field = make_field(M, p, X);
  ConnectionCoeffs can = canonical_coeffs(M, p, field);
  CurvatureTensor R = curvature_at(M, p, can);
  TorsionTensor t = torsion_at(M, p, can);
  const int n = M.n;
  double qh = R.at(0, n, 0, n).real();
  for (int i = 1; i < n; ++i) qh -= std::norm(t.T(0, i, 0) + t.T(n, i, 0));
  return qh;
}

// Normalized quasi holomorphic bisectional curvature of a nearly Kaehler
// manifold: ( R(X,bX,Y,bY) + ||tau(X,Y)||^2 ) / ( |X|^2|Y|^2 + |<X,bY>|^2 ).
// X, Y are (1,0) frame components w.r.t. the same frame as R and t.
inline double quasi_bisectional_ratio(const CurvatureTensor& R, const TorsionTensor& t,
                                      const CVecX& X, const CVecX& Y) {
  const int n = R.n;
  double num = bisectional(R, X, Y);
  double tn = torsion_vector_norm(t, X, Y);
  num += tn * tn;
  cplx xy = 0;
  for (int i = 0; i < n; ++i) xy += X[i] * std::conj(Y[i]);
  double den = X.squaredNorm() * Y.squaredNorm() + std::norm(xy);
  return num / den;
}

inline double quasi_bisectional(const ManifoldSpec& M, const PointRef& p, const CVecX& Xf,
                                const CVecX& Yf) {
  if (M.declared_class != ManifoldClass::nearly_kaehler &&
      M.declared_class != ManifoldClass::kaehler) {
    throw ClassificationError(M.name + ": quasi bisectional defined for nearly Kaehler");
  }
  if (Xf.norm() == 0.0 || Yf.norm() == 0.0) throw DomainError("zero (1,0) vector");
  auto field = make_field(M, p);
  ConnectionCoeffs can = canonical_coeffs(M, p, field);
  CurvatureTensor R = curvature_at(M, p, can);
  TorsionTensor t = torsion_at(M, p, can);
  return quasi_bisectional_ratio(R, t, Xf, Yf);
}

// ---------------------------------------------------------------------------
// Numerical estimation of the bounds K (bisectional lower bound), A1
// (torsion) and A2 ((2,0)-curvature) by seeded Monte Carlo over unit (1,0)
// pairs plus a derivative-free golden-section polish of the worst samples.
// ---------------------------------------------------------------------------

struct CurvatureBounds {
  double K_lower = 0;
  double A1 = 0;
  double A2 = 0;
  int sample_count = 0;
  int points = 0;
  uint64_t seed = 0;
  bool refined = false;
};

namespace detail {

inline double golden_min(const std::function<double(double)>& f, double a, double b,
                         int iters = 40) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < iters; ++k) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Coordinate-wise golden-section polish of params minimizing f.
inline VecX coordinate_polish(const std::function<double(const VecX&)>& f, VecX params,
                              double radius, int rounds) {
  for (int r = 0; r < rounds; ++r) {
    for (int i = 0; i < params.size(); ++i) {
      VecX q = params;
      double best = golden_min(
          [&](double v) {
            q[i] = v;
            return f(q);
          },
          params[i] - radius, params[i] + radius);
      params[i] = best;
    }
    radius *= 0.35;
  }
  return params;
}

inline CVecX unit_cvec_from_params(const VecX& params, int n) {
  CVecX v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(params[2 * i], params[2 * i + 1]);
  double nrm = v.norm();
  if (nrm < 1e-12) {
    v = CVecX::Zero(n);
    v[0] = 1.0;
    return v;
  }
  return v / nrm;
}

}  // namespace detail

// Minimum of the quasi holomorphic bisectional ratio over sampled (X,Y)
// pairs (diagonal pairs included: on homogeneous models the minimum sits at
// Y = X) with golden-section polish of the worst pair.
inline double estimate_min_quasi_bisectional(const ManifoldSpec& M,
                                             const std::vector<PointRef>& region,
                                             int samples, uint64_t seed = 4242) {
  if (region.empty()) throw DomainError(M.name + ": empty region");
  const int n = M.n;
  double vmin = std::numeric_limits<double>::infinity();
  RngStream root(seed);
  for (size_t pi = 0; pi < region.size(); ++pi) {
    const PointRef& p = region[pi];
    auto field = make_field(M, p);
    ConnectionCoeffs can = canonical_coeffs(M, p, field);
    CurvatureTensor R = curvature_at(M, p, can);
    TorsionTensor t = torsion_at(M, p, can);
    auto eval = [&](const VecX& params) {
      CVecX X = detail::unit_cvec_from_params(params.head(2 * n), n);
      CVecX Y = detail::unit_cvec_from_params(params.tail(2 * n), n);
      return quasi_bisectional_ratio(R, t, X, Y);
    };
    RngStream prng = root.fork(pi);
    VecX worst;
    double v = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
      RngStream srng = prng.fork(static_cast<uint64_t>(s));
      VecX params(4 * n);
      for (int i = 0; i < 4 * n; ++i) params[i] = srng.normal();
      if (s % 2 == 0) params.tail(2 * n) = params.head(2 * n);
      double q = eval(params);
      if (q < v) {
        v = q;
        worst = params;
      }
    }
    if (samples >= 8) {
      worst = detail::coordinate_polish(eval, worst, 0.4, 3);
      v = std::min(v, eval(worst));
    }
    vmin = std::min(vmin, v);
  }
  return vmin;
}

inline CurvatureBounds estimate_bounds(const ManifoldSpec& M,
                                       const std::vector<PointRef>& region, int samples,
                                       uint64_t seed = 12345) {
  if (region.empty()) throw DomainError(M.name + ": estimate_bounds needs a nonempty region");
  if (samples < 1) throw DomainError("estimate_bounds: samples must be >= 1");
  const int n = M.n;
  CurvatureBounds out;
  out.sample_count = samples;
  out.points = static_cast<int>(region.size());
  out.seed = seed;
  out.K_lower = std::numeric_limits<double>::infinity();

  RngStream root(seed);
  for (size_t pi = 0; pi < region.size(); ++pi) {
    const PointRef& p = region[pi];
    auto field = make_field(M, p);
    ConnectionCoeffs can = canonical_coeffs(M, p, field);
    CurvatureTensor R = curvature_at(M, p, can);
    TorsionTensor t = torsion_at(M, p, can);

    auto eval = [&](const VecX& params, int which) {
      CVecX X = detail::unit_cvec_from_params(params.head(2 * n), n);
      CVecX Y = detail::unit_cvec_from_params(params.tail(2 * n), n);
      switch (which) {
        case 0: return bisectional(R, X, Y);
        case 1: return torsion_vector_norm(t, X, Y);
        default: return curvature20(R, X, Y);
      }
    };

    VecX worst_k, worst_a1, worst_a2;
    double vk = std::numeric_limits<double>::infinity(), va1 = -1, va2 = -1;
    RngStream prng = root.fork(pi);
    for (int s = 0; s < samples; ++s) {
      RngStream srng = prng.fork(static_cast<uint64_t>(s));
      VecX params(4 * n);
      for (int i = 0; i < 4 * n; ++i) params[i] = srng.normal();
      if (s % 4 == 0) params.tail(2 * n) = params.head(2 * n);  // include diagonal pairs
      double b = eval(params, 0), a1 = eval(params, 1), a2 = eval(params, 2);
      if (b < vk) {
        vk = b;
        worst_k = params;
      }
      if (a1 > va1) {
        va1 = a1;
        worst_a1 = params;
      }
      if (a2 > va2) {
        va2 = a2;
        worst_a2 = params;
      }
    }
    // local refinement (golden-section polish of the worst samples)
    if (samples >= 8) {
      worst_k = detail::coordinate_polish([&](const VecX& q) { return eval(q, 0); }, worst_k,
                                          0.4, 3);
      worst_a1 = detail::coordinate_polish([&](const VecX& q) { return -eval(q, 1); },
                                           worst_a1, 0.4, 3);
      worst_a2 = detail::coordinate_polish([&](const VecX& q) { return -eval(q, 2); },
                                           worst_a2, 0.4, 3);
      vk = std::min(vk, eval(worst_k, 0));
      va1 = std::max(va1, eval(worst_a1, 1));
      va2 = std::max(va2, eval(worst_a2, 2));
      out.refined = true;
    }
    out.K_lower = std::min(out.K_lower, vk);
    out.A1 = std::max(out.A1, va1);
    out.A2 = std::max(out.A2, va2);
  }
  return out;
}

}  // namespace ahg
