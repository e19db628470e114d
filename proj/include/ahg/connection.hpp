#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "ahg/tensor.hpp"

namespace ahg {

using ScalarField = std::function<double(const VecX&)>;

// ---------------------------------------------------------------------------
// Frame-field derivatives and structure functions c^a_{bc}, [e_b,e_c]=c^a_{bc}e_a.
// ---------------------------------------------------------------------------

struct FrameDerivatives {
  CMatX E;                // frame at x, 2n x n
  std::vector<CMatX> dE;  // dE[mu] = d/dx_mu of the frame columns
  MatX g;
};

inline FrameDerivatives frame_derivatives(const FrameField& ff, const VecX& x,
                                          const FdConfig& fd) {
  FrameDerivatives out;
  out.E = ff(x);
  out.g = ff.manifold().metric(ff.chart(), x);
  const int d = static_cast<int>(x.size());
  out.dE.resize(d);
  const double h = FdConfig::step(fd.h_frame, x);
  for (int mu = 0; mu < d; ++mu) {
    out.dE[mu] = d1_axis([&](const VecX& y) { return ff(y); }, x, mu, h, fd.richardson);
  }
  return out;
}

namespace detail {
inline CVecX frame_col(const CMatX& E, int a, int n) {
  return a < n ? CVecX(E.col(a)) : CVecX(E.col(a - n).conjugate());
}
}  // namespace detail

// Flat index into (2n)^3 arrays of Gamma^a_{bc} / c^a_{bc}.
inline size_t g3(int a, int b, int c, int D) {
  return (static_cast<size_t>(a) * D + b) * D + c;
}

// Structure functions from the frame and its coordinate derivatives.
// Antisymmetry in (b,c) is exact by construction; conjugation symmetry
// c^{bar a}_{bar b bar c} = conj(c^a_{bc}) is enforced by symmetrization.
inline std::vector<cplx> structure_functions(const FrameDerivatives& FD, int n) {
  const int D = 2 * n;
  std::vector<cplx> c(static_cast<size_t>(D) * D * D, cplx(0, 0));

  auto dvec = [&](int mu, int a) -> CVecX {
    return a < n ? CVecX(FD.dE[mu].col(a)) : CVecX(FD.dE[mu].col(a - n).conjugate());
  };
  auto dir_deriv = [&](int b, int target) -> CVecX {
    CVecX eb = detail::frame_col(FD.E, b, n);
    CVecX out = CVecX::Zero(D);
    for (int mu = 0; mu < D; ++mu) out += eb[mu] * dvec(mu, target);
    return out;
  };

  for (int b = 0; b < D; ++b) {
    for (int cc = b + 1; cc < D; ++cc) {
      CVecX bracket = dir_deriv(b, cc) - dir_deriv(cc, b);
      CVecX comp = frame_components(FD.g, FD.E, bracket);
      for (int a = 0; a < D; ++a) {
        c[g3(a, b, cc, D)] = comp[a];
        c[g3(a, cc, b, D)] = -comp[a];
      }
    }
  }
  // conj symmetrization (exact up to rounding already; makes it structural)
  std::vector<cplx> sym = c;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int cc = 0; cc < D; ++cc) {
        cplx v = 0.5 * (c[g3(a, b, cc, D)] +
                        std::conj(c[g3(bar(a, n), bar(b, n), bar(cc, n), D)]));
        sym[g3(a, b, cc, D)] = v;
      }
  return sym;
}

// ---------------------------------------------------------------------------
// Levi-Civita coefficients in a unitary frame. The frame metric is constant,
// so Koszul's formula reduces to structure-function algebra:
//   Gamma^a_{bc} = 1/2 ( c^a_{bc} - c^{bar b}_{c,bar a} + c^{bar c}_{bar a,b} ).
// ---------------------------------------------------------------------------

inline std::vector<cplx> levi_civita_gamma(const std::vector<cplx>& c, int n) {
  const int D = 2 * n;
  std::vector<cplx> gam(c.size());
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int cc = 0; cc < D; ++cc) {
        gam[g3(a, b, cc, D)] = 0.5 * (c[g3(a, b, cc, D)] -
                                      c[g3(bar(b, n), cc, bar(a, n), D)] +
                                      c[g3(bar(cc, n), bar(a, n), b, D)]);
      }
  return gam;
}

// Canonical connection, quasi-Kaehler path: nabla = D - 1/2 J (DJ), which in a
// unitary frame keeps exactly the type-preserving blocks of the Levi-Civita
// coefficients.
inline std::vector<cplx> canonical_gamma_projection(const std::vector<cplx>& gamma_lc, int n) {
  const int D = 2 * n;
  std::vector<cplx> gam(gamma_lc.size(), cplx(0, 0));
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int cc = 0; cc < D; ++cc) {
        if (eps(a, n) == eps(cc, n)) gam[g3(a, b, cc, D)] = gamma_lc[g3(a, b, cc, D)];
      }
  return gam;
}

// ---------------------------------------------------------------------------
// Canonical connection, general path: per-point dense linear solve imposing
// type preservation (built into the unknowns Gamma^k_{aj}), metric
// compatibility and vanishing (1,1)-torsion. The coefficient matrix depends
// only on n, so its factorization is cached; each point only assembles the
// right-hand side. Uniqueness of the connection = full column rank.
// ---------------------------------------------------------------------------

namespace detail {

struct CanonicalSystem {
  Eigen::ColPivHouseholderQR<MatX> qr;
  MatX A;
  int rows = 0, cols = 0;
};

inline const CanonicalSystem& canonical_system(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<CanonicalSystem>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;

  const int n3 = n * n * n;
  const int ncplx = 2 * n3;            // unknowns: A-block Gamma^k_{ij}, B-block Gamma^k_{bar i j}
  const int cols = 2 * ncplx;          // [Re; Im]
  const int rows = 2 * (n3 + n3 + 2 * n3);
  auto sys = std::make_unique<CanonicalSystem>();
  MatX A = MatX::Zero(rows, cols);

  auto ua = [&](int k, int i, int j) { return (k * n + i) * n + j; };
  auto ub = [&](int k, int i, int j) { return n3 + (k * n + i) * n + j; };
  int row = 0;
  // z = rhs rows: Re(z)=Re(rhs), Im(z)=Im(rhs)
  auto eq_ident = [&](int u) {
    A(row, u) = 1.0;
    A(row + 1, ncplx + u) = 1.0;
    row += 2;
  };
  // z + conj(w) = 0 rows
  auto eq_conj_pair = [&](int u, int w) {
    A(row, u) = 1.0;
    A(row, w) = 1.0;
    A(row + 1, ncplx + u) = 1.0;
    A(row + 1, ncplx + w) = -1.0;
    row += 2;
  };

  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) eq_ident(ub(k, i, j));  // E1: B = -c^k_{j, bar i}
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) eq_ident(ub(k, i, j));  // E2: B = conj(c^{bar k}_{i, bar j})
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) eq_conj_pair(ua(k, i, j), ub(j, i, k));  // E3, a = i
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) eq_conj_pair(ub(k, i, j), ua(j, i, k));  // E3, a = bar i
  sys->A = A;
  sys->qr.compute(A);
  sys->rows = rows;
  sys->cols = cols;
  auto res = cache.emplace(n, std::move(sys));
  return *res.first->second;
}

}  // namespace detail

inline std::vector<cplx> canonical_gamma_general(const std::vector<cplx>& c, int n,
                                                 double* residual = nullptr) {
  const int D = 2 * n;
  const int n3 = n * n * n;
  const auto& sys = detail::canonical_system(n);

  VecX rhs = VecX::Zero(sys.rows);
  int row = 0;
  auto put = [&](cplx z) {
    rhs[row] = z.real();
    rhs[row + 1] = z.imag();
    row += 2;
  };
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) put(-c[g3(k, j, i + n, D)]);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) put(std::conj(c[g3(k + n, i, j + n, D)]));
  // E3 rows have zero right-hand side.
  row += 2 * (2 * n3);

  VecX u = sys.qr.solve(rhs);
  if (residual) *residual = (sys.A * u - rhs).cwiseAbs().maxCoeff();

  auto get = [&](int idx) { return cplx(u[idx], u[n3 * 2 + idx]); };
  std::vector<cplx> gam(static_cast<size_t>(D) * D * D, cplx(0, 0));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        cplx a_kij = get((k * n + i) * n + j);
        cplx b_kij = get(n3 + (k * n + i) * n + j);
        gam[g3(k, i, j, D)] = a_kij;                              // Gamma^k_{ij}
        gam[g3(k, i + n, j, D)] = b_kij;                          // Gamma^k_{bar i, j}
        gam[g3(k + n, i + n, j + n, D)] = std::conj(a_kij);       // conjugates
        gam[g3(k + n, i, j + n, D)] = std::conj(b_kij);
      }
  return gam;
}

// ---------------------------------------------------------------------------
// ConnectionCoeffs: coefficients at a base point plus the recipe to
// re-evaluate them at stencil points of the same frame field.
// ---------------------------------------------------------------------------

enum class ConnectionKind { levi_civita, canonical };
enum class GammaPath { levi_civita, canonical_projection, canonical_general };

struct ConnectionCoeffs {
  ConnectionKind kind = ConnectionKind::levi_civita;
  GammaPath path = GammaPath::levi_civita;
  PointRef base;
  int n = 1;
  std::vector<cplx> gamma;
  std::vector<cplx> structure;
  std::shared_ptr<const FrameField> field;
  double solve_residual = 0.0;

  int dim() const { return 2 * n; }
  cplx G(int a, int b, int c) const { return gamma[g3(a, b, c, dim())]; }
  cplx C(int a, int b, int c) const { return structure[g3(a, b, c, dim())]; }
};

inline std::vector<cplx> gamma_for_path(const std::vector<cplx>& c, int n, GammaPath path,
                                        double* residual = nullptr) {
  switch (path) {
    case GammaPath::levi_civita: return levi_civita_gamma(c, n);
    case GammaPath::canonical_projection:
      return canonical_gamma_projection(levi_civita_gamma(c, n), n);
    default: return canonical_gamma_general(c, n, residual);
  }
}

inline std::vector<cplx> gamma_field_eval(const FrameField& ff, const VecX& x,
                                          const FdConfig& fd, GammaPath path, int n) {
  FrameDerivatives FD = frame_derivatives(ff, x, fd);
  return gamma_for_path(structure_functions(FD, n), n, path);
}

inline GammaPath canonical_path_for(const ManifoldSpec& M) {
  switch (M.declared_class) {
    case ManifoldClass::kaehler:
    case ManifoldClass::quasi_kaehler:
    case ManifoldClass::nearly_kaehler: return GammaPath::canonical_projection;
    default: return GammaPath::canonical_general;
  }
}

inline std::shared_ptr<const FrameField> make_field(const ManifoldSpec& M, const PointRef& p,
                                                    std::optional<VecX> seed = std::nullopt) {
  return std::make_shared<FrameField>(M, p, std::move(seed));
}

inline ConnectionCoeffs levi_civita_coeffs(const ManifoldSpec& M, const PointRef& p,
                                           std::shared_ptr<const FrameField> field = nullptr) {
  if (!field) field = make_field(M, p);
  ConnectionCoeffs conn;
  conn.kind = ConnectionKind::levi_civita;
  conn.path = GammaPath::levi_civita;
  conn.base = p;
  conn.n = M.n;
  conn.field = field;
  FrameDerivatives FD = frame_derivatives(*field, p.x, M.fd);
  conn.structure = structure_functions(FD, M.n);
  conn.gamma = levi_civita_gamma(conn.structure, M.n);
  return conn;
}

inline ConnectionCoeffs canonical_coeffs(const ManifoldSpec& M, const PointRef& p,
                                         std::shared_ptr<const FrameField> field = nullptr,
                                         std::optional<GammaPath> force_path = std::nullopt) {
  if (!field) field = make_field(M, p);
  ConnectionCoeffs conn;
  conn.kind = ConnectionKind::canonical;
  conn.path = force_path.value_or(canonical_path_for(M));
  conn.base = p;
  conn.n = M.n;
  conn.field = field;
  FrameDerivatives FD = frame_derivatives(*field, p.x, M.fd);
  conn.structure = structure_functions(FD, M.n);
  double resid = 0.0;
  conn.gamma = gamma_for_path(conn.structure, M.n, conn.path, &resid);
  conn.solve_residual = resid;
  if (conn.path == GammaPath::canonical_general && resid > 1e-6) {
    throw GeometryError(M.name + ": canonical connection solve ill-conditioned, residual " +
                        std::to_string(resid));
  }
  return conn;
}

// ---------------------------------------------------------------------------
// Pointwise residuals of the defining properties.
// ---------------------------------------------------------------------------

// max |(nabla_{e_a} g)(e_b, e_c)| = max |Gamma^{bar c}_{ab} + Gamma^{bar b}_{ac}|
inline double metric_compat_residual(const ConnectionCoeffs& conn) {
  const int D = conn.dim();
  double r = 0.0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        r = std::max(r, std::abs(conn.G(bar(c, conn.n), a, b) + conn.G(bar(b, conn.n), a, c)));
  return r;
}

// max |(nabla_{e_a} J) e_c| component = 2 max |Gamma^m_{ac}| over type-violating (m,c).
inline double nabla_j_residual(const ConnectionCoeffs& conn) {
  const int D = conn.dim();
  double r = 0.0;
  for (int a = 0; a < D; ++a)
    for (int c = 0; c < D; ++c)
      for (int m = 0; m < D; ++m)
        if (eps(m, conn.n) != eps(c, conn.n)) r = std::max(r, 2.0 * std::abs(conn.G(m, a, c)));
  return r;
}

inline double conjugation_residual(const ConnectionCoeffs& conn) {
  const int D = conn.dim();
  const int n = conn.n;
  double r = 0.0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        r = std::max(r, std::abs(std::conj(conn.G(a, b, c)) -
                                 conn.G(bar(a, n), bar(b, n), bar(c, n))));
  return r;
}

// ---------------------------------------------------------------------------
// Torsion tau^a_{bc} = Gamma^a_{bc} - Gamma^a_{cb} - c^a_{bc}.
// ---------------------------------------------------------------------------

struct TorsionTensor {
  PointRef base;
  int n = 1;
  std::vector<cplx> tau;  // flat (2n)^3
  int dim() const { return 2 * n; }
  cplx T(int a, int b, int c) const { return tau[g3(a, b, c, dim())]; }
  // tau^k_{ij} block (upper (1,0), lower (1,0)(1,0))
  cplx t20(int k, int i, int j) const { return T(k, i, j); }
  // tau^{bar k}_{ij} block
  cplx t02(int k, int i, int j) const { return T(k + n, i, j); }
};

inline std::vector<cplx> torsion_from_gamma(const std::vector<cplx>& gamma,
                                            const std::vector<cplx>& c, int n) {
  const int D = 2 * n;
  std::vector<cplx> tau(gamma.size());
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int cc = 0; cc < D; ++cc)
        tau[g3(a, b, cc, D)] =
            gamma[g3(a, b, cc, D)] - gamma[g3(a, cc, b, D)] - c[g3(a, b, cc, D)];
  return tau;
}

inline TorsionTensor torsion_at(const ManifoldSpec& M, const PointRef& p,
                                const ConnectionCoeffs& conn) {
  (void)M;
  TorsionTensor t;
  t.base = p;
  t.n = conn.n;
  t.tau = torsion_from_gamma(conn.gamma, conn.structure, conn.n);
  return t;
}

// max |tau^a_{bc}| over mixed-type (b,c); vanishes for the canonical connection.
inline double mixed_torsion_residual(const TorsionTensor& t) {
  const int D = t.dim();
  double r = 0.0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        if (eps(b, t.n) != eps(c, t.n)) r = std::max(r, std::abs(t.T(a, b, c)));
  return r;
}

inline double max_torsion_norm(const TorsionTensor& t) {
  double r = 0.0;
  for (const cplx& z : t.tau) r = std::max(r, std::abs(z));
  return r;
}

// ---------------------------------------------------------------------------
// Covariant derivatives in the frame.
//
// Index convention: a derivative appends its direction as the rightmost
// index, f_{ab} = e_b(f_a) - Gamma^c_{ba} f_c, so that the Ricci identity
// reads f_{ij} - f_{ji} = tau^lam_{ij} f_lam + tau^{bar lam}_{ij} f_{bar lam}.
// ---------------------------------------------------------------------------

struct ScalarJet {
  double f = 0;
  VecX df;    // coordinate partials
  MatX d2f;   // coordinate second partials
};

inline ScalarJet scalar_jet(const ScalarField& f, const VecX& x, const FdConfig& fd) {
  ScalarJet jet;
  const int d = static_cast<int>(x.size());
  jet.f = f(x);
  jet.df = VecX(d);
  jet.d2f = MatX(d, d);
  const double h1 = FdConfig::step(fd.h_scalar, x);
  const double h2 = FdConfig::step(fd.h_scalar2, x);
  for (int mu = 0; mu < d; ++mu) {
    jet.df[mu] = partial_derivative(f, x, {{mu, 1}}, h1, fd.richardson);
    jet.d2f(mu, mu) = partial_derivative(f, x, {{mu, 2}}, h2, fd.richardson);
    for (int nu = 0; nu < mu; ++nu) {
      double v = partial_derivative(f, x, {{mu, 1}, {nu, 1}}, h2, fd.richardson);
      jet.d2f(mu, nu) = v;
      jet.d2f(nu, mu) = v;
    }
  }
  return jet;
}

// Frame gradient f_a = e_a(f).
inline CVecX frame_gradient(const CMatX& E, const VecX& df) {
  const int n = static_cast<int>(E.cols());
  CVecX out(2 * n);
  for (int a = 0; a < 2 * n; ++a) {
    CVecX ea = detail::frame_col(E, a, n);
    cplx s = 0;
    for (int mu = 0; mu < df.size(); ++mu) s += ea[mu] * df[mu];
    out[a] = s;
  }
  return out;
}

namespace detail {
inline CMatX covariant_hessian_core(int n, const FrameDerivatives& FD, const ScalarJet& jet,
                                    const std::vector<cplx>& gamma) {
  const int D = 2 * n;
  CVecX grad = frame_gradient(FD.E, jet.df);
  auto col = [&](int a) { return frame_col(FD.E, a, n); };
  auto dcol = [&](int mu, int a) -> CVecX {
    return a < n ? CVecX(FD.dE[mu].col(a)) : CVecX(FD.dE[mu].col(a - n).conjugate());
  };
  CMatX H(D, D);
  for (int a = 0; a < D; ++a) {
    CVecX ea = col(a);
    for (int b = 0; b < D; ++b) {
      CVecX eb = col(b);
      cplx v = 0;
      // f_{ab} = e_b(e_a f) - Gamma^c_{ba} f_c, expanded through coordinates:
      // e_b(e_a^mu) d_mu f + e_a^mu e_b^nu d2f_{nu mu}
      for (int mu = 0; mu < D; ++mu) {
        cplx eb_d_ea_mu = 0;
        for (int nu = 0; nu < D; ++nu) {
          eb_d_ea_mu += eb[nu] * dcol(nu, a)[mu];
          v += ea[mu] * eb[nu] * jet.d2f(nu, mu);
        }
        v += eb_d_ea_mu * jet.df[mu];
      }
      for (int c = 0; c < D; ++c) v -= gamma[g3(c, b, a, D)] * grad[c];
      H(a, b) = v;
    }
  }
  return H;
}
}  // namespace detail

// Full mixed-index covariant Hessian f_{ab}, rows a, columns b.
inline CMatX covariant_hessian(const ManifoldSpec& M, const PointRef& p, const ScalarField& f,
                               const ConnectionCoeffs& conn) {
  FrameDerivatives FD = frame_derivatives(*conn.field, p.x, M.fd);
  ScalarJet jet = scalar_jet(f, p.x, M.fd);
  return detail::covariant_hessian_core(M.n, FD, jet, conn.gamma);
}

// Hessian of the same connection path at arbitrary chart coordinates of the
// frame field (the Hessian is re-derived there, not parallel-transported).
inline CMatX covariant_hessian_at(const ManifoldSpec& M, const VecX& x, const ScalarField& f,
                                  const std::shared_ptr<const FrameField>& ff, GammaPath path) {
  FrameDerivatives FD = frame_derivatives(*ff, x, M.fd);
  ScalarJet jet = scalar_jet(f, x, M.fd);
  std::vector<cplx> gamma = gamma_for_path(structure_functions(FD, M.n), M.n, path);
  return detail::covariant_hessian_core(M.n, FD, jet, gamma);
}

namespace detail {

inline FrameTensor covariant_derivative_core(int n, const FrameTensor& T0,
                                             const std::vector<FrameTensor>& dT,
                                             const CMatX& E,
                                             const std::vector<cplx>& gamma) {
  const int D = 2 * n;
  std::vector<char> var = T0.variance;
  var.push_back('l');
  FrameTensor out(n, var);
  const int rank = T0.rank();
  std::vector<int> idx(static_cast<size_t>(rank) + 1, 0);
  const size_t total = out.data.size();
  for (size_t flat = 0; flat < total; ++flat) {
    size_t rem = flat;
    for (int s = rank; s >= 0; --s) {
      idx[static_cast<size_t>(s)] = static_cast<int>(rem % D);
      rem /= D;
    }
    const int d = idx[static_cast<size_t>(rank)];
    // directional derivative e_d(T_idx)
    CVecX ed = frame_col(E, d, n);
    size_t tflat = 0;
    for (int s = 0; s < rank; ++s) tflat = tflat * D + static_cast<size_t>(idx[s]);
    cplx v = 0;
    for (int mu = 0; mu < D; ++mu) v += ed[mu] * dT[mu].data[tflat];
    // Gamma corrections per slot
    for (int s = 0; s < rank; ++s) {
      const int as = idx[static_cast<size_t>(s)];
      for (int m = 0; m < D; ++m) {
        size_t mflat = 0;
        for (int t = 0; t < rank; ++t)
          mflat = mflat * D + static_cast<size_t>(t == s ? m : idx[t]);
        if (T0.variance[static_cast<size_t>(s)] == 'u') {
          v += gamma[g3(as, d, m, D)] * T0.data[mflat];
        } else {
          v -= gamma[g3(m, d, as, D)] * T0.data[mflat];
        }
      }
    }
    out.data[flat] = v;
  }
  return out;
}

}  // namespace detail

// Covariant derivative of a frame-tensor field at arbitrary chart coordinates
// (re-deriving the connection of the same frame field / path there).
inline FrameTensor covariant_derivative_tensor_at(
    const ManifoldSpec& M, const VecX& x,
    const std::function<FrameTensor(const VecX&)>& field,
    const std::shared_ptr<const FrameField>& ff, GammaPath path, double h_base = 0.0) {
  const int n = M.n, D = 2 * n;
  FrameTensor T0 = field(x);
  if (T0.n != n) throw DomainError("covariant_derivative_tensor: tensor dim mismatch");
  const double h = FdConfig::step(h_base > 0 ? h_base : M.fd.h_outer, x);
  std::vector<FrameTensor> dT(D);
  for (int mu = 0; mu < D; ++mu) dT[mu] = d1_axis(field, x, mu, h, M.fd.richardson);
  std::vector<cplx> gamma = gamma_field_eval(*ff, x, M.fd, path, n);
  return detail::covariant_derivative_core(n, T0, dT, (*ff)(x), gamma);
}

// Generic covariant derivative of a frame-tensor field; the new (lower)
// direction index is appended last. `field` must return components in the
// frame of `conn.field` at the given chart coordinates.
inline FrameTensor covariant_derivative_tensor(
    const ManifoldSpec& M, const PointRef& p,
    const std::function<FrameTensor(const VecX&)>& field, const ConnectionCoeffs& conn,
    double h_base = 0.0) {
  const int n = M.n, D = 2 * n;
  FrameTensor T0 = field(p.x);
  if (T0.n != n) throw DomainError("covariant_derivative_tensor: tensor dim mismatch");
  const double h = FdConfig::step(h_base > 0 ? h_base : M.fd.h_outer, p.x);
  std::vector<FrameTensor> dT(D);
  for (int mu = 0; mu < D; ++mu) dT[mu] = d1_axis(field, p.x, mu, h, M.fd.richardson);
  return detail::covariant_derivative_core(n, T0, dT, (*conn.field)(p.x), conn.gamma);
}

// Torsion as a variance-tagged tensor field of the same connection path,
// for nabla tau in the Bianchi identities and Kirichenko's theorem.
inline std::function<FrameTensor(const VecX&)> torsion_field(const ManifoldSpec& M,
                                                             const ConnectionCoeffs& conn) {
  auto ff = conn.field;
  GammaPath path = conn.path;
  int n = M.n;
  FdConfig fd = M.fd;
  return [ff, path, n, fd](const VecX& x) {
    FrameDerivatives FD = frame_derivatives(*ff, x, fd);
    std::vector<cplx> c = structure_functions(FD, n);
    std::vector<cplx> gam = gamma_for_path(c, n, path);
    std::vector<cplx> tau = torsion_from_gamma(gam, c, n);
    FrameTensor T(n, {'u', 'l', 'l'});
    T.data = std::move(tau);
    return T;
  };
}

inline FrameTensor nabla_torsion(const ManifoldSpec& M, const PointRef& p,
                                 const ConnectionCoeffs& conn) {
  return covariant_derivative_tensor(M, p, torsion_field(M, conn), conn);
}

}  // namespace ahg
