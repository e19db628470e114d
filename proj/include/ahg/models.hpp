#pragma once

#include <array>
#include <map>

#include "ahg/connection.hpp"

namespace ahg {

enum class ModelName { flat_cn, cpn_fs, chn_ball, s6_nk, hopf };

inline const char* to_string(ModelName m) {
  switch (m) {
    case ModelName::flat_cn: return "flat_cn";
    case ModelName::cpn_fs: return "cpn_fs";
    case ModelName::chn_ball: return "chn_ball";
    case ModelName::s6_nk: return "s6_nk";
    default: return "hopf";
  }
}

inline ModelName model_name_from(const std::string& s) {
  if (s == "flat_cn") return ModelName::flat_cn;
  if (s == "cpn_fs") return ModelName::cpn_fs;
  if (s == "chn_ball") return ModelName::chn_ball;
  if (s == "s6_nk") return ModelName::s6_nk;
  if (s == "hopf") return ModelName::hopf;
  throw DomainError("unknown model name: " + s);
}

struct ModelId {
  ModelName name = ModelName::flat_cn;
  int n = 1;        // complex dimension (fixed to 3 for s6_nk, 2 for hopf)
  double K = 1.0;   // curvature scale for cpn_fs (>0) / chn_ball (<0)
};

// A catalog manifold plus the analytic ground truth used by the test suites.
struct Model {
  ModelId id;
  ManifoldSpec spec;
  double analytic_diameter = std::numeric_limits<double>::infinity();
  double cut_distance = std::numeric_limits<double>::infinity();  // from any base point
  // Ambient embedding carrying the polynomial trial functions (s6: R^7,
  // cpn_fs n=1: round 2-sphere in R^3). Empty when not available.
  std::function<VecX(const PointRef&)> embed;
  int embed_dim = 0;
  // Uniform sampler w.r.t. the volume measure (compact models only).
  std::function<PointRef(RngStream&)> sample_uniform;
  // Random verification point, comfortably inside the chart.
  std::function<PointRef(RngStream&)> sample_point;
};

// ---------------------------------------------------------------------------
// Octonion cross product on Im(O) = R^7. Fano lines (i, i+1, i+3) mod 7 with
// cyclic products e_i e_{i+1} = e_{i+3}; any consistent convention yields the
// standard nearly Kaehler structure on S^6.
// ---------------------------------------------------------------------------

namespace oct {

inline const std::array<std::array<std::pair<int, int>, 7>, 7>& table() {
  // table[i][j] = (k, sign) with e_i x e_j = sign * e_k  (i != j)
  static const auto t = [] {
    std::array<std::array<std::pair<int, int>, 7>, 7> tt{};
    for (auto& row : tt) row.fill({-1, 0});
    for (int i = 0; i < 7; ++i) {
      int a = i, b = (i + 1) % 7, c = (i + 3) % 7;
      tt[a][b] = {c, +1};
      tt[b][a] = {c, -1};
      tt[b][c] = {a, +1};
      tt[c][b] = {a, -1};
      tt[c][a] = {b, +1};
      tt[a][c] = {b, -1};
    }
    return tt;
  }();
  return t;
}

inline VecX cross(const VecX& u, const VecX& v) {
  VecX w = VecX::Zero(7);
  const auto& t = table();
  for (int i = 0; i < 7; ++i) {
    if (u[i] == 0.0) continue;
    for (int j = 0; j < 7; ++j) {
      if (i == j || v[j] == 0.0) continue;
      auto [k, s] = t[i][j];
      w[k] += s * u[i] * v[j];
    }
  }
  return w;
}

inline MatX cross_matrix(const VecX& u) {
  MatX A = MatX::Zero(7, 7);
  const auto& t = table();
  for (int i = 0; i < 7; ++i) {
    if (u[i] == 0.0) continue;
    for (int j = 0; j < 7; ++j) {
      if (i == j) continue;
      auto [k, s] = t[i][j];
      A(k, j) += s * u[i];
    }
  }
  return A;
}

}  // namespace oct

// ---------------------------------------------------------------------------
// Shared pieces.
// ---------------------------------------------------------------------------

namespace detail {

// Standard J on C^n in stacked real coordinates (x_1..x_n, y_1..y_n):
// J dx_i = dy_i, J dy_i = -dx_i.
inline MatX standard_j(int n) {
  MatX J = MatX::Zero(2 * n, 2 * n);
  J.block(0, n, n, n) = -MatX::Identity(n, n);
  J.block(n, 0, n, n) = MatX::Identity(n, n);
  return J;
}

inline CVecX to_complex(const VecX& x, int n) {
  CVecX z(n);
  for (int i = 0; i < n; ++i) z[i] = cplx(x[i], x[i + n]);
  return z;
}

// Real metric of the Hermitian form c * H (H Hermitian positive):
// blocks [[Re H, Im H], [Im H^T, Re H]].
inline MatX hermitian_to_real(const CMatX& H, double c) {
  const int n = static_cast<int>(H.rows());
  MatX G(2 * n, 2 * n);
  MatX A = H.real(), B = H.imag();
  G.block(0, 0, n, n) = A;
  G.block(0, n, n, n) = B;
  G.block(n, 0, n, n) = B.transpose();
  G.block(n, n, n, n) = A;
  return c * G;
}

inline std::function<PointRef(RngStream&)> box_sampler(int chart, VecX lo, VecX hi,
                                                       double r_max = 0.0) {
  return [chart, lo, hi, r_max](RngStream& rng) {
    while (true) {
      VecX x(lo.size());
      for (int i = 0; i < lo.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
      if (r_max > 0.0 && x.norm() >= r_max) continue;
      return PointRef{chart, x};
    }
  };
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model builders.
// ---------------------------------------------------------------------------

inline Model build_flat(int n) {
  Model m;
  m.id = {ModelName::flat_cn, n, 0.0};
  ManifoldSpec& M = m.spec;
  M.n = n;
  M.name = "flat_cn";
  M.declared_class = ManifoldClass::kaehler;
  const int d = 2 * n;
  Chart ch;
  ch.id = 0;
  ch.lo = VecX::Constant(d, -50.0);
  ch.hi = VecX::Constant(d, 50.0);
  M.charts = {ch};
  M.metric = [d](int, const VecX&) { return MatX::Identity(d, d); };
  MatX J = detail::standard_j(n);
  M.acs = [J](int, const VecX&) { return J; };
  M.distance = [](const PointRef& o, const PointRef& p) { return (o.x - p.x).norm(); };
  M.geodesic = [](const PointRef& o, const VecX& v, double rho) {
    return PointRef{o.chart, o.x + rho * v / v.norm()};
  };
  m.sample_point = detail::box_sampler(0, VecX::Constant(d, -1.5), VecX::Constant(d, 1.5));
  return m;
}

inline Model build_cpn(int n, double K) {
  if (K <= 0) throw DomainError("cpn_fs requires K > 0");
  Model m;
  m.id = {ModelName::cpn_fs, n, K};
  ManifoldSpec& M = m.spec;
  M.n = n;
  M.name = "cpn_fs";
  M.declared_class = ManifoldClass::kaehler;
  const int d = 2 * n;
  Chart ch;
  ch.id = 0;
  ch.lo = VecX::Constant(d, -50.0);
  ch.hi = VecX::Constant(d, 50.0);
  M.charts = {ch};
  const double c = 2.0 / K;
  M.metric = [n, c](int, const VecX& x) {
    CVecX z = detail::to_complex(x, n);
    double s = 1.0 + z.squaredNorm();
    CMatX H = CMatX::Identity(n, n) / s;
    H -= (z.conjugate() * z.transpose()) / (s * s);
    return detail::hermitian_to_real(H, c);
  };
  MatX J = detail::standard_j(n);
  M.acs = [J](int, const VecX&) { return J; };

  const double scale = std::sqrt(c);  // rho = scale * arctan-type invariant
  m.analytic_diameter = kPi / std::sqrt(2.0 * K);
  m.cut_distance = kPi / std::sqrt(2.0 * K);
  M.distance = [n, scale](const PointRef& o, const PointRef& p) {
    CVecX zo = detail::to_complex(o.x, n), zp = detail::to_complex(p.x, n);
    cplx inner = 1.0 + zp.dot(zo);  // dot conjugates the first argument
    double denom = std::sqrt((1.0 + zo.squaredNorm()) * (1.0 + zp.squaredNorm()));
    double w = std::min(1.0, std::abs(inner) / denom);
    return scale * std::acos(w);
  };
  M.geodesic = [n, scale, d](const PointRef& o, const VecX& v, double rho) {
    if (o.x.norm() > 1e-12) return PointRef{-1, VecX()};  // analytic form from origin only
    CVecX w = detail::to_complex(v, n);
    w /= w.norm();
    double s = std::tan(rho / scale);
    CVecX z = s * w;
    VecX x(d);
    for (int i = 0; i < n; ++i) {
      x[i] = z[i].real();
      x[i + n] = z[i].imag();
    }
    return PointRef{0, x};
  };
  if (n == 1) {
    const double r = 1.0 / std::sqrt(2.0 * K);  // round-sphere radius
    m.embed_dim = 3;
    m.embed = [r](const PointRef& p) {
      double x = p.x[0], y = p.x[1], s = x * x + y * y;
      VecX u(3);
      u << r * 2 * x / (1 + s), r * 2 * y / (1 + s), r * (1 - s) / (1 + s);
      return u;
    };
    m.sample_uniform = [](RngStream& rng) {
      VecX u = rng.normal_vec(3);
      u.normalize();
      // stereographic chart from the u3 = -1 pole
      double denom = 1.0 + u[2];
      if (std::abs(denom) < 1e-12) denom = 1e-12;
      VecX x(2);
      x << u[0] / denom, u[1] / denom;
      return PointRef{0, x};
    };
  }
  m.sample_point = detail::box_sampler(0, VecX::Constant(d, -0.75), VecX::Constant(d, 0.75));
  return m;
}

inline Model build_chn(int n, double K) {
  if (K >= 0) throw DomainError("chn_ball requires K < 0");
  Model m;
  m.id = {ModelName::chn_ball, n, K};
  ManifoldSpec& M = m.spec;
  M.n = n;
  M.name = "chn_ball";
  M.declared_class = ManifoldClass::kaehler;
  const int d = 2 * n;
  Chart ch;
  ch.id = 0;
  ch.lo = VecX::Constant(d, -0.95);
  ch.hi = VecX::Constant(d, 0.95);
  ch.r_max = 0.93;
  M.charts = {ch};
  const double c = -2.0 / K;
  M.metric = [n, c](int, const VecX& x) {
    CVecX z = detail::to_complex(x, n);
    double s = 1.0 - z.squaredNorm();
    CMatX H = CMatX::Identity(n, n) / s;
    H += (z.conjugate() * z.transpose()) / (s * s);
    return detail::hermitian_to_real(H, c);
  };
  MatX J = detail::standard_j(n);
  M.acs = [J](int, const VecX&) { return J; };

  const double scale = std::sqrt(c);
  M.distance = [n, scale](const PointRef& o, const PointRef& p) {
    CVecX zo = detail::to_complex(o.x, n), zp = detail::to_complex(p.x, n);
    cplx inner = 1.0 - zp.dot(zo);
    double denom = std::sqrt((1.0 - zo.squaredNorm()) * (1.0 - zp.squaredNorm()));
    double w = std::max(1.0, std::abs(inner) / denom);
    return scale * std::acosh(w);
  };
  M.geodesic = [n, scale, d](const PointRef& o, const VecX& v, double rho) {
    if (o.x.norm() > 1e-12) return PointRef{-1, VecX()};
    CVecX w = detail::to_complex(v, n);
    w /= w.norm();
    double s = std::tanh(rho / scale);
    CVecX z = s * w;
    VecX x(d);
    for (int i = 0; i < n; ++i) {
      x[i] = z[i].real();
      x[i + n] = z[i].imag();
    }
    return PointRef{0, x};
  };
  m.sample_point = detail::box_sampler(0, VecX::Constant(d, -0.5), VecX::Constant(d, 0.5), 0.55);
  return m;
}

inline Model build_s6() {
  Model m;
  m.id = {ModelName::s6_nk, 3, 1.0};
  ManifoldSpec& M = m.spec;
  M.n = 3;
  M.name = "s6_nk";
  M.declared_class = ManifoldClass::nearly_kaehler;
  const int d = 6;
  for (int id = 0; id < 2; ++id) {
    Chart ch;
    ch.id = id;
    ch.lo = VecX::Constant(d, -2.3);
    ch.hi = VecX::Constant(d, 2.3);
    ch.r_max = 2.2;
    M.charts.push_back(ch);
  }

  // chart 0 covers the pole +e7, chart 1 covers -e7; both use x -> x/|x|^2
  // as the transition.
  auto embed = [](int chart, const VecX& x) {
    double s = x.squaredNorm();
    VecX u(7);
    u.head(6) = 2.0 * x / (1.0 + s);
    u[6] = (chart == 0 ? 1.0 - s : s - 1.0) / (1.0 + s);
    return u;
  };
  auto d_embed = [](int chart, const VecX& x) {
    double s = x.squaredNorm();
    double t = 1.0 + s;
    MatX Dg(7, 6);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        Dg(i, j) = 2.0 * ((i == j ? 1.0 : 0.0) / t - 2.0 * x[i] * x[j] / (t * t));
      }
      double dlast = -4.0 * x[i] / (t * t);
      Dg(6, i) = (chart == 0 ? dlast : -dlast);
    }
    return Dg;
  };

  M.metric = [](int, const VecX& x) {
    double s = x.squaredNorm();
    double lam = 4.0 / ((1.0 + s) * (1.0 + s));
    return MatX(lam * MatX::Identity(6, 6));
  };
  M.acs = [embed, d_embed](int chart, const VecX& x) {
    VecX u = embed(chart, x);
    MatX D = d_embed(chart, x);
    double s = x.squaredNorm();
    double inv_lam = (1.0 + s) * (1.0 + s) / 4.0;
    return MatX(inv_lam * D.transpose() * oct::cross_matrix(u) * D);
  };
  M.transition = [](const PointRef& p, int target) {
    if (target == p.chart) return p;
    double s = p.x.squaredNorm();
    if (s < 1e-10) throw OutOfChartError("s6_nk: transition at chart center");
    return PointRef{target, VecX(p.x / s)};
  };

  m.analytic_diameter = kPi;
  m.cut_distance = kPi;
  auto to_chart = [](const VecX& u) {
    int chart = u[6] >= 0.0 ? 0 : 1;
    double denom = 1.0 + std::abs(u[6]);
    return PointRef{chart, VecX(u.head(6) / denom)};
  };
  M.distance = [embed](const PointRef& o, const PointRef& p) {
    double w = embed(o.chart, o.x).dot(embed(p.chart, p.x));
    return std::acos(std::clamp(w, -1.0, 1.0));
  };
  M.geodesic = [embed, d_embed, to_chart](const PointRef& o, const VecX& v, double rho) {
    VecX P = embed(o.chart, o.x);
    VecX V = d_embed(o.chart, o.x) * v;
    V -= V.dot(P) * P;
    V.normalize();
    return to_chart(std::cos(rho) * P + std::sin(rho) * V);
  };
  m.embed_dim = 7;
  m.embed = [embed](const PointRef& p) { return embed(p.chart, p.x); };
  m.sample_uniform = [to_chart](RngStream& rng) {
    VecX u = rng.normal_vec(7);
    u.normalize();
    return to_chart(u);
  };
  m.sample_point = detail::box_sampler(0, VecX::Constant(6, -0.7), VecX::Constant(6, 0.7));
  return m;
}

inline Model build_hopf() {
  Model m;
  m.id = {ModelName::hopf, 2, 0.0};
  ManifoldSpec& M = m.spec;
  M.n = 2;
  M.name = "hopf";
  M.declared_class = ManifoldClass::hermitian;
  const int d = 4;
  Chart ch;
  ch.id = 0;
  ch.lo = VecX::Constant(d, -90.0);
  ch.hi = VecX::Constant(d, 90.0);
  ch.r_min = 0.01;
  M.charts = {ch};
  M.metric = [](int, const VecX& x) {
    return MatX(MatX::Identity(4, 4) / x.squaredNorm());
  };
  MatX J = detail::standard_j(2);
  M.acs = [J](int, const VecX&) { return J; };

  // g = |z|^{-2} delta is the cylinder R x S^3: t = log|z| plus the unit
  // round sphere factor; distances and geodesics split accordingly.
  m.cut_distance = kPi;  // angular factor; the R factor never cuts
  M.distance = [](const PointRef& o, const PointRef& p) {
    double ro = o.x.norm(), rp = p.x.norm();
    double dt = std::log(rp) - std::log(ro);
    double w = std::clamp(o.x.dot(p.x) / (ro * rp), -1.0, 1.0);
    double th = std::acos(w);
    return std::sqrt(dt * dt + th * th);
  };
  M.geodesic = [](const PointRef& o, const VecX& v, double rho) {
    double r = o.x.norm();
    VecX zhat = o.x / r;
    VecX u = v * (r / v.norm());             // g-unit has euclidean length r
    double a = u.dot(zhat) / r;              // dt/ds on the log-radial factor
    VecX om = (u - u.dot(zhat) * zhat) / r;  // angular velocity on S^3
    double w = om.norm();
    double t = std::log(r) + a * rho;
    VecX sph;
    if (w < 1e-14) {
      sph = zhat;
    } else {
      sph = std::cos(w * rho) * zhat + std::sin(w * rho) * (om / w);
    }
    return PointRef{0, VecX(std::exp(t) * sph)};
  };
  VecX lo(4), hi(4);
  lo << 0.7, -0.35, -0.35, -0.35;
  hi << 1.3, 0.35, 0.35, 0.35;
  m.sample_point = detail::box_sampler(0, lo, hi);
  return m;
}

inline Model build_model(const ModelId& id) {
  switch (id.name) {
    case ModelName::flat_cn:
      if (id.n < 1) throw DomainError("flat_cn: n must be >= 1");
      return build_flat(id.n);
    case ModelName::cpn_fs:
      if (id.n < 1) throw DomainError("cpn_fs: n must be >= 1");
      return build_cpn(id.n, id.K);
    case ModelName::chn_ball:
      if (id.n < 1) throw DomainError("chn_ball: n must be >= 1");
      return build_chn(id.n, id.K);
    case ModelName::s6_nk: return build_s6();
    default: return build_hopf();
  }
}

// Exact model distance; throws beyond the cut locus, sets *at_cut at it.
inline double analytic_distance(const Model& m, const PointRef& o, const PointRef& p,
                                bool* at_cut = nullptr) {
  if (!m.spec.distance) throw DomainError(m.spec.name + ": no analytic distance");
  double rho = m.spec.distance(o, p);
  bool cut = rho >= m.cut_distance - 1e-9;
  if (at_cut) *at_cut = cut;
  if (rho > m.cut_distance + 1e-9) {
    throw CutLocusError(m.spec.name + ": point beyond cut locus");
  }
  return rho;
}

// Random g-unit real tangent vector at p.
inline VecX random_unit_tangent(const ManifoldSpec& M, const PointRef& p, RngStream& rng) {
  VecX u = rng.normal_vec(M.real_dim());
  MatX g = M.g_at(p);
  double nrm = std::sqrt(u.dot(g * u));
  return u / nrm;
}

}  // namespace ahg
