#pragma once

#include <optional>

#include "ahg/manifold.hpp"

namespace ahg {

// Frame index convention: a in {0..2n-1}; a < n is e_{a+1} (type (1,0)),
// a >= n is the conjugate \bar e_{a-n+1} (type (0,1)).
inline int bar(int a, int n) { return (a + n) % (2 * n); }
inline bool is_barred(int a, int n) { return a >= n; }
// +1 on (1,0) indices, -1 on (0,1): J e_a = i * eps(a) * e_a.
inline int eps(int a, int n) { return is_barred(a, n) ? -1 : +1; }

// Complex-bilinear extension of g.
inline cplx g_bilinear(const MatX& g, const CVecX& a, const CVecX& b) {
  return a.transpose() * g * b;
}
// Hermitian pairing <a, \bar b> = g_C(a, conj(b)); positive definite on (1,0).
inline cplx g_herm(const MatX& g, const CVecX& a, const CVecX& b) {
  return a.transpose() * g * b.conjugate();
}

// Local (1,0)-frame e_1..e_n at a point: J e_i = i e_i, <e_i, \bar e_j> = delta_ij.
struct UnitaryFrame {
  PointRef base;
  CMatX vectors;  // 2n x n, column i = e_{i+1} in complexified chart coordinates
};

// Deterministic smooth frame field around a base point: the coordinate basis
// is projected onto the (1,0) eigenspace by (I - iJ)/2 and orthonormalized by
// Gram-Schmidt in a fixed pivot order. The pivot set is chosen once at the
// base point and reused at stencil points, which keeps the field smooth near
// the base and bit-reproducible.
class FrameField {
 public:
  FrameField(const ManifoldSpec& M, const PointRef& base,
             std::optional<VecX> seed = std::nullopt)
      : M_(&M), chart_(base.chart), seed_(std::move(seed)) {
    const int d = M.real_dim();
    if (seed_ && seed_->norm() == 0.0) {
      throw DomainError(M.name + ": zero seed vector for frame construction");
    }
    if (seed_ && seed_->size() != d) {
      throw DomainError(M.name + ": seed dimension mismatch");
    }
    choose_pivots(base.x);
  }

  int chart() const { return chart_; }
  const ManifoldSpec& manifold() const { return *M_; }

  // Frame at chart coordinates x (columns e_1..e_n).
  CMatX operator()(const VecX& x) const {
    MatX g = M_->metric(chart_, x);
    MatX J = M_->acs(chart_, x);
    return build(g, J, x, nullptr);
  }

 private:
  static CVecX project_10(const MatX& J, const VecX& u) {
    const int d = static_cast<int>(u.size());
    CVecX v(d);
    VecX Ju = J * u;
    for (int i = 0; i < d; ++i) v[i] = cplx(u[i], -Ju[i]);
    return 0.5 * v;
  }

  // Gram-Schmidt over the seed (if any) followed by projected coordinate
  // vectors in pivot order. Two passes keep orthogonality near machine eps.
  CMatX build(const MatX& g, const MatX& J, const VecX& x,
              std::vector<int>* pivots_out) const {
    const int d = M_->real_dim();
    const int n = M_->n;
    CMatX E(d, n);
    int have = 0;

    auto orthonormalize = [&](CVecX v, double rel_floor) -> bool {
      double orig = std::sqrt(std::abs(g_herm(g, v, v)));
      for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < have; ++j) {
          cplx c = g_herm(g, v, E.col(j));
          v -= c * E.col(j);
        }
      }
      double nrm2 = std::real(g_herm(g, v, v));
      if (nrm2 <= rel_floor * rel_floor * orig * orig || nrm2 <= 0.0) return false;
      E.col(have++) = v / std::sqrt(nrm2);
      return true;
    };

    if (seed_) {
      CVecX v = project_10(J, *seed_);
      if (!orthonormalize(v, 1e-10)) {
        throw FrameConstructionError(M_->name + ": degenerate seed projection in chart " +
                                     std::to_string(chart_));
      }
    }

    if (pivots_out) {
      for (int k = 0; k < d && have < n; ++k) {
        VecX u = VecX::Zero(d);
        u[k] = 1.0;
        int before = have;
        if (orthonormalize(project_10(J, u), 1e-3) && have > before) {
          pivots_out->push_back(k);
        }
      }
    } else {
      for (int k : pivots_) {
        VecX u = VecX::Zero(d);
        u[k] = 1.0;
        if (!orthonormalize(project_10(J, u), 1e-8)) {
          throw FrameConstructionError(M_->name + ": pivot " + std::to_string(k) +
                                       " degenerated away from base point in chart " +
                                       std::to_string(chart_));
        }
      }
    }
    if (have != n) {
      throw FrameConstructionError(M_->name + ": rank-deficient (1,0) projection at chart " +
                                   std::to_string(chart_) + ", point [" +
                                   std::to_string(x[0]) + ", ...]");
    }
    return E;
  }

  void choose_pivots(const VecX& x) {
    MatX g = M_->metric(chart_, x);
    MatX J = M_->acs(chart_, x);
    pivots_.clear();
    build(g, J, x, &pivots_);
  }

  const ManifoldSpec* M_;
  int chart_;
  std::optional<VecX> seed_;
  std::vector<int> pivots_;
};

inline UnitaryFrame unitary_frame_at(const ManifoldSpec& M, const PointRef& p,
                                     std::optional<VecX> seed = std::nullopt) {
  M.require_in_chart(p);
  FrameField ff(M, p, std::move(seed));
  return UnitaryFrame{p, ff(p.x)};
}

// Residual of <e_i, \bar e_j> = delta_ij and of J e_i = i e_i.
inline double frame_unitarity_residual(const ManifoldSpec& M, const PointRef& p,
                                       const UnitaryFrame& F) {
  MatX g = M.g_at(p), J = M.j_at(p);
  const int n = M.n;
  double r = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cplx h = g_herm(g, F.vectors.col(i), F.vectors.col(j));
      r = std::max(r, std::abs(h - (i == j ? 1.0 : 0.0)));
    }
    CVecX Je = J * F.vectors.col(i);
    r = std::max(r, (Je - cplx(0, 1) * F.vectors.col(i)).cwiseAbs().maxCoeff());
  }
  return r;
}

// Frame coefficients of a complexified tangent vector: V = V^a e_a with
// V^i = g_C(V, \bar e_i) and V^{\bar i} = g_C(V, e_i).
inline CVecX frame_components(const MatX& g, const CMatX& E, const CVecX& V) {
  const int n = static_cast<int>(E.cols());
  CVecX c(2 * n);
  for (int i = 0; i < n; ++i) {
    c[i] = g_bilinear(g, V, E.col(i).conjugate());
    c[i + n] = g_bilinear(g, V, E.col(i));
  }
  return c;
}

// Full 2n-column complexified frame [e_1..e_n, conj(e_1)..conj(e_n)].
inline CMatX full_frame(const CMatX& E) {
  CMatX F(E.rows(), 2 * E.cols());
  F.leftCols(E.cols()) = E;
  F.rightCols(E.cols()) = E.conjugate();
  return F;
}

}  // namespace ahg
