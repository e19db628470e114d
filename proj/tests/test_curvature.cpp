#include <gtest/gtest.h>

#include "ahg/curvature.hpp"
#include "ahg/models.hpp"

using namespace ahg;

namespace {
struct GeomAt {
  Model m;
  PointRef p;
  ConnectionCoeffs can;
  CurvatureTensor R;
  TorsionTensor t;
};

GeomAt at_point(Model m, uint64_t seed) {
  RngStream rng(seed);
  PointRef p = m.sample_point(rng);
  auto field = make_field(m.spec, p);
  ConnectionCoeffs can = canonical_coeffs(m.spec, p, field);
  CurvatureTensor R = curvature_at(m.spec, p, can);
  TorsionTensor t = torsion_at(m.spec, p, can);
  return {std::move(m), p, std::move(can), std::move(R), std::move(t)};
}
}  // namespace

TEST(Curvature, FlatVanishes) {
  GeomAt s = at_point(build_flat(2), 21);
  double r = 0;
  for (const cplx& z : s.R.R) r = std::max(r, std::abs(z));
  EXPECT_LE(r, 1e-8);
}

TEST(Curvature, SpaceFormTensorOnCPn) {
  // R_{i bj k bl} = K ( delta_ij delta_kl + delta_il delta_kj )
  for (double K : {1.0, 2.0}) {
    GeomAt s = at_point(build_cpn(2, K), 22);
    int n = 2;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double expect = K * ((i == j && k == l ? 1.0 : 0.0) +
                                 (i == l && k == j ? 1.0 : 0.0));
            EXPECT_NEAR(std::abs(s.R.at(i, j + n, k, l + n) - expect), 0.0, 1e-5)
                << "K=" << K << " ijkl=" << i << j << k << l;
          }
  }
}

TEST(Curvature, SpaceFormTensorOnCHn) {
  GeomAt s = at_point(build_chn(2, -1.0), 23);
  int n = 2;
  double K = -1.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double expect =
              K * ((i == j && k == l ? 1.0 : 0.0) + (i == l && k == j ? 1.0 : 0.0));
          EXPECT_NEAR(std::abs(s.R.at(i, j + n, k, l + n) - expect), 0.0, 1e-5);
        }
}

TEST(Curvature, AntisymmetryAndConjugation) {
  for (Model m : {build_cpn(2, 1.0), build_s6(), build_hopf()}) {
    GeomAt s = at_point(std::move(m), 24);
    EXPECT_LE(curvature_antisymmetry_residual(s.R), 1e-6) << s.m.spec.name;
    EXPECT_LE(curvature_conjugation_residual(s.R), 1e-10) << s.m.spec.name;
    EXPECT_LE(curvature_type_residual(s.R), 1e-6) << s.m.spec.name;
  }
}

TEST(Torsion, KaehlerModelsTorsionFree) {
  for (Model m : {build_cpn(2, 1.0), build_chn(1, -1.0), build_flat(3)}) {
    GeomAt s = at_point(std::move(m), 25);
    EXPECT_LE(max_torsion_norm(s.t), 1e-7) << s.m.spec.name;
  }
}

TEST(Torsion, S6NearlyKaehlerStructure) {
  GeomAt s = at_point(build_s6(), 26);
  int n = 3;
  // tau^k_{ij} = 0
  double r20 = 0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r20 = std::max(r20, std::abs(s.t.T(k, i, j)));
  EXPECT_LE(r20, 1e-6);
  // cyclic symmetry tau^{bar k}_{ij} = tau^{bar i}_{jk}
  double rcyc = 0, mag = 0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        rcyc = std::max(rcyc, std::abs(s.t.T(k + n, i, j) - s.t.T(i + n, j, k)));
        mag = std::max(mag, std::abs(s.t.T(k + n, i, j)));
      }
  EXPECT_LE(rcyc, 1e-6);
  // totally antisymmetric with |tau^{bar k}_{ij}| = sqrt(2) on distinct triples
  EXPECT_NEAR(mag, std::sqrt(2.0), 1e-5);
  // sum_{lam mu} tau^{bar i}_{lam mu} tau^j_{bar lam bar mu} = 4 delta_ij
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx sum = 0;
      for (int l = 0; l < n; ++l)
        for (int mu = 0; mu < n; ++mu)
          sum += s.t.T(i + n, l, mu) * s.t.T(j, l + n, mu + n);
      EXPECT_NEAR(std::abs(sum - (i == j ? 4.0 : 0.0)), 0.0, 1e-4) << i << j;
    }
}

TEST(Torsion, HopfHermitianStructure) {
  GeomAt s = at_point(build_hopf(), 27);
  int n = 2;
  // integrable J: (0,2)-part tau^{bar k}_{ij} vanishes
  double r02 = 0, r20 = 0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        r02 = std::max(r02, std::abs(s.t.T(k + n, i, j)));
        r20 = std::max(r20, std::abs(s.t.T(k, i, j)));
      }
  EXPECT_LE(r02, 1e-6);
  EXPECT_GT(r20, 0.3);  // Chern torsion of g = |z|^{-2} delta has unit size
}

TEST(Ricci, S6PaperConstants) {
  GeomAt s = at_point(build_s6(), 28);
  CMatX rl = ricci_at(s.m.spec, s.p, RicciKind::levi_civita);
  CMatX r1 = ricci_first(s.R);
  CMatX r2 = ricci_second(s.R);
  CMatX rq = ricci_quasi(s.R, s.t);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double d = (i == j) ? 1.0 : 0.0;
      EXPECT_NEAR(std::abs(rl(i, j) - 5.0 * d), 0.0, 1e-4) << "RL " << i << j;
      EXPECT_NEAR(std::abs(r1(i, j)), 0.0, 1e-4);
      EXPECT_NEAR(std::abs(r2(i, j)), 0.0, 1e-4);
      EXPECT_NEAR(std::abs(rq(i, j) - 3.0 * d), 0.0, 1e-4) << "quasi " << i << j;
    }
}

TEST(Ricci, QuasiRequiresQuasiKaehler) {
  Model m = build_hopf();
  RngStream rng(29);
  PointRef p = m.sample_point(rng);
  EXPECT_THROW(ricci_at(m.spec, p, RicciKind::quasi), ClassificationError);
}

TEST(QH, ConstantOnCPn) {
  Model m = build_cpn(2, 1.0);
  RngStream rng(30);
  for (int k = 0; k < 3; ++k) {
    PointRef p = m.sample_point(rng);
    VecX X = random_unit_tangent(m.spec, p, rng);
    EXPECT_NEAR(qh_sectional(m.spec, p, X), 2.0, 1e-4);
  }
}

TEST(QH, S6ConstantAndAtMostOne) {
  Model m = build_s6();
  RngStream rng(31);
  double lo = 1e9, hi = -1e9;
  for (int k = 0; k < 6; ++k) {
    PointRef p = m.sample_point(rng);
    VecX X = random_unit_tangent(m.spec, p, rng);
    double q = qh_sectional(m.spec, p, X);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  EXPECT_LE(hi - lo, 1e-3);       // homogeneity
  EXPECT_LE(hi, 1.0 + 1e-3);      // diameter-pi consistency
  EXPECT_NEAR(lo, 1.0, 1e-3);     // the measured constant on the unit S^6
}

TEST(QH, FrameCompletionIndependence) {
  // QH(X) must not depend on the completion e_2..e_n; re-run with a frame
  // whose completion comes from a different pivot set by rotating the seed
  // problem: compare against direct tensor evaluation in an unseeded frame.
  Model m = build_s6();
  RngStream rng(32);
  PointRef p = m.sample_point(rng);
  VecX X = random_unit_tangent(m.spec, p, rng);
  double qh1 = qh_sectional(m.spec, p, X);

  // independent route: unseeded frame, contract tensors with X's components
  auto field = make_field(m.spec, p);
  ConnectionCoeffs can = canonical_coeffs(m.spec, p, field);
  CurvatureTensor R = curvature_at(m.spec, p, can);
  TorsionTensor t = torsion_at(m.spec, p, can);
  MatX g = m.spec.g_at(p);
  MatX J = m.spec.j_at(p);
  CMatX E = (*field)(p.x);
  CVecX e1(6);
  VecX JX = J * X;
  for (int i = 0; i < 6; ++i) e1[i] = cplx(X[i], -JX[i]) / std::sqrt(2.0);
  CVecX comp = frame_components(g, E, e1);
  CVecX Xf = comp.head(3);
  // QH via the invariant form R(X,bX,X,bX) - sum over any unitary completion:
  // use the identity QH(X) = R_{1b11b1} - sum_{i>=2}|tau^1_{i1}+tau^{b1}_{i1}|^2
  // evaluated through tensors (completion-free contraction of the tau part
  // needs the full frame; here we rotate components into a basis with first
  // vector Xf and compare).
  // Build a unitary n x n matrix with first column Xf.
  int n = 3;
  CMatX U = CMatX::Identity(n, n);
  U.col(0) = Xf;
  // Gram-Schmidt the rest
  for (int c = 1; c < n; ++c) {
    CVecX v = U.col(c);
    for (int b = 0; b < c; ++b) v -= U.col(b).dot(v) * U.col(b);
    U.col(c) = v / v.norm();
  }
  // rotated components: e'_a = sum_b U_{ba} e_b
  auto Rrot = [&](int a, int b, int c, int d) {
    cplx s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            s += R.at(i, j + n, k, l + n) * U(i, a) * std::conj(U(j, b)) * U(k, c) *
                 std::conj(U(l, d));
    return s;
  };
  auto Trot = [&](bool barred, int a, int b, int c) {
    cplx s = 0;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          // upper (1,0) index pulls conj(U); upper (0,1) index pulls U
          cplx comp_t = barred ? t.T(k + n, i, j) : t.T(k, i, j);
          s += comp_t * (barred ? U(k, a) : std::conj(U(k, a))) * U(i, b) * U(j, c);
        }
    return s;
  };
  double qh2 = Rrot(0, 0, 0, 0).real();
  for (int i = 1; i < n; ++i) qh2 -= std::norm(Trot(false, 0, i, 0) + Trot(true, 0, i, 0));
  EXPECT_NEAR(qh1, qh2, 1e-8);
}

TEST(QuasiBisectional, ConstantOnKaehlerSpaceForm) {
  Model m = build_cpn(2, 1.5);
  RngStream rng(33);
  PointRef p = m.sample_point(rng);
  for (int k = 0; k < 5; ++k) {
    CVecX X = rng.normal_cvec(2), Y = rng.normal_cvec(2);
    EXPECT_NEAR(quasi_bisectional(m.spec, p, X, Y), 1.5, 1e-4);
  }
}

TEST(QuasiBisectional, ScalingInvariance) {
  Model m = build_s6();
  RngStream rng(34);
  PointRef p = m.sample_point(rng);
  auto field = make_field(m.spec, p);
  ConnectionCoeffs can = canonical_coeffs(m.spec, p, field);
  CurvatureTensor R = curvature_at(m.spec, p, can);
  TorsionTensor t = torsion_at(m.spec, p, can);
  CVecX X = rng.normal_cvec(3), Y = rng.normal_cvec(3);
  double r1 = quasi_bisectional_ratio(R, t, X, Y);
  double r2 = quasi_bisectional_ratio(R, t, CVecX(2.7 * X), Y);
  EXPECT_NEAR(r1, r2, 1e-12);
}

TEST(Bounds, FlatAllZero) {
  Model m = build_flat(2);
  RngStream rng(35);
  std::vector<PointRef> region;
  for (int i = 0; i < 3; ++i) region.push_back(m.sample_point(rng));
  CurvatureBounds b = estimate_bounds(m.spec, region, 16, 99);
  EXPECT_NEAR(b.K_lower, 0.0, 1e-7);
  EXPECT_NEAR(b.A1, 0.0, 1e-7);
  EXPECT_NEAR(b.A2, 0.0, 1e-7);
}

TEST(Bounds, CPnSpaceFormValues) {
  Model m = build_cpn(2, 1.0);
  RngStream rng(36);
  std::vector<PointRef> region = {m.sample_point(rng), m.sample_point(rng)};
  CurvatureBounds b = estimate_bounds(m.spec, region, 64, 7);
  EXPECT_NEAR(b.K_lower, 1.0, 1e-3);
  EXPECT_NEAR(b.A1, 0.0, 1e-6);
  EXPECT_NEAR(b.A2, 0.0, 1e-6);
}

TEST(Bounds, HopfDeterministicWithPositiveTorsion) {
  Model m = build_hopf();
  RngStream rng(37);
  std::vector<PointRef> region = {m.sample_point(rng)};
  CurvatureBounds b1 = estimate_bounds(m.spec, region, 48, 11);
  CurvatureBounds b2 = estimate_bounds(m.spec, region, 48, 11);
  EXPECT_EQ(b1.K_lower, b2.K_lower);
  EXPECT_EQ(b1.A1, b2.A1);
  EXPECT_EQ(b1.A2, b2.A2);
  // analytic max: tau(X,Y) = [(bz.Y)X - (bz.X)Y]/|z|^2 over unit (1,0) pairs
  // peaks at sqrt(2) for g = |z|^{-2} delta
  EXPECT_NEAR(b1.A1, std::sqrt(2.0), 2e-3);
  EXPECT_TRUE(b1.refined);
}

TEST(Bounds, MonotoneInSampleCount) {
  Model m = build_hopf();
  RngStream rng(38);
  std::vector<PointRef> region = {m.sample_point(rng)};
  CurvatureBounds small = estimate_bounds(m.spec, region, 8, 3);
  CurvatureBounds big = estimate_bounds(m.spec, region, 32, 3);
  // prefix property: more samples can only widen the ranges before polish;
  // polish only improves further, so the ordering still holds
  EXPECT_LE(big.K_lower, small.K_lower + 1e-12);
  EXPECT_GE(big.A1, small.A1 - 1e-12);
  EXPECT_GE(big.A2, small.A2 - 1e-12);
}

TEST(Bounds, EmptyRegionRejected) {
  Model m = build_flat(1);
  EXPECT_THROW(estimate_bounds(m.spec, {}, 8, 1), DomainError);
}
