#include <gtest/gtest.h>

#include "ahg/spectral.hpp"

using namespace ahg;

TEST(Laplacian, FlatQuadratic) {
  // Laplace-Beltrami of |z|^2 = sum (x^2 + y^2) on flat C^n is 4n
  Model m = build_flat(2);
  RngStream rng(201);
  PointRef p = m.sample_point(rng);
  ScalarField f = [](const VecX& x) { return x.squaredNorm(); };
  EXPECT_NEAR(laplacian_at(m.spec, p, f), 8.0, 1e-8);
  // harmonic coordinate function
  ScalarField h = [](const VecX& x) { return x[0]; };
  EXPECT_NEAR(laplacian_at(m.spec, p, h), 0.0, 1e-9);
}

TEST(Laplacian, Linearity) {
  Model m = build_cpn(2, 1.0);
  RngStream rng(202);
  PointRef p = m.sample_point(rng);
  ScalarField f = [](const VecX& x) { return std::sin(x[0]) * x[1]; };
  ScalarField g = [](const VecX& x) { return x[2] * x[2] + 0.3 * x[3]; };
  ScalarField combo = [&](const VecX& x) { return 2.0 * f(x) - 0.7 * g(x); };
  double lf = laplacian_at(m.spec, p, f);
  double lg = laplacian_at(m.spec, p, g);
  double lc = laplacian_at(m.spec, p, combo);
  EXPECT_NEAR(lc, 2.0 * lf - 0.7 * lg, 1e-9 * (1.0 + std::abs(lc)));
}

TEST(Laplacian, CanonicalEqualsLeviCivitaOnQuasiKaehler) {
  for (Model m : {build_cpn(2, 1.0), build_s6()}) {
    RngStream rng(203);
    PointRef p = m.sample_point(rng);
    ScalarField f = [](const VecX& x) { return std::sin(x[0]) + 0.4 * x[1] * x[2]; };
    double dc = laplacian_at(m.spec, p, f, ConnectionKind::canonical);
    double dl = laplacian_at(m.spec, p, f, ConnectionKind::levi_civita);
    EXPECT_LE(std::abs(dc - dl), 1e-6) << m.spec.name;
  }
}

TEST(Laplacian, HopfGapMatchesTorsionTrace) {
  // Delta f - Delta_L f = tau^i_{i lam} f_{blam} + conj on the Hermitian model
  Model m = build_hopf();
  RngStream rng(204);
  PointRef p = m.sample_point(rng);
  ScalarField f = [](const VecX& x) { return x[0] * x[2] + std::log(x.squaredNorm()); };
  double dc = laplacian_at(m.spec, p, f, ConnectionKind::canonical);
  double dl = laplacian_at(m.spec, p, f, ConnectionKind::levi_civita);

  auto field = make_field(m.spec, p);
  ConnectionCoeffs can = canonical_coeffs(m.spec, p, field);
  TorsionTensor t = torsion_at(m.spec, p, can);
  ScalarJet jet = scalar_jet(f, p.x, m.spec.fd);
  CVecX grad = frame_gradient((*field)(p.x), jet.df);
  cplx rhs = 0;
  for (int i = 0; i < 2; ++i)
    for (int lam = 0; lam < 2; ++lam)
      rhs += t.T(i, i, lam) * grad[lam + 2] + t.T(i + 2, i + 2, lam + 2) * grad[lam];
  EXPECT_LE(std::abs(dc - dl - rhs.real()), 1e-5);
  EXPECT_GT(std::abs(dc - dl), 1e-3);  // the gap is genuinely nonzero here
}

TEST(Eigenfunction, S6FirstHarmonics) {
  Model m = build_s6();
  RngStream rng(205);
  std::vector<PointRef> pts;
  for (int i = 0; i < 25; ++i) pts.push_back(m.sample_point(rng));
  for (int coord : {0, 3, 6}) {
    ScalarField f = [&m, coord](const VecX& x) { return m.embed(PointRef{0, x})[coord]; };
    ResidualReport rep = check_eigenfunction(m.spec, f, 6.0, pts);
    EXPECT_LE(rep.max_residual, 1e-5) << "coord " << coord;
  }
}

TEST(Eigenfunction, ConstantIsHarmonic) {
  Model m = build_cpn(1, 1.0);
  RngStream rng(206);
  std::vector<PointRef> pts = {m.sample_point(rng), m.sample_point(rng)};
  ScalarField f = [](const VecX&) { return 3.7; };
  ResidualReport rep = check_eigenfunction(m.spec, f, 0.0, pts, 1e-10);
  EXPECT_LE(rep.max_residual, 1e-10);
}

TEST(Eigenfunction, FlatLinearHarmonic) {
  Model m = build_flat(2);
  RngStream rng(207);
  std::vector<PointRef> pts = {m.sample_point(rng)};
  ScalarField f = [](const VecX& x) { return x[0]; };
  ResidualReport rep = check_eigenfunction(m.spec, f, 0.0, pts, 1e-9);
  EXPECT_LE(rep.max_residual, 1e-9);
}

TEST(Rayleigh, S6ExactEigenfunction) {
  Model m = build_s6();
  TestFunction x1;
  x1.terms.push_back({1.0, {0, -1, -1}});
  RayleighEstimate est = rayleigh_quotient(m, x1, 20000, 31);
  EXPECT_NEAR(est.value, 6.0, 3.0 * est.sigma + 5e-3);
  EXPECT_LT(est.sigma, 0.1);
}

TEST(Rayleigh, VariationalLowerBound) {
  // perturbed harmonic stays above lambda_1 = 6 up to MC error
  Model m = build_s6();
  TestFunction f;
  f.terms.push_back({1.0, {0, -1, -1}});
  f.terms.push_back({0.3, {1, 2, -1}});
  RayleighEstimate est = rayleigh_quotient(m, f, 20000, 32);
  EXPECT_GE(est.value, 6.0 - 3.0 * est.sigma);
}

TEST(Rayleigh, DegreeTwoHarmonicHitsFourteen) {
  // x1^2 mean-adjusted lies in the lambda = 14 eigenspace of S^6
  Model m = build_s6();
  TestFunction f;
  f.terms.push_back({1.0, {0, 0, -1}});
  RayleighEstimate est = rayleigh_quotient(m, f, 40000, 33);
  EXPECT_GE(est.value, 6.0 - 3.0 * est.sigma);
  EXPECT_NEAR(est.value, 14.0, 3.0 * est.sigma + 0.05);
}

TEST(Rayleigh, ScaleInvariantAndReproducible) {
  Model m = build_s6();
  TestFunction f;
  f.terms.push_back({0.8, {0, 1, -1}});
  RayleighEstimate a = rayleigh_quotient(m, f, 5000, 34);
  RayleighEstimate b = rayleigh_quotient(m, f, 5000, 34);
  EXPECT_EQ(a.value, b.value);  // fixed seed => identical estimate
  TestFunction cf = f;
  for (auto& t : cf.terms) t.coeff *= 3.0;
  RayleighEstimate c = rayleigh_quotient(m, cf, 5000, 34);
  EXPECT_NEAR(c.value, a.value, 1e-12 * std::abs(a.value));
}

TEST(Rayleigh, ConstantRejected) {
  Model m = build_s6();
  TestFunction f;  // empty polynomial = 0
  EXPECT_THROW(rayleigh_quotient(m, f, 1000, 35), DomainError);
}

TEST(EigenvalueBound, S6SharpAtSix) {
  Model m = build_s6();
  RngStream rng(208);
  std::vector<PointRef> pts = {m.sample_point(rng), m.sample_point(rng)};
  double K = quasi_ricci_lower_bound(m, pts);
  EXPECT_NEAR(K, 3.0, 1e-4);
  EigenvalueBoundReport rep = verify_eigenvalue_bound(m, 8000, 12, 77, K);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.sharp);
  EXPECT_NEAR(rep.sharp_value, 6.0, 3.0 * rep.sharp_sigma + 5e-3);
}

TEST(EigenvalueBound, CP1RoundSphere) {
  // CP^1 with K0 = 1 is the round sphere of Gauss curvature 2; quasi Ricci
  // = 2K0 = 2 and lambda_1 = 4K0 = 2 * quasi-Ricci-bound, sharp.
  Model m = build_cpn(1, 1.0);
  RngStream rng(209);
  std::vector<PointRef> pts = {m.sample_point(rng), m.sample_point(rng)};
  double K = quasi_ricci_lower_bound(m, pts);
  EXPECT_NEAR(K, 2.0, 1e-4);
  EigenvalueBoundReport rep = verify_eigenvalue_bound(m, 8000, 10, 78, K);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.sharp);
}

TEST(EigenvalueBound, NonCompactRejected) {
  Model m = build_hopf();
  EXPECT_THROW(verify_eigenvalue_bound(m, 100, 2, 1, 1.0), GeometryError);
}
