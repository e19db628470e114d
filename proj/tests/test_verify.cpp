#include <gtest/gtest.h>

#include "ahg/verify.hpp"

using namespace ahg;

namespace {
ScalarField smooth_f() {
  return [](const VecX& x) {
    double s = 0.7 * x[0] + std::sin(x[1]) + 0.3 * x[0] * x[1];
    if (x.size() > 2) s += 0.2 * x[2] * x[2] - 0.1 * std::cos(x[3]);
    return s;
  };
}
VectorField smooth_x() {
  VectorField X;
  X.components = [](const VecX& x) {
    VecX v = VecX::Zero(x.size());
    v[0] = 1.0 + 0.2 * x[1];
    v[1] = x[0] * 0.5;
    if (x.size() > 2) v[2] = 0.3 * std::sin(x[0]);
    return v;
  };
  return X;
}
}  // namespace

TEST(Bianchi, FlatAllFourVanish) {
  Model m = build_flat(2);
  RngStream rng(41);
  PointRef p = m.sample_point(rng);
  auto reps = check_bianchi(m.spec, p);
  for (const auto& r : reps) EXPECT_LE(r.max_residual, 1e-8) << r.identity_id;
}

TEST(Bianchi, HoldsOnCurvedModels) {
  for (Model m : {build_cpn(2, 1.0), build_chn(2, -1.0), build_s6(), build_hopf()}) {
    RngStream rng(42);
    for (int k = 0; k < 2; ++k) {
      PointRef p = m.sample_point(rng);
      auto reps = check_bianchi(m.spec, p);
      for (const auto& r : reps)
        EXPECT_LE(r.max_residual, 1e-5) << m.spec.name << " " << r.identity_id;
    }
  }
}

TEST(Bianchi, S6Identity4BothSidesSmall) {
  // nearly Kaehler: R_{i bj k l} = 0, so identity (4) holds with both sides
  // individually small
  Model m = build_s6();
  RngStream rng(43);
  PointRef p = m.sample_point(rng);
  BianchiContext ctx = bianchi_context(m.spec, p);
  double lhs_max = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          lhs_max = std::max(lhs_max, std::abs(ctx.R.at(i, j + 3, k, l)));
  EXPECT_LE(lhs_max, 1e-5);
}

TEST(RicciIdentity, FlatPolynomial) {
  Model m = build_flat(2);
  RngStream rng(44);
  PointRef p = m.sample_point(rng);
  ScalarField f = [](const VecX& x) { return x[0] * x[0] * x[1] + 0.5 * x[2] * x[3]; };
  auto reps = check_ricci_identity(m.spec, p, f);
  EXPECT_LE(reps[0].max_residual, 1e-9);
  EXPECT_LE(reps[1].max_residual, 1e-9);
  EXPECT_LE(reps[2].max_residual, 1e-7);
}

TEST(RicciIdentity, KaehlerSymmetricHessian) {
  Model m = build_cpn(2, 1.0);
  RngStream rng(45);
  PointRef p = m.sample_point(rng);
  auto reps = check_ricci_identity(m.spec, p, smooth_f());
  for (const auto& r : reps) EXPECT_LE(r.max_residual, r.tolerance) << r.identity_id;
}

TEST(RicciIdentity, S6AmbientCoordinate) {
  Model m = build_s6();
  RngStream rng(46);
  PointRef p = m.sample_point(rng);
  auto embed = m.embed;
  ScalarField f = [embed, p](const VecX& x) { return embed(PointRef{p.chart, x})[0]; };
  auto reps = check_ricci_identity(m.spec, p, f);
  for (const auto& r : reps) EXPECT_LE(r.max_residual, r.tolerance) << r.identity_id;
}

TEST(RicciIdentity, HopfTorsionTermRequired) {
  // on hopf the (2,0) Hessian is asymmetric; the torsion term is what closes
  // the identity, so check it is genuinely nonzero for some f
  Model m = build_hopf();
  RngStream rng(47);
  PointRef p = m.sample_point(rng);
  // generic probe; radial functions like log|z|^2 have symmetric (2,0) part
  ScalarField f = [](const VecX& x) { return x[0] * x[3] + x[1]; };
  auto field = make_field(m.spec, p);
  ConnectionCoeffs can = canonical_coeffs(m.spec, p, field);
  CMatX H = covariant_hessian(m.spec, p, f, can);
  double asym = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) asym = std::max(asym, std::abs(H(i, j) - H(j, i)));
  EXPECT_GT(asym, 1e-3);
  auto reps = check_ricci_identity(m.spec, p, f);
  for (const auto& r : reps) EXPECT_LE(r.max_residual, r.tolerance) << r.identity_id;
}

TEST(ConnectionComparisons, FlatAllGapsVanish) {
  Model m = build_flat(2);
  RngStream rng(48);
  PointRef p = m.sample_point(rng);
  auto reps = check_connection_comparisons(m.spec, p, smooth_f(), smooth_x());
  for (const auto& r : reps) EXPECT_LE(r.max_residual, 1e-8) << r.identity_id;
}

TEST(ConnectionComparisons, QuasiKaehlerCollapse) {
  for (Model m : {build_cpn(2, 1.0), build_s6()}) {
    RngStream rng(49);
    PointRef p = m.sample_point(rng);
    auto reps = check_connection_comparisons(m.spec, p, smooth_f(), smooth_x());
    for (const auto& r : reps)
      EXPECT_LE(r.max_residual, r.tolerance) << m.spec.name << " " << r.identity_id;
  }
}

TEST(ConnectionComparisons, HopfLogPotential) {
  Model m = build_hopf();
  RngStream rng(50);
  PointRef p = m.sample_point(rng);
  ScalarField f = [](const VecX& x) { return std::log(x.squaredNorm()); };
  auto reps = check_connection_comparisons(m.spec, p, f, smooth_x());
  for (const auto& r : reps)
    EXPECT_LE(r.max_residual, r.tolerance) << r.identity_id;
  // the Laplacian gap itself is nonzero on hopf for log|z|^2? It is harmonic
  // for the Levi-Civita cylinder metric in the radial factor; use a different
  // probe: the (1,1) Hessian gap formula right-hand side must be nonzero for
  // generic f
  ConnectionCoeffs can = canonical_coeffs(m.spec, p);
  TorsionTensor t = torsion_at(m.spec, p, can);
  EXPECT_GT(max_torsion_norm(t), 0.3);
}

TEST(Classify, CatalogModelsMatchDeclaredTags) {
  std::vector<std::pair<Model, ManifoldClass>> cases;
  cases.emplace_back(build_flat(2), ManifoldClass::kaehler);
  cases.emplace_back(build_cpn(2, 1.0), ManifoldClass::kaehler);
  cases.emplace_back(build_chn(1, -1.0), ManifoldClass::kaehler);
  cases.emplace_back(build_s6(), ManifoldClass::nearly_kaehler);
  cases.emplace_back(build_hopf(), ManifoldClass::hermitian);
  for (auto& [m, expected] : cases) {
    RngStream rng(51);
    std::vector<PointRef> pts;
    for (int i = 0; i < 4; ++i) pts.push_back(m.sample_point(rng));
    Classification c = classify(m.spec, pts);
    EXPECT_EQ(to_string(c.cls), std::string(to_string(expected))) << m.spec.name;
    EXPECT_EQ(c.cls, m.spec.declared_class) << m.spec.name;
  }
}

TEST(Classify, SampleOrderIndependent) {
  Model m = build_s6();
  RngStream rng(52);
  std::vector<PointRef> pts;
  for (int i = 0; i < 4; ++i) pts.push_back(m.sample_point(rng));
  Classification a = classify(m.spec, pts);
  std::reverse(pts.begin(), pts.end());
  Classification b = classify(m.spec, pts);
  EXPECT_EQ(a.cls, b.cls);
  EXPECT_DOUBLE_EQ(a.r_total, b.r_total);
}

TEST(Kirichenko, S6ParallelTorsion) {
  Model m = build_s6();
  RngStream rng(53);
  std::vector<PointRef> pts = {m.sample_point(rng), m.sample_point(rng)};
  ResidualReport r = check_kirichenko(m.spec, pts);
  EXPECT_LE(r.max_residual, 1e-5);
}

TEST(Kirichenko, KaehlerTrivial) {
  Model m = build_cpn(1, 1.0);
  RngStream rng(54);
  std::vector<PointRef> pts = {m.sample_point(rng)};
  ResidualReport r = check_kirichenko(m.spec, pts);
  EXPECT_LE(r.max_residual, 1e-8);
}

TEST(Kirichenko, RefusesNonNearlyKaehler) {
  Model m = build_hopf();
  RngStream rng(55);
  std::vector<PointRef> pts = {m.sample_point(rng)};
  EXPECT_THROW(check_kirichenko(m.spec, pts), ClassificationError);
}

TEST(Verify, ResidualScalesAsH4) {
  // under step refinement the Bianchi residual must drop ~16x while
  // truncation dominates; run the base scheme at large outer steps.
  // (n >= 2: at n = 1 all four identities are trivially 0 = 0.)
  Model m = build_cpn(2, 1.0);
  RngStream rng(56);
  PointRef p = m.sample_point(rng);

  auto residual_with = [&](double h_outer, double h_frame) {
    Model mm = m;
    mm.spec.fd.h_outer = h_outer;
    mm.spec.fd.h_frame = h_frame;
    mm.spec.fd.richardson = false;
    auto reps = check_bianchi(mm.spec, p);
    double r = 0;
    for (const auto& rep : reps) r = std::max(r, rep.max_residual);
    return r;
  };
  double r1 = residual_with(0.16, 0.02);
  double r2 = residual_with(0.08, 0.01);
  double ratio = r1 / r2;
  EXPECT_GT(ratio, 7.0);
  EXPECT_LT(ratio, 60.0);
}
