#pragma once

#include "ahg/connection.hpp"
#include "ahg/models.hpp"
#include "ahg/verify.hpp"

namespace ahg {

// ---------------------------------------------------------------------------
// Laplacians. The canonical Laplacian Delta f = 2 sum_i f_{i bi} equals the
// Levi-Civita Laplace-Beltrami operator on quasi-Kaehler manifolds.
// ---------------------------------------------------------------------------

inline double laplacian_at(const ManifoldSpec& M, const PointRef& p, const ScalarField& f,
                           ConnectionKind kind = ConnectionKind::canonical) {
  auto field = make_field(M, p);
  ConnectionCoeffs conn = kind == ConnectionKind::canonical
                              ? canonical_coeffs(M, p, field)
                              : levi_civita_coeffs(M, p, field);
  CMatX H = covariant_hessian(M, p, f, conn);
  cplx tr = 0;
  for (int i = 0; i < M.n; ++i) tr += H(i, i + M.n);
  return 2.0 * tr.real();
}

// max |Delta f + lambda f| over the sample.
inline ResidualReport check_eigenfunction(const ManifoldSpec& M, const ScalarField& f,
                                          double lambda, const std::vector<PointRef>& sample,
                                          double tol = 1e-5) {
  if (sample.empty()) throw DomainError(M.name + ": empty sample");
  ResidualReport rep = ResidualReport::make("eigenfunction", 0.0, sample.front(), tol);
  for (const PointRef& p : sample) {
    double r = std::abs(laplacian_at(M, p, f) + lambda * f(p.x));
    rep.merge(ResidualReport::make("eigenfunction", r, p, tol));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Trial functions: polynomials of the model's ambient embedding coordinates
// (degree <= 3), mean-adjusted by Monte Carlo.
// ---------------------------------------------------------------------------

struct TestFunction {
  // term = coeff * prod of up to three ambient coordinates
  struct Term {
    double coeff;
    std::array<int, 3> vars;  // indices into the embedding, -1 = unused
  };
  std::vector<Term> terms;
  double mean_estimate = 0.0;
  int sample_size = 0;

  double ambient_eval(const VecX& u) const {
    double s = 0;
    for (const Term& t : terms) {
      double v = t.coeff;
      for (int k = 0; k < 3; ++k)
        if (t.vars[static_cast<size_t>(k)] >= 0) v *= u[t.vars[static_cast<size_t>(k)]];
      s += v;
    }
    return s;
  }
};

inline TestFunction random_trial(int embed_dim, RngStream& rng, int max_terms = 4) {
  TestFunction f;
  int terms = 1 + static_cast<int>(rng.next_u64() % static_cast<uint64_t>(max_terms));
  for (int t = 0; t < terms; ++t) {
    TestFunction::Term term{};
    term.coeff = rng.uniform(-1.0, 1.0);
    int deg = 1 + static_cast<int>(rng.next_u64() % 3);
    term.vars = {-1, -1, -1};
    for (int k = 0; k < deg; ++k)
      term.vars[static_cast<size_t>(k)] =
          static_cast<int>(rng.next_u64() % static_cast<uint64_t>(embed_dim));
    f.terms.push_back(term);
  }
  return f;
}

inline ScalarField trial_on_chart(const Model& m, const TestFunction& f, int chart) {
  return [&m, f, chart](const VecX& x) {
    return f.ambient_eval(m.embed(PointRef{chart, x})) - f.mean_estimate;
  };
}

// ---------------------------------------------------------------------------
// Rayleigh quotient R(f) = int ||grad f||^2 / int (f - mean)^2 by Monte Carlo
// with the model's exact uniform sampler; batch-means error bars.
// ---------------------------------------------------------------------------

struct RayleighEstimate {
  double value = 0.0;
  double sigma = 0.0;  // batch-means standard error of the ratio
  int samples = 0;
  double mean = 0.0;  // estimated mean of f (before adjustment)
};

inline double gradient_norm_sq(const ManifoldSpec& M, const PointRef& p,
                               const ScalarField& f) {
  const int d = M.real_dim();
  const double h = FdConfig::step(M.fd.h_scalar, p.x);
  VecX df(d);
  for (int mu = 0; mu < d; ++mu)
    df[mu] = partial_derivative(f, p.x, {{mu, 1}}, h, M.fd.richardson);
  return df.dot(M.g_at(p).ldlt().solve(df));
}

inline RayleighEstimate rayleigh_quotient(const Model& m, const TestFunction& f_in,
                                          int mc_samples, uint64_t seed) {
  if (!m.sample_uniform || !m.embed)
    throw DomainError(m.spec.name + ": no uniform sampler for Rayleigh quotients");
  const int batches = 32;
  const int per_batch = std::max(1, mc_samples / batches);

  // pass 1: mean estimate
  TestFunction f = f_in;
  RngStream mean_rng = RngStream(seed).fork(1);
  double mean = 0;
  for (int b = 0; b < batches; ++b) {
    RngStream brng = mean_rng.fork(static_cast<uint64_t>(b));
    for (int k = 0; k < per_batch; ++k) {
      PointRef p = m.sample_uniform(brng);
      mean += f.ambient_eval(m.embed(p));
    }
  }
  mean /= static_cast<double>(batches * per_batch);
  f.mean_estimate = mean;
  f.sample_size = batches * per_batch;

  // pass 2: ratio with batch means
  RngStream rng = RngStream(seed).fork(2);
  std::vector<double> ratios;
  double num_all = 0, den_all = 0;
  for (int b = 0; b < batches; ++b) {
    RngStream brng = rng.fork(static_cast<uint64_t>(b));
    double num = 0, den = 0;
    for (int k = 0; k < per_batch; ++k) {
      PointRef p = m.sample_uniform(brng);
      ScalarField fc = trial_on_chart(m, f, p.chart);
      num += gradient_norm_sq(m.spec, p, fc);
      double v = fc(p.x);
      den += v * v;
    }
    if (den <= 0) throw DomainError(m.spec.name + ": degenerate trial function");
    ratios.push_back(num / den);
    num_all += num;
    den_all += den;
  }
  if (den_all <= 1e-12 * batches * per_batch)
    throw DomainError(m.spec.name + ": trial function is numerically constant");

  RayleighEstimate est;
  est.value = num_all / den_all;
  est.samples = batches * per_batch;
  est.mean = mean;
  double var = 0;
  for (double r : ratios) var += (r - est.value) * (r - est.value);
  var /= (batches - 1);
  est.sigma = std::sqrt(var / batches);
  return est;
}

// ---------------------------------------------------------------------------
// lambda_1 >= 2K for compact quasi-Kaehler manifolds with quasi Ricci >= K:
// every mean-adjusted trial keeps R(f) >= 2K - 3 sigma - tol; sharpness on
// the six-sphere is attained by the first ambient harmonics.
// ---------------------------------------------------------------------------

struct EigenvalueBoundReport {
  double two_K = 0;
  double min_quotient = std::numeric_limits<double>::infinity();
  double max_sigma = 0;
  double sharp_value = 0;  // quotient of the first-harmonic trial
  double sharp_sigma = 0;
  int trials = 0;
  bool pass = false;
  bool sharp = false;
};

inline double quasi_ricci_lower_bound(const Model& m, const std::vector<PointRef>& pts) {
  double K = std::numeric_limits<double>::infinity();
  for (const PointRef& p : pts) {
    CMatX q = ricci_at(m.spec, p, RicciKind::quasi);
    Eigen::SelfAdjointEigenSolver<CMatX> es(0.5 * (q + q.adjoint()));
    K = std::min(K, es.eigenvalues().minCoeff());
  }
  return K;
}

inline EigenvalueBoundReport verify_eigenvalue_bound(const Model& m, int mc_samples,
                                                     int trials, uint64_t seed,
                                                     double quasi_ricci_K) {
  if (!m.sample_uniform)
    throw DomainError(m.spec.name + ": eigenvalue bound needs a compact model");
  if (m.spec.declared_class == ManifoldClass::hermitian ||
      m.spec.declared_class == ManifoldClass::general)
    throw ClassificationError(m.spec.name + ": eigenvalue bound needs quasi-Kaehler");

  EigenvalueBoundReport rep;
  rep.two_K = 2.0 * quasi_ricci_K;
  rep.trials = trials;
  RngStream rng = RngStream(seed).fork(1001);
  bool all_above = true;
  for (int t = 0; t < trials; ++t) {
    RngStream trng = rng.fork(static_cast<uint64_t>(t));
    TestFunction f = random_trial(m.embed_dim, trng);
    RayleighEstimate est;
    try {
      est = rayleigh_quotient(m, f, mc_samples, seed + static_cast<uint64_t>(t));
    } catch (const DomainError&) {
      continue;  // numerically constant trial; skip
    }
    rep.min_quotient = std::min(rep.min_quotient, est.value);
    rep.max_sigma = std::max(rep.max_sigma, est.sigma);
    if (est.value < rep.two_K - 3.0 * est.sigma - 1e-3) all_above = false;
  }
  // sharpness probe: first ambient coordinate
  TestFunction x1;
  x1.terms.push_back({1.0, {0, -1, -1}});
  RayleighEstimate sharp = rayleigh_quotient(m, x1, mc_samples, seed + 7777);
  rep.sharp_value = sharp.value;
  rep.sharp_sigma = sharp.sigma;
  rep.sharp = std::abs(sharp.value - rep.two_K) <= 3.0 * sharp.sigma + 1e-3;
  rep.pass = all_above;
  return rep;
}

}  // namespace ahg
