#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "ahg/numerics.hpp"

namespace ahg {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutOfChartError : GeometryError {
  using GeometryError::GeometryError;
};
struct FrameConstructionError : GeometryError {
  using GeometryError::GeometryError;
};
struct ClassificationError : GeometryError {
  using GeometryError::GeometryError;
};
struct CutLocusError : GeometryError {
  using GeometryError::GeometryError;
};
struct DomainError : GeometryError {
  using GeometryError::GeometryError;
};

enum class ManifoldClass { kaehler, nearly_kaehler, quasi_kaehler, hermitian, general };

inline const char* to_string(ManifoldClass c) {
  switch (c) {
    case ManifoldClass::kaehler: return "kaehler";
    case ManifoldClass::nearly_kaehler: return "nearly_kaehler";
    case ManifoldClass::quasi_kaehler: return "quasi_kaehler";
    case ManifoldClass::hermitian: return "hermitian";
    default: return "general";
  }
}

// Open coordinate box, optionally intersected with a norm annulus
// r_min < |x| < r_max (for charts like the unit ball or an annulus).
struct Chart {
  int id = 0;
  VecX lo, hi;
  double r_max = std::numeric_limits<double>::infinity();
  double r_min = 0.0;

  bool contains(const VecX& x, double margin = 0.0) const {
    for (int i = 0; i < x.size(); ++i) {
      if (x[i] <= lo[i] + margin || x[i] >= hi[i] - margin) return false;
    }
    double r = x.norm();
    if (r >= r_max - margin) return false;
    if (r_min > 0.0 && r <= r_min + margin) return false;
    return true;
  }
};

struct PointRef {
  int chart = 0;
  VecX x;
};

// Chart-based description of an almost Hermitian manifold (M, J, g).
// metric(chart, x) is the 2n x 2n real metric, acs(chart, x) the almost
// complex structure; both must satisfy J^2 = -I and J^T g J = g pointwise.
struct ManifoldSpec {
  int n = 1;  // complex dimension; real dimension 2n
  std::vector<Chart> charts;
  std::function<MatX(int, const VecX&)> metric;
  std::function<MatX(int, const VecX&)> acs;
  ManifoldClass declared_class = ManifoldClass::general;

  // Analytic extras (empty std::function when not available).
  std::function<double(const PointRef&, const PointRef&)> distance;
  // Unit-speed geodesic from (o, v) evaluated at arclength rho.
  std::function<PointRef(const PointRef&, const VecX&, double)> geodesic;
  // Re-express a point in another chart of the atlas.
  std::function<PointRef(const PointRef&, int)> transition;

  FdConfig fd;
  std::string name = "manifold";

  int real_dim() const { return 2 * n; }
  const Chart& chart(int id) const { return charts.at(static_cast<size_t>(id)); }

  MatX g_at(const PointRef& p) const { return metric(p.chart, p.x); }
  MatX j_at(const PointRef& p) const { return acs(p.chart, p.x); }

  // Margin keeping every nested stencil strictly inside the chart.
  double chart_margin(const VecX& x) const { return 2.0 * fd.max_stencil_extent(x); }

  void require_in_chart(const PointRef& p, double extra = 0.0) const {
    if (!chart(p.chart).contains(p.x, extra)) {
      throw OutOfChartError(name + ": point leaves chart " + std::to_string(p.chart));
    }
  }
};

// Structure residuals asserted by the spec'd invariants.
struct StructureResiduals {
  double j_square;      // ||J^2 + I||_max
  double j_metric;      // ||J^T g J - g||_max
  double g_min_eig;     // smallest eigenvalue of g (must be > 0)
};

inline StructureResiduals structure_residuals(const ManifoldSpec& M, const PointRef& p) {
  const int d = M.real_dim();
  MatX g = M.g_at(p), J = M.j_at(p);
  StructureResiduals r{};
  r.j_square = (J * J + MatX::Identity(d, d)).cwiseAbs().maxCoeff();
  r.j_metric = (J.transpose() * g * J - g).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (g + g.transpose()));
  r.g_min_eig = es.eigenvalues().minCoeff();
  return r;
}

}  // namespace ahg
