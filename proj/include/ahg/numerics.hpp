#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace ahg {

using cplx = std::complex<double>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using CVecX = Eigen::VectorXcd;
using CMatX = Eigen::MatrixXcd;

constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Deterministic splittable random stream (counter-based, SplitMix64 core).
// fork(tag) derives an independent stream from the key, so parallel and
// serial traversals of a sample set produce identical draws.
// ---------------------------------------------------------------------------

namespace detail {
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

class RngStream {
 public:
  explicit RngStream(uint64_t key) : key_(detail::mix64(key ^ 0x6a09e667f3bcc908ull)) {}

  RngStream fork(uint64_t tag) const {
    RngStream s(0);
    s.key_ = detail::mix64(key_ + 0x9e3779b97f4a7c15ull * (tag + 1));
    return s;
  }

  uint64_t next_u64() { return detail::mix64(key_ + 0x9e3779b97f4a7c15ull * (++ctr_)); }

  double next_double() {  // [0,1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  double normal() {
    // Box-Muller; draws a fixed number of uniforms per call.
    double u1 = next_double(), u2 = next_double();
    u1 = std::max(u1, 1e-300);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  VecX normal_vec(int dim) {
    VecX v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  CVecX normal_cvec(int dim) {
    CVecX v(dim);
    for (int i = 0; i < dim; ++i) v[i] = cplx(normal(), normal());
    return v;
  }

 private:
  uint64_t key_;
  uint64_t ctr_ = 0;
};

// ---------------------------------------------------------------------------
// Finite differences.
//
// Central stencils of 4th-order accuracy for derivative orders 1..3, with an
// optional single Richardson extrapolation step (combine step h and h/2
// estimates; cancels the leading h^4 term). Error model of the base scheme is
// O(h^4) truncation + O(eps/h^m) roundoff.
// ---------------------------------------------------------------------------

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;  // apply as sum w_j f(x + o_j h) / h^order
  int order = 1;
};

// Solve the Vandermonde system sum_j w_j o_j^k = k! * delta_{k,order}.
inline Stencil make_stencil(int order, const std::vector<int>& offsets) {
  const int m = static_cast<int>(offsets.size());
  Eigen::MatrixXd V(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < m; ++j) V(k, j) = std::pow(static_cast<double>(offsets[j]), k);
  }
  double fact = 1.0;
  for (int k = 1; k <= order; ++k) fact *= k;
  rhs[order] = fact;
  Eigen::VectorXd w = V.fullPivLu().solve(rhs);
  Stencil s;
  s.offsets = offsets;
  s.weights.assign(w.data(), w.data() + m);
  s.order = order;
  return s;
}

inline const Stencil& central_stencil(int order) {
  static const Stencil s1 = make_stencil(1, {-2, -1, 1, 2});
  static const Stencil s2 = make_stencil(2, {-2, -1, 0, 1, 2});
  static const Stencil s3 = make_stencil(3, {-3, -2, -1, 1, 2, 3});
  switch (order) {
    case 1: return s1;
    case 2: return s2;
    case 3: return s3;
    default: throw std::invalid_argument("central_stencil: order must be 1..3");
  }
}

// Max |offset| of the stencil for the given total multi-index, in units of h.
inline int stencil_radius(int max_axis_order) { return max_axis_order >= 3 ? 3 : 2; }

struct FdConfig {
  double h_scalar = 1e-4;    // scalar first derivatives
  double h_scalar2 = 5e-3;   // scalar second derivatives (roundoff/truncation balance)
  double h_scalar3 = 1.2e-2; // scalar third derivatives
  double h_frame = 2e-4;     // frame-field derivatives (structure functions)
  double h_outer = 5e-3;     // derivatives of connection-coefficient fields
  bool richardson = true;

  double h_scalar_for(int total_order) const {
    return total_order <= 1 ? h_scalar : (total_order == 2 ? h_scalar2 : h_scalar3);
  }

  // Per-axis step scaled by the coordinate magnitude.
  static double step(double h_base, const VecX& x) {
    return h_base * std::max(1.0, x.norm());
  }
  // Largest offset any nested stencil can reach from an evaluation point.
  double max_stencil_extent(const VecX& x) const {
    double h1 = step(h_frame, x), h2 = step(h_outer, x), h3 = step(h_scalar3, x);
    return 2.0 * h2 + 2.0 * h1 + 3.0 * h3 + 1e-6;
  }
};

// Multi-index: per-axis derivative orders, e.g. {{0,2},{3,1}} = d^2/dx0^2 d/dx3.
using MultiIndex = std::vector<std::pair<int, int>>;

namespace detail {

template <class F>
auto apply_tensor_stencil(F&& f, const VecX& x, const MultiIndex& mi, double h)
    -> decltype(f(x)) {
  using R = decltype(f(x));
  std::vector<const Stencil*> st;
  st.reserve(mi.size());
  double scale = 1.0;
  for (auto& [axis, ord] : mi) {
    (void)axis;
    st.push_back(&central_stencil(ord));
    for (int k = 0; k < ord; ++k) scale /= h;
  }
  // Iterate the tensor product of stencil points.
  std::vector<size_t> idx(mi.size(), 0);
  R acc{};
  bool first = true;
  while (true) {
    VecX y = x;
    double w = 1.0;
    for (size_t d = 0; d < mi.size(); ++d) {
      y[mi[d].first] += st[d]->offsets[idx[d]] * h;
      w *= st[d]->weights[idx[d]];
    }
    if (w != 0.0) {
      R val = f(y);
      if (first) {
        acc = val * w;
        first = false;
      } else {
        acc += val * w;
      }
    }
    // advance
    size_t d = 0;
    while (d < idx.size()) {
      if (++idx[d] < st[d]->offsets.size()) break;
      idx[d] = 0;
      ++d;
    }
    if (d == idx.size()) break;
  }
  return acc * scale;
}

}  // namespace detail

// Partial derivative of a scalar- or matrix-valued field by multi-index.
// One Richardson step combines the h and h/2 fourth-order estimates.
template <class F>
auto partial_derivative(F&& f, const VecX& x, const MultiIndex& mi, double h,
                        bool richardson = true) -> decltype(f(x)) {
  if (mi.empty()) return f(x);
  auto d_h = detail::apply_tensor_stencil(f, x, mi, h);
  if (!richardson) return d_h;
  auto d_h2 = detail::apply_tensor_stencil(f, x, mi, h / 2);
  return (d_h2 * 16.0 - d_h) / 15.0;
}

// First partial along one axis of a vector/matrix-valued functor.
// 4th order; the Richardson half-step reuses the +-h evaluations.
template <class F>
auto d1_axis(F&& f, const VecX& x, int axis, double h, bool richardson = true)
    -> decltype(f(x)) {
  auto at = [&](double o) {
    VecX y = x;
    y[axis] += o;
    return f(y);
  };
  auto fm2 = at(-2 * h), fm1 = at(-h), fp1 = at(h), fp2 = at(2 * h);
  auto d_h = (fm2 - fm1 * 8.0 + fp1 * 8.0 - fp2) / (12.0 * h);
  if (!richardson) return d_h;
  auto gm1 = at(-h / 2), gp1 = at(h / 2);
  auto d_h2 = (fm1 - gm1 * 8.0 + gp1 * 8.0 - fp1) / (6.0 * h);
  return (d_h2 * 16.0 - d_h) / 15.0;
}

}  // namespace ahg
