#pragma once

#include <array>

#include "ahg/frame.hpp"

namespace ahg {

// Dense complex tensor over frame indices {1..n, \bar1..\bar n}, rank <= 4.
// variance[s] is 'u' (vector slot) or 'l' (covector slot); the covariant
// derivative adds a Gamma correction with the matching sign per slot.
struct FrameTensor {
  int n = 1;
  std::vector<char> variance;
  std::vector<cplx> data;

  FrameTensor() = default;
  FrameTensor(int n_, std::vector<char> var) : n(n_), variance(std::move(var)) {
    size_t sz = 1;
    for (size_t s = 0; s < variance.size(); ++s) sz *= static_cast<size_t>(2 * n);
    data.assign(sz, cplx(0, 0));
  }

  int dim() const { return 2 * n; }
  int rank() const { return static_cast<int>(variance.size()); }

  size_t flat(std::initializer_list<int> idx) const {
    size_t f = 0;
    for (int i : idx) f = f * static_cast<size_t>(dim()) + static_cast<size_t>(i);
    return f;
  }
  cplx& at(std::initializer_list<int> idx) { return data[flat(idx)]; }
  const cplx& at(std::initializer_list<int> idx) const { return data[flat(idx)]; }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& z : data) m = std::max(m, std::abs(z));
    return m;
  }

  // Arithmetic used by the finite-difference engine.
  FrameTensor operator+(const FrameTensor& o) const {
    FrameTensor r = *this;
    for (size_t i = 0; i < data.size(); ++i) r.data[i] += o.data[i];
    return r;
  }
  FrameTensor operator-(const FrameTensor& o) const {
    FrameTensor r = *this;
    for (size_t i = 0; i < data.size(); ++i) r.data[i] -= o.data[i];
    return r;
  }
  FrameTensor operator*(double s) const {
    FrameTensor r = *this;
    for (auto& z : r.data) z *= s;
    return r;
  }
  FrameTensor operator/(double s) const { return *this * (1.0 / s); }
  FrameTensor& operator+=(const FrameTensor& o) {
    if (data.empty()) {
      *this = o;
      return *this;
    }
    for (size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
  }
};

inline FrameTensor operator*(double s, const FrameTensor& t) { return t * s; }

}  // namespace ahg
