#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <floquet_ap/errors.hpp>

namespace floq {

// Chebyshev-Gauss-Lobatto grid on [a, b] with barycentric interpolation and
// Clenshaw-Curtis quadrature. Nodes are stored ascending; endpoints are exact.
class ChebGrid {
 public:
  ChebGrid(int m, double a, double b) : m_(m), a_(a), b_(b) {
    if (m < 1) throw config_error("grid degree must be >= 1");
    if (!(a < b)) throw config_error("grid interval must have a < b");
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    nodes_.resize(m + 1);
    bary_.resize(m + 1);
    for (int j = 0; j <= m; ++j) {
      nodes_[j] = mid - half * std::cos(j * std::numbers::pi / m);
      bary_[j] = (j % 2 == 0) ? 1.0 : -1.0;
    }
    nodes_[0] = a;
    nodes_[m] = b;
    bary_[0] *= 0.5;
    bary_[m] *= 0.5;
    quad_ = clenshaw_curtis(m, half);
  }

  int degree() const { return m_; }
  int size() const { return m_ + 1; }
  double a() const { return a_; }
  double b() const { return b_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& bary_weights() const { return bary_; }
  // integrates node samples over [a, b]; exact through degree m
  const std::vector<double>& quad_weights() const { return quad_; }

  bool same_layout(const ChebGrid& o) const {
    return m_ == o.m_ && a_ == o.a_ && b_ == o.b_;
  }

  // barycentric evaluation of values sampled on the nodes; exact at nodes
  template <class V>
  V eval(const std::vector<V>& values, double x) const {
    for (int j = 0; j <= m_; ++j)
      if (x == nodes_[j]) return values[j];
    V num = 0.0 * values[0];
    double den = 0.0;
    for (int j = 0; j <= m_; ++j) {
      double w = bary_[j] / (x - nodes_[j]);
      num = num + w * values[j];
      den += w;
    }
    return num * (1.0 / den);
  }

 private:
  static std::vector<double> clenshaw_curtis(int m, double half) {
    std::vector<double> w(m + 1);
    for (int j = 0; j <= m; ++j) {
      const double cj = (j == 0 || j == m) ? 0.5 : 1.0;
      double s = 0.0;
      for (int k = 0; k <= m / 2; ++k) {
        double bk = (k == 0 || (m % 2 == 0 && k == m / 2)) ? 0.5 : 1.0;
        s += bk * (2.0 / (1.0 - 4.0 * k * k)) *
             std::cos(2.0 * k * j * std::numbers::pi / m);
      }
      w[j] = half * (2.0 * cj / m) * s;
    }
    return w;
  }

  int m_;
  double a_, b_;
  std::vector<double> nodes_, bary_, quad_;
};

}  // namespace floq
