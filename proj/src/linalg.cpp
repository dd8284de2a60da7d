#include "heisosc/linalg.hpp"

#include <cmath>
#include <utility>

#include "heisosc/errors.hpp"

namespace heisosc {

double determinant(Matrix m) {
  if (m.rows() != m.cols()) throw DimensionError("determinant needs a square matrix");
  const int d = m.rows();
  double det = 1.0;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r) {
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    }
    if (m(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (int k = 0; k < d; ++k) std::swap(m(piv, k), m(c, k));
      det = -det;
    }
    det *= m(c, c);
    for (int r = c + 1; r < d; ++r) {
      const double f = m(r, c) / m(c, c);
      if (f == 0.0) continue;
      for (int k = c; k < d; ++k) m(r, k) -= f * m(c, k);
    }
  }
  return det;
}

double normalized_determinant(const Matrix& m, DetNormalization mode) {
  Matrix scaled = m;
  if (mode == DetNormalization::Frobenius) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    s = std::sqrt(s);
    if (s == 0.0) return 0.0;
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) scaled(i, j) /= s;
    return determinant(std::move(scaled));
  }
  for (int i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += v * v;
    s = std::sqrt(s);
    if (s == 0.0) return 0.0;
    for (int j = 0; j < m.cols(); ++j) scaled(i, j) /= s;
  }
  return determinant(std::move(scaled));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DimensionError("line fit needs >= 2 paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.slope * x[i] + f.intercept);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

}  // namespace heisosc
