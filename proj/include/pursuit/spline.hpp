#pragma once
#include <cmath>
#include <cstddef>
#include <vector>

#include "pursuit/error.hpp"

namespace pursuit {

// Periodic natural cubic spline through (t_i, y_i), i = 0..n-1, with period T:
// y(t_0 + T) = y_0. Second derivatives solved from the cyclic tridiagonal
// system via Sherman-Morrison on the Thomas algorithm.
class PeriodicCubicSpline {
 public:
  PeriodicCubicSpline(std::vector<double> knots, std::vector<double> values, double period)
      : t_(std::move(knots)), y_(std::move(values)), period_(period) {
    const std::size_t n = t_.size();
    if (n < 3 || y_.size() != n) throw GeometryError("spline needs >= 3 knots");
    h_.resize(n);
    for (std::size_t i = 0; i + 1 < n; ++i) h_[i] = t_[i + 1] - t_[i];
    h_[n - 1] = period_ - (t_[n - 1] - t_[0]);
    for (double h : h_)
      if (!(h > 0.0)) throw GeometryError("spline knots not strictly increasing");
    solve_second_derivatives();
  }

  // Evaluate at t (wrapped into the period).
  double eval(double t) const {
    const std::size_t n = t_.size();
    double tw = std::fmod(t - t_[0], period_);
    if (tw < 0.0) tw += period_;
    tw += t_[0];
    // locate segment: t_[i] <= tw < t_[i] + h_[i]
    std::size_t lo = 0, hi = n;  // binary search over knot starts
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (t_[mid] <= tw) lo = mid; else hi = mid;
    }
    const std::size_t i = lo;
    const std::size_t j = (i + 1) % n;
    const double h = h_[i];
    const double a = (t_[i] + h - tw) / h;
    const double b = (tw - t_[i]) / h;
    return a * y_[i] + b * y_[j] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[j]) * (h * h) / 6.0;
  }

  double deriv(double t) const {
    const std::size_t n = t_.size();
    double tw = std::fmod(t - t_[0], period_);
    if (tw < 0.0) tw += period_;
    tw += t_[0];
    std::size_t lo = 0, hi = n;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (t_[mid] <= tw) lo = mid; else hi = mid;
    }
    const std::size_t i = lo;
    const std::size_t j = (i + 1) % n;
    const double h = h_[i];
    const double a = (t_[i] + h - tw) / h;
    const double b = (tw - t_[i]) / h;
    return (y_[j] - y_[i]) / h +
           ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * b * b - 1.0) * m_[j]) * h / 6.0;
  }

 private:
  void solve_second_derivatives() {
    const std::size_t n = t_.size();
    // Cyclic system A m = d with rows: (h_{i-1}/6) m_{i-1} + ((h_{i-1}+h_i)/3) m_i
    // + (h_i/6) m_{i+1} = (y_{i+1}-y_i)/h_i - (y_i-y_{i-1})/h_{i-1}
    std::vector<double> a(n), b(n), c(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im1 = (i + n - 1) % n;
      const std::size_t ip1 = (i + 1) % n;
      a[i] = h_[im1] / 6.0;
      b[i] = (h_[im1] + h_[i]) / 3.0;
      c[i] = h_[i] / 6.0;
      d[i] = (y_[ip1] - y_[i]) / h_[i] - (y_[i] - y_[im1]) / h_[im1];
    }
    m_ = solve_cyclic_tridiagonal(a, b, c, d);
  }

  // Sherman-Morrison: solve the cyclic tridiagonal system using two Thomas passes.
  static std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& a,
                                                      const std::vector<double>& b,
                                                      const std::vector<double>& c,
                                                      const std::vector<double>& d) {
    const std::size_t n = b.size();
    const double alpha = a[0];      // corner: row 0 couples to n-1
    const double beta = c[n - 1];   // corner: row n-1 couples to 0
    const double gamma = -b[0];

    std::vector<double> bb(b);
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - alpha * beta / gamma;

    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;

    auto thomas = [&](const std::vector<double>& rhs) {
      std::vector<double> cp(n), dp(n), x(n);
      cp[0] = c[0] / bb[0];
      dp[0] = rhs[0] / bb[0];
      for (std::size_t i = 1; i < n; ++i) {
        const double m = bb[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (rhs[i] - a[i] * dp[i - 1]) / m;
      }
      x[n - 1] = dp[n - 1];
      for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
      return x;
    };

    const std::vector<double> y = thomas(d);
    const std::vector<double> z = thomas(u);
    const double vy = y[0] + (beta / gamma) * y[n - 1];
    const double vz = z[0] + (beta / gamma) * z[n - 1];
    const double factor = vy / (1.0 + vz);

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - factor * z[i];
    return x;
  }

  std::vector<double> t_, y_, h_, m_;
  double period_;
};

}  // namespace pursuit
