#include "sspatch/numerics.hpp"

#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

namespace sspatch {

double bisect_secant(const std::function<double(double)>& f, double lo, double hi,
                     double xtol, int max_iter) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw RootBracketError("bisect_secant: no sign change on [" + std::to_string(lo) +
                               ", " + std::to_string(hi) + "]");
    for (int it = 0; it < max_iter; ++it) {
        double mid;
        const double denom = fhi - flo;
        if (denom != 0.0) {
            mid = lo - flo * (hi - lo) / denom;  // secant through the bracket ends
            const double margin = 0.01 * (hi - lo);
            if (!(mid > lo + margin && mid < hi - margin)) mid = 0.5 * (lo + hi);
        } else {
            mid = 0.5 * (lo + hi);
        }
        const double fmid = f(mid);
        if (fmid == 0.0 || hi - lo < xtol) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }
    return 0.5 * (lo + hi);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol) {
    if (a == b) return 0.0;
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 14, abs_tol, &err);
    if (!(err <= std::max(abs_tol, 1e-14 * std::abs(v)) * 100.0) || std::isnan(v))
        throw QuadratureError("quadrature failed on [" + std::to_string(a) + ", " +
                                  std::to_string(b) + "], err=" + std::to_string(err),
                              a, b);
    return v;
}

double gauss7(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 7>::integrate(f, a, b);
}

Interp1D::Interp1D(std::vector<double> x, std::vector<double> y, int order)
    : x_(std::move(x)), y_(std::move(y)), order_(order) {
    if (x_.size() != y_.size() || x_.empty())
        throw std::invalid_argument("Interp1D: size mismatch or empty data");
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("Interp1D: abscissas not increasing");
    const std::size_t n = x_.size();
    if (order_ >= 2 && n >= 3) {
        // Fritsch-Carlson monotone slopes
        std::vector<double> h(n - 1), d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            d[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        m_.assign(n, 0.0);
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) {
                m_[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        // clamp end slopes (Fritsch-Carlson end condition)
        auto clamp_end = [](double m, double d0) {
            if (d0 == 0.0) return 0.0;
            if (m * d0 < 0.0) return 0.0;
            if (std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
            return m;
        };
        m_[0] = clamp_end(m_[0], d[0]);
        m_[n - 1] = clamp_end(m_[n - 1], d[n - 2]);
    } else {
        order_ = (n >= 2) ? 1 : 0;
    }
}

std::size_t Interp1D::locate(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    if (i == 0) return 0;
    if (i >= x_.size()) return x_.size() - 2;
    return i - 1;
}

double Interp1D::operator()(double x) const {
    const std::size_t n = x_.size();
    if (n == 1 || order_ == 0) return y_[0];
    if (x <= x_.front()) x = x_.front();
    if (x >= x_.back()) x = x_.back();
    const std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    if (order_ == 1) return y_[i] * (1.0 - s) + y_[i + 1] * s;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * y_[i] + h * h10 * m_[i] + h01 * y_[i + 1] + h * h11 * m_[i + 1];
}

double Interp1D::prime(double x) const {
    const std::size_t n = x_.size();
    if (n == 1 || order_ == 0) return 0.0;
    if (x <= x_.front()) x = x_.front();
    if (x >= x_.back()) x = x_.back();
    const std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    if (order_ == 1) return (y_[i + 1] - y_[i]) / h;
    const double dh00 = 6.0 * s * (s - 1.0) / h;
    const double dh10 = (1.0 - s) * (1.0 - 3.0 * s);
    const double dh01 = -6.0 * s * (s - 1.0) / h;
    const double dh11 = s * (3.0 * s - 2.0);
    return dh00 * y_[i] + dh10 * m_[i] + dh01 * y_[i + 1] + dh11 * m_[i + 1];
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n != y_.size() || n < 3) throw std::invalid_argument("CubicSpline: need >= 3 points");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("CubicSpline: abscissas not increasing");
    // tridiagonal solve for second derivatives with parabolic run-out ends
    // (M_0 = M_1, M_{n-1} = M_{n-2}); exact for quadratic data, and convex
    // tables keep positive curvature at the end knots.
    ypp_.assign(n, 0.0);
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    b[0] = 1.0;
    c[0] = -1.0;
    d[0] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hm = x_[i] - x_[i - 1];
        const double hp = x_[i + 1] - x_[i];
        a[i] = hm;
        b[i] = 2.0 * (hm + hp);
        c[i] = hp;
        d[i] = 6.0 * ((y_[i + 1] - y_[i]) / hp - (y_[i] - y_[i - 1]) / hm);
    }
    a[n - 1] = -1.0;
    b[n - 1] = 1.0;
    d[n - 1] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    ypp_[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) ypp_[i] = (d[i] - c[i] * ypp_[i + 1]) / b[i];
}

std::size_t CubicSpline::locate(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    if (i == 0) return 0;
    if (i >= x_.size()) return x_.size() - 2;
    return i - 1;
}

double CubicSpline::operator()(double x) const {
    const std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * ypp_[i] + (B * B * B - B) * ypp_[i + 1]) * h * h / 6.0;
}

double CubicSpline::prime(double x) const {
    const std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h +
           ((3.0 * B * B - 1.0) * ypp_[i + 1] - (3.0 * A * A - 1.0) * ypp_[i]) * h / 6.0;
}

double CubicSpline::second(double x) const {
    const std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    return A * ypp_[i] + B * ypp_[i + 1];
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

}  // namespace sspatch
