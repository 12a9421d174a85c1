#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sspatch {

// Polynomial with ascending coefficients; derivatives are exact.
struct Poly {
    std::vector<double> c;

    Poly() = default;
    explicit Poly(std::vector<double> coeffs) : c(std::move(coeffs)) {}

    double operator()(double x) const {
        double acc = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
        return acc;
    }
    Poly derivative() const {
        Poly d;
        if (c.size() <= 1) { d.c = {0.0}; return d; }
        d.c.resize(c.size() - 1);
        for (std::size_t i = 1; i < c.size(); ++i) d.c[i - 1] = static_cast<double>(i) * c[i];
        return d;
    }
};

struct RootBracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bracketed bisection+secant hybrid. f(lo) and f(hi) must have opposite signs.
// Secant step is accepted only when it stays inside the current bracket,
// otherwise the iteration bisects. Tolerance is on the argument.
double bisect_secant(const std::function<double(double)>& f, double lo, double hi,
                     double xtol = 1e-12, int max_iter = 200);

struct QuadratureError : std::runtime_error {
    double a, b;
    QuadratureError(const std::string& msg, double a_, double b_)
        : std::runtime_error(msg), a(a_), b(b_) {}
};

// Adaptive Gauss-Kronrod quadrature; throws QuadratureError with the interval
// when the error estimate misses the requested absolute tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol = 1e-12);

// Fixed 7-point Gauss-Legendre panel, used for cumulative tables on fine grids.
double gauss7(const std::function<double(double)>& f, double a, double b);

// Piecewise-cubic interpolant over strictly increasing abscissas.
// order 2: monotone cubic (Fritsch-Carlson slopes); order 1: piecewise linear.
// Levels near the domain corner can hold as few as one node, so small-n cases
// degrade gracefully (constant / linear). Evaluation clamps to the data range.
class Interp1D {
  public:
    Interp1D() = default;
    Interp1D(std::vector<double> x, std::vector<double> y, int order = 2);

    double operator()(double x) const;
    double prime(double x) const;

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    std::size_t size() const { return x_.size(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

  private:
    std::size_t locate(double x) const;
    std::vector<double> x_, y_, m_;  // m_: node slopes (order 2 only)
    int order_ = 2;
};

// Natural cubic spline with continuous second derivative; used where C2 data
// is required (tabulated pressure laws).
class CubicSpline {
  public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;
    double prime(double x) const;
    double second(double x) const;
    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }

  private:
    std::size_t locate(double x) const;
    std::vector<double> x_, y_, ypp_;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Deterministic 64-bit generator (splitmix64) for seeded subsampling.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : s_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return next() % n; }

  private:
    std::uint64_t s_;
};

}  // namespace sspatch
