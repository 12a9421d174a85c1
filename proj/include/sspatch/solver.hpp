#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sspatch/branch.hpp"
#include "sspatch/domain.hpp"
#include "sspatch/streamline.hpp"

namespace sspatch {

enum class SystemForm { Primal, Reciprocal };

struct SolverConfig {
    int n_levels = 200;
    double t_min = 0.0;         // stopping level, must lie in (0, delta)
    double cfl_like = 0.5;      // cap on max|lambda| dt / dpsi
    int interp_order = 2;       // 2: monotone cubic foot sampling, 1: linear
    SystemForm form = SystemForm::Primal;
    double t_guard_factor = 10.0;  // L is extrapolated below t_guard_factor * t_min
    int n_psi = 0;              // target node count on the deepest level; 0 -> 2*n_levels
};

// Characteristic slopes and right-hand sides of the closed hodograph system at
// one state. alpha = theta + omega, beta = theta - omega.
struct CharRates {
    double lambda_plus = 0.0, lambda_minus = 0.0;
    double rhs_W = 0.0, rhs_Z = 0.0, rhs_r = 0.0, rhs_theta = 0.0;
    double H1 = 0.0, H2 = 0.0;  // source functions of the reciprocal form
    double alpha = 0.0, beta = 0.0;
};

CharRates char_rates(const EquationOfState& eos, const BernoulliConstants& consts, double t,
                     double W, double Z, double r, double theta);
// Fast path sharing a precomputed branch point; L is the regularized (W-Z)/(2t).
CharRates char_rates_at(const BranchPoint& bp, double t, double W, double Z, double r,
                        double theta, double L);

struct MarchError : std::runtime_error {
    double t, psi;
    MarchError(const std::string& msg, double t_, double psi_)
        : std::runtime_error(msg + " at (t=" + std::to_string(t_) +
                             ", psi=" + std::to_string(psi_) + ")"),
          t(t_),
          psi(psi_) {}
};

struct Level {
    double t = 0.0;
    std::vector<double> psi, W, Z, r, theta, L;
    // committed interpolants for foot-point sampling (canonical variables)
    Interp1D iW, iZ, ir, itheta, iL;
};

struct MarchDiagnostics {
    double worst_cfl = 0.0;
    double min_W = 0.0, max_W = 0.0, min_Z = 0.0, max_Z = 0.0;
    double min_r = 0.0, max_r = 0.0;
    double box_margin = 0.0;       // min distance of (W, Z) to the invariant box walls
    double r_margin = 0.0;         // min distance of r to the exponential bounds
    double max_lam_over_t2 = 0.0;  // sup lambda_plus / t^2 over all nodes
    std::vector<double> level_t, level_min_WZ, level_max_WZ, level_max_absWmZ;
};

class HodographField {
  public:
    std::vector<Level> levels;  // t decreasing, levels.front().t = delta
    SystemForm form = SystemForm::Primal;
    double delta = 0.0, t_min = 0.0, t_guard = 0.0;
    double dpsi_target = 0.0;
    MarchDiagnostics diag;

    const Level& deepest() const { return levels.back(); }
    // bracketing-level interpolation: monotone cubic in psi, linear in t
    double sample_W(double t, double psi) const;
    double sample_Z(double t, double psi) const;
    double sample_r(double t, double psi) const;
    double sample_theta(double t, double psi) const;
    double sample_L(double t, double psi) const;
    std::size_t level_below(double t) const;  // index of first level with t_level <= t
};

HodographField march(const HodographBoundary& boundary, const DomainParams& params,
                     const OmegaRegion& region, const SolverConfig& cfg,
                     const std::shared_ptr<const BernoulliBranch>& branch);

struct SonicTrace {
    std::vector<double> psi;
    std::vector<double> W, Z, W_merged, r, theta, L;
    double max_disagreement = 0.0;   // max |W - Z| after extrapolation to t = 0
    double disagreement_tol = 0.0;   // 3 t_min sup|L|
    bool within_tolerance = true;
    double constraint_residual = 0.0;  // max(|W-Z|(t_min) - 2 t_min sup|L|)
    double sup_L = 0.0;
};

SonicTrace sonic_extrapolate(const HodographField& field);

}  // namespace sspatch
