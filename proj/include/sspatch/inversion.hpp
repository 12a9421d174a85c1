#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sspatch/solver.hpp"

namespace sspatch {

// Physical x coordinate per hodograph node, built by integrating the minus-
// family transport of x from the exit point on the data curve down to each
// node, level by level at the marching order.
struct XField {
    std::vector<std::vector<double>> x;  // aligned with field.levels
    std::vector<Interp1D> ix;

    double sample(const HodographField& f, double t, double psi) const;
};

XField x_field(const HodographField& field, const HodographBoundary& boundary,
               const BernoulliBranch& branch, int interp_order = 2);

// j = dx/d(t,psi) both in closed form and by centered differences on the grid.
struct JacobianField {
    std::vector<std::vector<double>> closed;
    std::vector<std::vector<double>> fd;  // zero where no stencil exists
    double max_rel_gap = 0.0;             // over interior nodes
    double min_closed = 0.0;              // over all t > 0 nodes
};

JacobianField jacobian(const HodographField& field, const XField& xf,
                       const BernoulliBranch& branch);

struct InjectivityReport {
    bool monotone_levels = false;
    double worst_level_t = 0.0;   // level of the worst (or first violating) pair
    double min_dx = 0.0;          // min forward difference of x along any level
    bool no_duplicates = false;
    std::size_t collision_count = 0;
    double cell_size = 1e-6;
    bool passed = false;
};

InjectivityReport injectivity_check(const HodographField& field, const XField& xf,
                                    double cell_size = 1e-6);

struct SonicCurve {
    std::vector<double> psi, x, r, theta, W, L;
    std::vector<double> tangent_x, tangent_r;  // unit tangents along the curve
    double grad_norm_min = 0.0, grad_norm_max = 0.0;  // |grad pi|^2 proxy at t_min
    bool simple = true;  // no self-intersection at the probe resolution
};

SonicCurve sonic_curve(const HodographField& field, const XField& xf,
                       const BernoulliBranch& branch);

struct DFCurve {
    std::vector<double> t, psi, x, r, theta;
    double delta_bar = 0.0;
    int retries = 0;
    std::array<double, 2> D{};  // sonic-curve end of the mapped characteristic
    std::array<double, 2> F{};  // streamline end
};

DFCurve df_characteristic(const HodographField& field, const XField& xf,
                          const HodographBoundary& boundary, const OmegaRegion& region,
                          const BernoulliBranch& branch);

// Full physical-plane solution: fields on the hodograph-image point cloud plus
// the bounding curves.
struct PatchSolution {
    std::vector<std::vector<double>> x, u, v, a, j;  // aligned with field.levels
    JacobianField jac;
    InjectivityReport injectivity;
    SonicCurve sonic;
    DFCurve df;
};

PatchSolution physical_fields(const HodographField& field, const XField& xf,
                              const HodographBoundary& boundary, const OmegaRegion& region,
                              const BernoulliBranch& branch);

// Regular (x, r) raster of the physical fields for plotting exports.
struct Raster {
    int nx = 0, nr = 0;
    double x0 = 0, x1 = 0, r0 = 0, r1 = 0;
    std::vector<double> theta, pi, u, v, a;  // row-major nr x nx
    std::vector<std::uint8_t> mask;          // 1 where covered by the patch
};

Raster rasterize(const HodographField& field, const XField& xf,
                 const BernoulliBranch& branch, int nx, int nr);

}  // namespace sspatch
