#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sspatch/inversion.hpp"

namespace sspatch {

struct CheckReport {
    std::string name;
    bool passed = false;
    double margin = 0.0;  // signed worst-case margin (positive = satisfied)
    std::string location;
    std::vector<double> refinement_trend;  // recorded when discretization-dependent
    std::string note;
};

// Everything computed for one grid resolution.
struct GridArtifacts {
    int n_levels = 0;
    HodographField field;
    XField xf;
    PatchSolution sol;
};

struct VerifyConfig {
    std::uint64_t seed = 0;
    double holder_exponent_hodograph = 1.0 / 3.0;
    double holder_exponent_physical = 1.0 / 6.0;
    // fraction of the deepest-level span trimmed from each side in FD checks
    double structural_tol = 1e-8;
};

// sup over pairs of |dv| / |dpos|^exponent with deterministic subsampling
// beyond the pair cap.
double holder_quotient(const std::vector<std::array<double, 2>>& positions,
                       const std::vector<double>& values, double exponent,
                       std::uint64_t seed = 0, std::size_t pair_cap = 1000000);

// One report per registered lemma/theorem-level check. grids must be ordered
// coarse -> fine; single-grid calls mark discretization-dependent checks
// as skipped. reciprocal_deepest_W, when present, enables the cross-form check.
std::vector<CheckReport> run_all(const std::vector<GridArtifacts>& grids,
                                 const DomainParams& params, const OmegaRegion& region,
                                 const HodographBoundary& boundary,
                                 const BernoulliBranch& branch, const StreamlineSpec& spec,
                                 const VerifyConfig& vcfg,
                                 const HodographField* reciprocal_field = nullptr);

std::string checks_to_json(const std::vector<CheckReport>& checks);

}  // namespace sspatch
