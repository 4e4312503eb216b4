#pragma once

#include "qholo/biphoton.hpp"
#include "qholo/grid.hpp"
#include "qholo/hologram.hpp"
#include "qholo/optics.hpp"
#include "qholo/scene.hpp"

namespace qholo {
// Reference implementations by literal quadrature over explicit kernels.
// Everything here is scalar loops over matrix entries, sharing only the
// field/grid types with the fast paths; single-threaded by design.
namespace oracle {

// pbar(x2) = sum_{x1 in wall} | sum_x zeta(x) k1(x1,x) k2(x2,x) dx |^2 dx1,
// evaluated with plain nested loops and no transform tricks.
Hologram dense_marginal(const ComplexField& zeta, const DenseKernel& h1,
                        const DenseKernel& h2, const DomainMask& wall,
                        const OracleBudget& budget = {});

struct DenseSceneTerm {
    int cell = 0;            // scatterer cell on the source-plane grid
    Complex eta{0.0, 0.0};
    DenseKernel illumination; // source -> scatterer plane
    DenseKernel scattering;   // scatterer plane -> wall
};

struct DenseDecomposition {
    Eigen::VectorXd direct_term;
    Eigen::VectorXd scatter_term;
    Eigen::VectorXd interference;
    std::vector<Eigen::VectorXcd> q;
    std::vector<Eigen::VectorXcd> r;
    Eigen::MatrixXcd wall_overlap;
};

// The three-term split evaluated by literal sums over dense kernels; the
// convention anchor for the fast path in scene.cpp (see docs/conventions.md).
DenseDecomposition dense_decomposition(const ComplexField& zeta, const DenseKernel& h0,
                                       const std::vector<DenseSceneTerm>& terms,
                                       const DenseKernel& h2, const DomainMask& wall,
                                       const OracleBudget& budget = {});

struct CheckResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass() const { return residual <= tolerance; }
};

// Self-contained randomized identity battery used by the oracle-check
// subcommand; seeds are fixed so the report is reproducible.
std::vector<CheckResult> run_check_battery(double tolerance_scale = 1.0);

} // namespace oracle
} // namespace qholo
