#pragma once

#include <Eigen/Dense>

#include "qholo/grid.hpp"
#include "qholo/hologram.hpp"
#include "qholo/optics.hpp"

namespace qholo {

// Source-plane pair-emission amplitude. When normalized, the squared modulus
// integrates to one over the source plane.
struct PumpProfile {
    ComplexField zeta;
    bool normalized = false;

    static PumpProfile from_field(ComplexField f, bool normalize_it = true);
    const GridSpec& grid() const { return zeta.grid; }
};

// Joint detection amplitude A(x1, x2) over wall cells x rows, detector cells
// columns.
struct BiphotonAmplitude {
    GridSpec wall_grid;
    GridSpec detector_grid;
    Eigen::MatrixXcd a; // rows: x1 (wall), cols: x2 (detector)
};

// p(x1, x2) = |A(x1, x2)|^2, raw scale (no prefactor).
struct CoincidenceMap {
    GridSpec wall_grid;
    GridSpec detector_grid;
    Eigen::MatrixXd p;
};

// Two-point wall-erasure kernel over source-plane cell pairs.
// g1(x, x') = sum_{x1 in wall} h1(x1, x) conj(h1(x1, x')) * dx1.
// Hermitian PSD; collapses to the identity kernel (1/cell_measure on the
// diagonal) when h1 is unitary and the wall covers the full output plane.
struct CoherenceKernel {
    GridSpec source_grid;
    Eigen::MatrixXcd g1;
};

// A(x1, x2) = sum_x zeta(x) h1(x1, x) h2(x2, x) dx. Column x2 is evaluated as
// h1.forward(zeta .* row of h2 at x2). Budget-guarded materialization.
BiphotonAmplitude biphoton_amplitude(const PumpProfile& pump, const OpticalSystem& h1,
                                     const OpticalSystem& h2,
                                     const OracleBudget& budget = {});

// Same amplitude accumulated source-cell by source-cell from point responses
// of both systems; used to cross-check evaluation order.
BiphotonAmplitude biphoton_amplitude_by_probes(const PumpProfile& pump,
                                               const OpticalSystem& h1,
                                               const OpticalSystem& h2,
                                               const OracleBudget& budget = {});

CoincidenceMap coincidence_rate(const BiphotonAmplitude& a);

// pbar(x2) = sum_{x1 in wall} p(x1, x2) dx1.
Hologram marginal_hologram(const CoincidenceMap& p, const DomainMask& wall);

// Streaming marginal that never materializes A: iterates x1 over the wall
// mask, accumulating |h2.forward(zeta .* h1row(x1))|^2 dx1. Work is chunked
// over x1 with a fixed reduction order, so the result is bitwise independent
// of the thread count.
Hologram scene_marginal(const PumpProfile& pump, const OpticalSystem& h1,
                        const OpticalSystem& h2, const DomainMask& wall,
                        int threads = 1);

CoherenceKernel coherence_kernel(const OpticalSystem& h1, const DomainMask& wall,
                                 const OracleBudget& budget = {});

// pbar(x2) = sum_{x,x'} zeta(x) conj(zeta(x')) h2(x2,x) conj(h2(x2,x'))
//            g1(x,x') dx dx'  — the kernel-route evaluation of the marginal.
Hologram marginal_via_kernel(const PumpProfile& pump, const CoherenceKernel& g1,
                             const OpticalSystem& h2, const OracleBudget& budget = {});

// Detector-2 singles rate of the reduced single-photon state:
// s(x2) = sum_x |zeta(x)|^2 |h2(x2, x)|^2 dx. Independent of h1 and the scene.
Hologram singles_rate_detector2(const PumpProfile& pump, const OpticalSystem& h2);

// Separable classical baseline: joint rate s1(x1) s2(x2) marginalized over the
// wall; proportional to the detector-2 singles rate for every scene.
Hologram classical_factorized_marginal(const PumpProfile& pump, const OpticalSystem& h1,
                                       const OpticalSystem& h2, const DomainMask& wall);

} // namespace qholo
