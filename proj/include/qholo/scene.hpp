#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "qholo/biphoton.hpp"
#include "qholo/grid.hpp"
#include "qholo/hologram.hpp"
#include "qholo/optics.hpp"

namespace qholo {

// Point scatterer: transverse position + axial depth inside the chamber
// (measured from the opening plane), with a dimensionless complex strength.
struct PointScatterer {
    double x = 0.0;
    double y = 0.0; // ignored on 1-D grids
    double depth = 0.0;
    Complex eta{0.0, 0.0};
};

// Axial layout of the chamber and its optics. The scatterer/source planes
// share one transverse grid; the wall is a separate planar segment. An
// optional thin lens sits at the source plane; it is always part of the
// illumination path and joins the direct path only when lens_in_direct_path
// is set (both cascade choices are legitimate and are preset-selectable).
struct ChamberGeometry {
    double wavelength = 0.0;
    double opening_distance = 0.0;  // source plane -> chamber opening
    double wall_distance = 0.0;     // opening -> wall plane (chamber depth)
    std::optional<double> lens_focal;
    bool lens_in_direct_path = true;

    double source_to_wall() const { return opening_distance + wall_distance; }
    double source_to_depth(double depth) const { return opening_distance + depth; }
};

// The concealed object and its per-path optical systems: direct path h0
// (source -> wall), and per scatterer the illumination path (source ->
// scatterer plane) and scattering path (scatterer plane -> wall).
class Scene {
public:
    struct Slot {
        PointScatterer given;
        int cell = 0;           // snapped cell on the scatterer-plane grid
        double snap_x = 0.0;    // snap offsets actually applied
        double snap_y = 0.0;
        OpticalSystem illumination; // source grid -> scatterer plane (= source grid)
        OpticalSystem scattering;   // scatterer plane -> wall grid
    };

    // Derived construction: systems are regenerated deterministically from
    // the geometry (identical inputs give bitwise identical kernels).
    static Scene from_geometry(const ChamberGeometry& geom, const GridSpec& source,
                               const GridSpec& wall_grid, DomainMask wall,
                               const std::vector<PointScatterer>& scatterers);

    // Explicit-systems construction for synthetic (e.g. random dense) tests.
    static Scene from_systems(OpticalSystem h0, DomainMask wall,
                              std::vector<Slot> slots);

    const GridSpec& source_grid() const { return h0_.input_grid(); }
    const GridSpec& wall_grid() const { return h0_.output_grid(); }
    const OpticalSystem& direct_path() const { return h0_; }
    const DomainMask& wall() const { return wall_; }
    const std::vector<Slot>& scatterers() const { return slots_; }
    int count() const { return static_cast<int>(slots_.size()); }
    const std::optional<ChamberGeometry>& geometry() const { return geometry_; }

    std::uint64_t hash() const;

private:
    OpticalSystem h0_;
    DomainMask wall_;
    std::vector<Slot> slots_;
    std::optional<ChamberGeometry> geometry_;
};

// h1 = h0 + sum_j cascade(illumination_j, point mask eta_j, scattering_j):
// the direct amplitude plus one single-scattering path per scatterer, added
// coherently and not depleted from the direct path.
OpticalSystem effective_h1(const Scene& scene);

// Pump amplitude delivered to scatterer j:
// sum_x hI_j(x_j, x) zeta(x) dx. Linear in zeta.
Complex illumination_amplitude(const Scene& scene, int j, const PumpProfile& pump);

// q_j(x2) = sum_x zeta(x) h2(x2, x) hI_j(x_j, x) dx: the scatterer's
// backward-illumination image modulated by the pump and carried through h2.
ComplexField q_field(const Scene& scene, int j, const PumpProfile& pump,
                     const OpticalSystem& h2);

// f_j(x) = sum_{x1 in wall} conj(h0(x1, x)) hS_j(x1, x_j) dx1: the scattered
// wall wave carried backward through the direct path.
ComplexField f_kernel(const Scene& scene, int j);

// r_j(x2) = sum_x conj(zeta(x)) f_j(x) conj(h2(x2, x)) dx.
ComplexField r_field(const Scene& scene, int j, const PumpProfile& pump,
                     const OpticalSystem& h2);

// Wall-overlap kernel between scattering paths:
// W(i, j) = sum_{x1 in wall} hS_i(x1, x_i) conj(hS_j(x1, x_j)) dx1.
// Hermitian PSD; its off-diagonal entries are the cross-scatterer terms.
Eigen::MatrixXcd wall_overlap_kernel(const Scene& scene);

// Marginal split into direct, scatterer-only and interference parts:
//   pbar = p0 + p_scatter + interference   (exact discrete identity)
// with coupling kappa_j = eta_j * scatterer-plane cell measure,
//   p_scatter(x2)    = sum_ij kappa_i conj(kappa_j) W(i,j) q_i conj(q_j)
//   interference(x2) = 2 Re sum_j kappa_j q_j(x2) r_j(x2).
struct DecompositionResult {
    Hologram direct_term;               // p0
    Hologram scatter_term;              // p_scatter, includes cross terms
    Eigen::VectorXd interference;       // signed, real
    std::vector<ComplexField> q;        // per scatterer, detector grid
    std::vector<ComplexField> r;
    std::vector<Complex> illumination;  // pump amplitude at each scatterer
    Eigen::MatrixXcd wall_overlap;      // W
    std::vector<Complex> coupling;      // kappa_j

    // p_scatter recomputed without the W off-diagonal: what superposing
    // independent single-scatterer terms would give.
    Eigen::VectorXd scatter_term_without_cross() const;
};

DecompositionResult hologram_decomposition(const Scene& scene, const PumpProfile& pump,
                                           const OpticalSystem& h2, int threads = 1);

} // namespace qholo
