#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "qholo/grid.hpp"

namespace qholo {

// Dense caps for to_dense / kernel materialization. Exceeding a cap throws
// BudgetExceededError; nothing is ever silently truncated.
struct OracleBudget {
    int max_cells_per_plane = 4096;
    std::size_t max_matrix_bytes = 512ull << 20;

    void check_plane(const GridSpec& g, const char* what) const;
    void check_matrix(const GridSpec& out, const GridSpec& in, const char* what) const;
};

// Explicit kernel matrix K(out_cell, in_cell) interpreted as h(x_out, x_in).
// Forward application is quadrature-weighted: (K f) * in_cell_measure.
struct DenseKernel {
    GridSpec input;
    GridSpec output;
    Eigen::MatrixXcd k; // rows: output cells, cols: input cells

    DenseKernel() = default;
    DenseKernel(GridSpec in, GridSpec out, Eigen::MatrixXcd m);
};

// QHK1 kernel file: ASCII header "QHK1 <n_out> <n_in>", newline, then
// little-endian complex64 (float32 re,im) entries row-major. Grid metadata is
// not stored; loaders attach grids separately.
void write_qhk1(std::ostream& os, const Eigen::MatrixXcd& k);
Eigen::MatrixXcd read_qhk1(std::istream& is);

enum class SystemKind { Identity, DenseMatrix, Fresnel, ThinLens, Mask, Cascade, Sum };

// Immutable linear optical system with forward and adjoint application.
// Adjoint means the conjugate-transpose kernel under the grids' quadrature
// inner products, so <u, forward(v)> = <adjoint(u), v> holds for every kind.
class OpticalSystem {
public:
    OpticalSystem() = default;

    static OpticalSystem identity(const GridSpec& g);
    static OpticalSystem dense(DenseKernel k);
    // Paraxial free-space propagator over distance d != 0, implemented as a
    // circular convolution with transfer function exp(-i pi lambda d |nu|^2);
    // exactly unitary, adjoint equals propagation by -d.
    static OpticalSystem fresnel(const GridSpec& g, double wavelength, double distance);
    // Pure phase exp(-i pi |x|^2 / (lambda f)).
    static OpticalSystem thin_lens(const GridSpec& g, double wavelength, double focal);
    static OpticalSystem mask(ComplexField transmittance);
    // members applied first-to-last on forward.
    static OpticalSystem cascade(std::vector<OpticalSystem> members);
    // grid-compatible members added together (superposition of paths).
    static OpticalSystem sum(std::vector<OpticalSystem> members);

    bool valid() const { return node_ != nullptr; }
    const GridSpec& input_grid() const;
    const GridSpec& output_grid() const;
    SystemKind kind() const;

    ComplexField forward(const ComplexField& f) const;
    ComplexField adjoint(const ComplexField& g) const;
    std::string describe() const;

private:
    struct Node;
    explicit OpticalSystem(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

// forward(outer) after forward(inner); adjoint composes in reverse.
OpticalSystem compose(const OpticalSystem& outer, const OpticalSystem& inner);

// Column h(. , x_in) of the system kernel: forward applied to the discrete
// delta at `cell`.
ComplexField point_response(const OpticalSystem& sys, int cell);

// Kernel extraction by probing with all input deltas. Budget-guarded.
DenseKernel to_dense(const OpticalSystem& sys, const OracleBudget& budget = {});

// Applies the transposed (not conjugated) kernel: transpose(S) u = conj(S^H conj(u)).
ComplexField apply_transpose(const OpticalSystem& sys, const ComplexField& f);
// Applies the elementwise-conjugated kernel: conj(S) u = conj(S conj(u)).
ComplexField apply_conjugate(const OpticalSystem& sys, const ComplexField& f);

// Aperiodic Fresnel kernel h(x_out, x_in) = exp(i pi |x_out-x_in|^2/(lambda d))
// / (i lambda d)^{D/2} sampled between two (possibly different) grids of equal
// dimensionality. This is the quadrature oracle for FFT propagation and the
// bridge between planes with different sampling.
DenseKernel fresnel_dense_kernel(const GridSpec& out, const GridSpec& in,
                                 double wavelength, double distance);

} // namespace qholo
