#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "qholo/errors.hpp"

namespace qholo {

using Complex = std::complex<double>;

// Uniform cell-centered Cartesian grid on a transverse plane, 1-D or 2-D.
// Axis 0 is x (fast storage axis), axis 1 is y (slow). Cell centers are
// (i + 0.5 - n/2) * dx, so the grid spans [-extent/2, extent/2].
struct GridSpec {
    int ndim = 1;
    int nx = 0;
    int ny = 1;              // 1 when ndim == 1
    double extent_x = 0.0;
    double extent_y = 0.0;   // 0 when ndim == 1

    static GridSpec line(int n, double extent);
    static GridSpec plane(int nx, int ny, double extent_x, double extent_y);

    int total() const { return nx * ny; }
    double dx() const { return extent_x / nx; }
    double dy() const { return ndim == 2 ? extent_y / ny : 1.0; }
    // Integration measure of one cell: dx (1-D) or dx*dy (2-D).
    double cell_measure() const { return ndim == 2 ? dx() * dy() : dx(); }

    double coord_x(int ix) const { return (ix + 0.5 - nx / 2.0) * dx(); }
    double coord_y(int iy) const { return ndim == 2 ? (iy + 0.5 - ny / 2.0) * dy() : 0.0; }

    int index(int ix, int iy = 0) const { return iy * nx + ix; }
    int ix_of(int idx) const { return idx % nx; }
    int iy_of(int idx) const { return idx / nx; }
    // Nearest cell to a physical point; clamped flag reports out-of-extent points.
    int nearest_cell(double x, double y, bool* clamped = nullptr) const;

    bool operator==(const GridSpec& o) const;
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
    std::string describe() const;
};

// Throws GridMismatchError unless a == b. `what` names the operation.
void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

// Complex amplitude sampled on a grid. |value|^2 * cell_measure is a
// probability weight, so fields scale like amplitude per sqrt(area).
struct ComplexField {
    GridSpec grid;
    Eigen::VectorXcd values;

    ComplexField() = default;
    explicit ComplexField(const GridSpec& g) : grid(g), values(Eigen::VectorXcd::Zero(g.total())) {}
    ComplexField(const GridSpec& g, Eigen::VectorXcd v);

    Complex& operator[](int i) { return values[i]; }
    const Complex& operator[](int i) const { return values[i]; }
    int size() const { return static_cast<int>(values.size()); }

    bool all_finite() const;
    // Discrete delta: 1/cell_measure at `cell`, zero elsewhere.
    static ComplexField delta(const GridSpec& g, int cell);
    static ComplexField constant(const GridSpec& g, Complex value);
    static ComplexField ones(const GridSpec& g) { return constant(g, 1.0); }
};

// Integration domain: a membership flag per cell of some grid.
struct DomainMask {
    GridSpec grid;
    std::vector<std::uint8_t> inside;

    DomainMask() = default;
    static DomainMask full(const GridSpec& g);
    static DomainMask from_predicate(const GridSpec& g,
                                     const std::function<bool(double, double)>& pred);

    int count() const;
    bool empty() const { return count() == 0; }
    bool contains(int idx) const { return inside[static_cast<std::size_t>(idx)] != 0; }
    std::vector<int> cells() const;
};

// sum_{cells in mask} conj(a) * b * cell_measure. Conjugate-linear in `a`,
// linear in `b`.
Complex inner_product(const ComplexField& a, const ComplexField& b, const DomainMask& mask);
Complex inner_product(const ComplexField& a, const ComplexField& b);

double norm(const ComplexField& f);

// Rescales by a positive real factor so that <f,f> over the full grid is 1.
// Throws DegenerateInputError on an all-zero field.
ComplexField normalize(const ComplexField& f);

ComplexField pointwise_multiply(const ComplexField& f, const ComplexField& g);

// Zeroes values outside the mask. Idempotent.
ComplexField restrict_to(const ComplexField& f, const DomainMask& mask);

ComplexField conj(const ComplexField& f);

// QHF1 raw field format: ASCII header "QHF1 <ndim> <n1> [n2] <ext1> [ext2]",
// newline, then little-endian (re,im) float64 pairs in row-major order.
// Round-trips bit-exactly.
void write_qhf1(std::ostream& os, const ComplexField& f);
ComplexField read_qhf1(std::istream& is);
void save_qhf1(const std::string& path, const ComplexField& f);
ComplexField load_qhf1(const std::string& path);

// Provenance fingerprint: FNV-1a over the QHF1 byte serialization.
std::uint64_t field_hash(const ComplexField& f);
std::uint64_t mask_hash(const DomainMask& m);

} // namespace qholo
