#include "qholo/optics.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "qholo/fft.hpp"

namespace qholo {

void OracleBudget::check_plane(const GridSpec& g, const char* what) const {
    if (g.total() > max_cells_per_plane)
        throw BudgetExceededError(std::string(what) + ": " + std::to_string(g.total()) +
                                  " cells exceeds cap " + std::to_string(max_cells_per_plane));
}

void OracleBudget::check_matrix(const GridSpec& out, const GridSpec& in, const char* what) const {
    check_plane(out, what);
    check_plane(in, what);
    const std::size_t bytes =
        sizeof(Complex) * static_cast<std::size_t>(out.total()) * static_cast<std::size_t>(in.total());
    if (bytes > max_matrix_bytes)
        throw BudgetExceededError(std::string(what) + ": dense matrix of " +
                                  std::to_string(bytes) + " bytes exceeds cap");
}

DenseKernel::DenseKernel(GridSpec in, GridSpec out, Eigen::MatrixXcd m)
    : input(in), output(out), k(std::move(m)) {
    if (k.rows() != output.total() || k.cols() != input.total())
        throw GridMismatchError("dense kernel dimensions do not match grids");
}

void write_qhk1(std::ostream& os, const Eigen::MatrixXcd& k) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "QHK1 %ld %ld\n", static_cast<long>(k.rows()),
                  static_cast<long>(k.cols()));
    os << buf;
    for (Eigen::Index r = 0; r < k.rows(); ++r)
        for (Eigen::Index c = 0; c < k.cols(); ++c) {
            const float re = static_cast<float>(k(r, c).real());
            const float im = static_cast<float>(k(r, c).imag());
            os.write(reinterpret_cast<const char*>(&re), sizeof(float));
            os.write(reinterpret_cast<const char*>(&im), sizeof(float));
        }
    if (!os) throw IoError("QHK1 write failed");
}

Eigen::MatrixXcd read_qhk1(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("QHK1: missing header");
    std::istringstream hs(line);
    std::string magic;
    long rows = 0, cols = 0;
    hs >> magic >> rows >> cols;
    if (magic != "QHK1" || rows <= 0 || cols <= 0)
        throw IoError("QHK1: bad header '" + line + "'");
    Eigen::MatrixXcd k(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) {
            float re = 0, im = 0;
            is.read(reinterpret_cast<char*>(&re), sizeof(float));
            is.read(reinterpret_cast<char*>(&im), sizeof(float));
            k(r, c) = Complex(re, im);
        }
    if (!is) throw IoError("QHK1: truncated payload");
    return k;
}

// ---------------------------------------------------------------------------

struct OpticalSystem::Node {
    SystemKind kind = SystemKind::Identity;
    GridSpec input;
    GridSpec output;

    // DenseMatrix
    Eigen::MatrixXcd matrix;
    // Fresnel: precomputed transfer function over FFT bins
    Eigen::VectorXcd transfer;
    double wavelength = 0.0;
    double distance = 0.0;
    double focal = 0.0;
    // ThinLens / Mask: pointwise transmittance
    Eigen::VectorXcd phase;
    // Cascade / Sum
    std::vector<OpticalSystem> members;
};

namespace {

Eigen::VectorXcd fresnel_transfer(const GridSpec& g, double lambda, double d) {
    Eigen::VectorXcd h(g.total());
    for (int iy = 0; iy < g.ny; ++iy) {
        const double ny2 = g.ndim == 2
                               ? std::pow(fft::frequency(iy, g.ny, g.extent_y), 2)
                               : 0.0;
        for (int ix = 0; ix < g.nx; ++ix) {
            const double nx2 = std::pow(fft::frequency(ix, g.nx, g.extent_x), 2);
            const double arg = -std::numbers::pi * lambda * d * (nx2 + ny2);
            h[g.index(ix, iy)] = Complex(std::cos(arg), std::sin(arg));
        }
    }
    return h;
}

Eigen::VectorXcd lens_phase(const GridSpec& g, double lambda, double f) {
    Eigen::VectorXcd t(g.total());
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const double x = g.coord_x(ix);
            const double y = g.coord_y(iy);
            const double arg = -std::numbers::pi * (x * x + y * y) / (lambda * f);
            t[g.index(ix, iy)] = Complex(std::cos(arg), std::sin(arg));
        }
    return t;
}

// Circular convolution via the cached transfer function; exactly unitary.
void apply_transfer(const GridSpec& g, const Eigen::VectorXcd& h, bool conjugate,
                    Eigen::VectorXcd& v) {
    fft::transform(g, v.data(), -1);
    if (conjugate)
        v = v.cwiseProduct(h.conjugate());
    else
        v = v.cwiseProduct(h);
    fft::transform(g, v.data(), +1);
    v /= static_cast<double>(g.total());
}

} // namespace

OpticalSystem OpticalSystem::identity(const GridSpec& g) {
    auto n = std::make_shared<Node>();
    n->kind = SystemKind::Identity;
    n->input = n->output = g;
    return OpticalSystem(std::move(n));
}

OpticalSystem OpticalSystem::dense(DenseKernel k) {
    auto n = std::make_shared<Node>();
    n->kind = SystemKind::DenseMatrix;
    n->input = k.input;
    n->output = k.output;
    n->matrix = std::move(k.k);
    return OpticalSystem(std::move(n));
}

OpticalSystem OpticalSystem::fresnel(const GridSpec& g, double wavelength, double distance) {
    if (distance == 0.0)
        throw DegenerateInputError("fresnel distance must be nonzero; use identity instead");
    if (!(wavelength > 0.0)) throw DegenerateInputError("wavelength must be positive");
    auto n = std::make_shared<Node>();
    n->kind = SystemKind::Fresnel;
    n->input = n->output = g;
    n->wavelength = wavelength;
    n->distance = distance;
    n->transfer = fresnel_transfer(g, wavelength, distance);
    return OpticalSystem(std::move(n));
}

OpticalSystem OpticalSystem::thin_lens(const GridSpec& g, double wavelength, double focal) {
    if (focal == 0.0) throw DegenerateInputError("lens focal length must be nonzero");
    if (!(wavelength > 0.0)) throw DegenerateInputError("wavelength must be positive");
    auto n = std::make_shared<Node>();
    n->kind = SystemKind::ThinLens;
    n->input = n->output = g;
    n->wavelength = wavelength;
    n->focal = focal;
    n->phase = lens_phase(g, wavelength, focal);
    return OpticalSystem(std::move(n));
}

OpticalSystem OpticalSystem::mask(ComplexField transmittance) {
    if (!transmittance.all_finite())
        throw DegenerateInputError("mask transmittance must be finite");
    auto n = std::make_shared<Node>();
    n->kind = SystemKind::Mask;
    n->input = n->output = transmittance.grid;
    n->phase = std::move(transmittance.values);
    return OpticalSystem(std::move(n));
}

OpticalSystem OpticalSystem::cascade(std::vector<OpticalSystem> members) {
    if (members.empty()) throw DegenerateInputError("cascade needs at least one member");
    for (std::size_t i = 1; i < members.size(); ++i)
        if (members[i - 1].output_grid() != members[i].input_grid())
            throw GridMismatchError("cascade members are not grid-compatible end to end");
    auto n = std::make_shared<Node>();
    n->kind = SystemKind::Cascade;
    n->input = members.front().input_grid();
    n->output = members.back().output_grid();
    n->members = std::move(members);
    return OpticalSystem(std::move(n));
}

OpticalSystem OpticalSystem::sum(std::vector<OpticalSystem> members) {
    if (members.empty()) throw DegenerateInputError("sum needs at least one member");
    for (std::size_t i = 1; i < members.size(); ++i) {
        if (members[i].input_grid() != members[0].input_grid() ||
            members[i].output_grid() != members[0].output_grid())
            throw GridMismatchError("sum members must share input and output grids");
    }
    auto n = std::make_shared<Node>();
    n->kind = SystemKind::Sum;
    n->input = members.front().input_grid();
    n->output = members.front().output_grid();
    n->members = std::move(members);
    return OpticalSystem(std::move(n));
}

const GridSpec& OpticalSystem::input_grid() const { return node_->input; }
const GridSpec& OpticalSystem::output_grid() const { return node_->output; }
SystemKind OpticalSystem::kind() const { return node_->kind; }

ComplexField OpticalSystem::forward(const ComplexField& f) const {
    require_same_grid(f.grid, node_->input, "apply_forward");
    switch (node_->kind) {
    case SystemKind::Identity:
        return f;
    case SystemKind::DenseMatrix: {
        ComplexField out(node_->output);
        out.values = node_->matrix * f.values * node_->input.cell_measure();
        return out;
    }
    case SystemKind::Fresnel: {
        ComplexField out = f;
        apply_transfer(node_->input, node_->transfer, false, out.values);
        return out;
    }
    case SystemKind::ThinLens:
    case SystemKind::Mask: {
        ComplexField out(node_->output);
        out.values = f.values.cwiseProduct(node_->phase);
        return out;
    }
    case SystemKind::Cascade: {
        ComplexField cur = f;
        for (const auto& m : node_->members) cur = m.forward(cur);
        return cur;
    }
    case SystemKind::Sum: {
        ComplexField acc = node_->members.front().forward(f);
        for (std::size_t i = 1; i < node_->members.size(); ++i)
            acc.values += node_->members[i].forward(f).values;
        return acc;
    }
    }
    throw std::logic_error("unreachable system kind");
}

ComplexField OpticalSystem::adjoint(const ComplexField& g) const {
    require_same_grid(g.grid, node_->output, "apply_adjoint");
    switch (node_->kind) {
    case SystemKind::Identity:
        return g;
    case SystemKind::DenseMatrix: {
        ComplexField out(node_->input);
        out.values = node_->matrix.adjoint() * g.values * node_->output.cell_measure();
        return out;
    }
    case SystemKind::Fresnel: {
        ComplexField out = g;
        apply_transfer(node_->input, node_->transfer, true, out.values);
        return out;
    }
    case SystemKind::ThinLens:
    case SystemKind::Mask: {
        ComplexField out(node_->input);
        out.values = g.values.cwiseProduct(node_->phase.conjugate());
        return out;
    }
    case SystemKind::Cascade: {
        ComplexField cur = g;
        for (auto it = node_->members.rbegin(); it != node_->members.rend(); ++it)
            cur = it->adjoint(cur);
        return cur;
    }
    case SystemKind::Sum: {
        ComplexField acc = node_->members.front().adjoint(g);
        for (std::size_t i = 1; i < node_->members.size(); ++i)
            acc.values += node_->members[i].adjoint(g).values;
        return acc;
    }
    }
    throw std::logic_error("unreachable system kind");
}

std::string OpticalSystem::describe() const {
    switch (node_->kind) {
    case SystemKind::Identity: return "identity";
    case SystemKind::DenseMatrix: return "dense";
    case SystemKind::Fresnel: {
        std::ostringstream os;
        os << "fresnel(lambda=" << node_->wavelength << ", d=" << node_->distance << ")";
        return os.str();
    }
    case SystemKind::ThinLens: {
        std::ostringstream os;
        os << "lens(f=" << node_->focal << ")";
        return os.str();
    }
    case SystemKind::Mask: return "mask";
    case SystemKind::Cascade: {
        std::string s = "cascade[";
        for (std::size_t i = 0; i < node_->members.size(); ++i)
            s += (i ? ", " : "") + node_->members[i].describe();
        return s + "]";
    }
    case SystemKind::Sum: {
        std::string s = "sum[";
        for (std::size_t i = 0; i < node_->members.size(); ++i)
            s += (i ? ", " : "") + node_->members[i].describe();
        return s + "]";
    }
    }
    return "?";
}

OpticalSystem compose(const OpticalSystem& outer, const OpticalSystem& inner) {
    return OpticalSystem::cascade({inner, outer});
}

ComplexField point_response(const OpticalSystem& sys, int cell) {
    if (cell < 0 || cell >= sys.input_grid().total())
        throw IndexRangeError("point_response cell out of range");
    return sys.forward(ComplexField::delta(sys.input_grid(), cell));
}

DenseKernel to_dense(const OpticalSystem& sys, const OracleBudget& budget) {
    budget.check_matrix(sys.output_grid(), sys.input_grid(), "to_dense");
    const int nin = sys.input_grid().total();
    const int nout = sys.output_grid().total();
    Eigen::MatrixXcd k(nout, nin);
    for (int c = 0; c < nin; ++c) k.col(c) = point_response(sys, c).values;
    return DenseKernel(sys.input_grid(), sys.output_grid(), std::move(k));
}

ComplexField apply_transpose(const OpticalSystem& sys, const ComplexField& f) {
    return conj(sys.adjoint(conj(f)));
}

ComplexField apply_conjugate(const OpticalSystem& sys, const ComplexField& f) {
    return conj(sys.forward(conj(f)));
}

DenseKernel fresnel_dense_kernel(const GridSpec& out, const GridSpec& in,
                                 double wavelength, double distance) {
    if (out.ndim != in.ndim)
        throw GridMismatchError("fresnel_dense_kernel: dimensionality mismatch");
    if (distance == 0.0) throw DegenerateInputError("fresnel distance must be nonzero");
    const Complex i_unit(0.0, 1.0);
    const Complex denom = (in.ndim == 1)
                              ? std::sqrt(i_unit * wavelength * distance)
                              : i_unit * wavelength * distance;
    Eigen::MatrixXcd k(out.total(), in.total());
    for (int oy = 0; oy < out.ny; ++oy)
        for (int ox = 0; ox < out.nx; ++ox) {
            const int r = out.index(ox, oy);
            const double xo = out.coord_x(ox);
            const double yo = out.coord_y(oy);
            for (int iy = 0; iy < in.ny; ++iy)
                for (int ix = 0; ix < in.nx; ++ix) {
                    const double ux = xo - in.coord_x(ix);
                    const double uy = yo - in.coord_y(iy);
                    const double arg =
                        std::numbers::pi * (ux * ux + uy * uy) / (wavelength * distance);
                    k(r, in.index(ix, iy)) = Complex(std::cos(arg), std::sin(arg)) / denom;
                }
        }
    return DenseKernel(in, out, std::move(k));
}

} // namespace qholo
