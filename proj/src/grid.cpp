#include "qholo/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "qholo/hash.hpp"

namespace qholo {

GridSpec GridSpec::line(int n, double extent) {
    if (n < 2) throw DegenerateInputError("grid needs at least 2 samples per axis");
    if (!(extent > 0.0)) throw DegenerateInputError("grid extent must be positive");
    GridSpec g;
    g.ndim = 1;
    g.nx = n;
    g.ny = 1;
    g.extent_x = extent;
    g.extent_y = 0.0;
    return g;
}

GridSpec GridSpec::plane(int nx, int ny, double extent_x, double extent_y) {
    if (nx < 2 || ny < 2) throw DegenerateInputError("grid needs at least 2 samples per axis");
    if (!(extent_x > 0.0) || !(extent_y > 0.0))
        throw DegenerateInputError("grid extent must be positive");
    GridSpec g;
    g.ndim = 2;
    g.nx = nx;
    g.ny = ny;
    g.extent_x = extent_x;
    g.extent_y = extent_y;
    return g;
}

int GridSpec::nearest_cell(double x, double y, bool* clamped) const {
    auto snap = [](double v, int n, double d) {
        int i = static_cast<int>(std::floor(v / d + n / 2.0));
        bool c = false;
        if (i < 0) { i = 0; c = true; }
        if (i >= n) { i = n - 1; c = true; }
        return std::pair<int, bool>(i, c);
    };
    auto [ix, cx] = snap(x, nx, dx());
    bool any = cx;
    int iy = 0;
    if (ndim == 2) {
        auto [j, cy] = snap(y, ny, dy());
        iy = j;
        any = any || cy;
    }
    if (clamped) *clamped = any;
    return index(ix, iy);
}

bool GridSpec::operator==(const GridSpec& o) const {
    return ndim == o.ndim && nx == o.nx && ny == o.ny && extent_x == o.extent_x &&
           extent_y == o.extent_y;
}

std::string GridSpec::describe() const {
    std::ostringstream os;
    if (ndim == 1)
        os << "grid(1d " << nx << " cells, extent " << extent_x << ")";
    else
        os << "grid(2d " << nx << "x" << ny << " cells, extent " << extent_x << "x"
           << extent_y << ")";
    return os.str();
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (a != b)
        throw GridMismatchError(std::string(what) + ": " + a.describe() + " vs " +
                                b.describe());
}

ComplexField::ComplexField(const GridSpec& g, Eigen::VectorXcd v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.total())
        throw GridMismatchError("field value count does not match grid");
}

bool ComplexField::all_finite() const {
    for (int i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag())) return false;
    return true;
}

ComplexField ComplexField::delta(const GridSpec& g, int cell) {
    if (cell < 0 || cell >= g.total()) throw IndexRangeError("delta cell out of range");
    ComplexField f(g);
    f.values[cell] = Complex(1.0 / g.cell_measure(), 0.0);
    return f;
}

ComplexField ComplexField::constant(const GridSpec& g, Complex value) {
    ComplexField f(g);
    f.values.setConstant(value);
    return f;
}

DomainMask DomainMask::full(const GridSpec& g) {
    DomainMask m;
    m.grid = g;
    m.inside.assign(static_cast<std::size_t>(g.total()), 1);
    return m;
}

DomainMask DomainMask::from_predicate(const GridSpec& g,
                                      const std::function<bool(double, double)>& pred) {
    DomainMask m;
    m.grid = g;
    m.inside.assign(static_cast<std::size_t>(g.total()), 0);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            if (pred(g.coord_x(ix), g.coord_y(iy)))
                m.inside[static_cast<std::size_t>(g.index(ix, iy))] = 1;
    if (m.count() == 0) throw DegenerateInputError("mask selects no cells");
    return m;
}

int DomainMask::count() const {
    int c = 0;
    for (auto v : inside) c += (v != 0);
    return c;
}

std::vector<int> DomainMask::cells() const {
    std::vector<int> out;
    out.reserve(inside.size());
    for (std::size_t i = 0; i < inside.size(); ++i)
        if (inside[i]) out.push_back(static_cast<int>(i));
    return out;
}

Complex inner_product(const ComplexField& a, const ComplexField& b, const DomainMask& mask) {
    require_same_grid(a.grid, b.grid, "inner_product");
    require_same_grid(a.grid, mask.grid, "inner_product mask");
    Complex acc(0.0, 0.0);
    const int n = a.size();
    for (int i = 0; i < n; ++i)
        if (mask.inside[static_cast<std::size_t>(i)])
            acc += std::conj(a.values[i]) * b.values[i];
    return acc * a.grid.cell_measure();
}

Complex inner_product(const ComplexField& a, const ComplexField& b) {
    require_same_grid(a.grid, b.grid, "inner_product");
    Complex acc(0.0, 0.0);
    for (int i = 0; i < a.size(); ++i) acc += std::conj(a.values[i]) * b.values[i];
    return acc * a.grid.cell_measure();
}

double norm(const ComplexField& f) { return std::sqrt(inner_product(f, f).real()); }

ComplexField normalize(const ComplexField& f) {
    const double n = norm(f);
    if (!(n > 0.0)) throw DegenerateInputError("cannot normalize an all-zero field");
    ComplexField out = f;
    out.values /= n;
    return out;
}

ComplexField pointwise_multiply(const ComplexField& f, const ComplexField& g) {
    require_same_grid(f.grid, g.grid, "pointwise_multiply");
    ComplexField out(f.grid);
    out.values = f.values.cwiseProduct(g.values);
    return out;
}

ComplexField restrict_to(const ComplexField& f, const DomainMask& mask) {
    require_same_grid(f.grid, mask.grid, "restrict");
    ComplexField out = f;
    for (int i = 0; i < out.size(); ++i)
        if (!mask.inside[static_cast<std::size_t>(i)]) out.values[i] = Complex(0.0, 0.0);
    return out;
}

ComplexField conj(const ComplexField& f) {
    ComplexField out = f;
    out.values = out.values.conjugate();
    return out;
}

namespace {

std::string qhf1_header(const GridSpec& g) {
    char buf[160];
    if (g.ndim == 1)
        std::snprintf(buf, sizeof(buf), "QHF1 1 %d %.17g\n", g.nx, g.extent_x);
    else
        std::snprintf(buf, sizeof(buf), "QHF1 2 %d %d %.17g %.17g\n", g.nx, g.ny,
                      g.extent_x, g.extent_y);
    return std::string(buf);
}

} // namespace

void write_qhf1(std::ostream& os, const ComplexField& f) {
    os << qhf1_header(f.grid);
    // Interleaved (re,im) float64; native layout of std::complex<double> is
    // exactly that, and the target is little-endian.
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(sizeof(Complex) * f.values.size()));
    if (!os) throw IoError("QHF1 write failed");
}

ComplexField read_qhf1(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("QHF1: missing header");
    std::istringstream hs(line);
    std::string magic;
    int ndim = 0;
    hs >> magic >> ndim;
    if (magic != "QHF1" || (ndim != 1 && ndim != 2))
        throw IoError("QHF1: bad header '" + line + "'");
    GridSpec g;
    if (ndim == 1) {
        int n = 0;
        double e = 0;
        hs >> n >> e;
        if (!hs) throw IoError("QHF1: bad 1-D header fields");
        g = GridSpec::line(n, e);
    } else {
        int nx = 0, ny = 0;
        double ex = 0, ey = 0;
        hs >> nx >> ny >> ex >> ey;
        if (!hs) throw IoError("QHF1: bad 2-D header fields");
        g = GridSpec::plane(nx, ny, ex, ey);
    }
    ComplexField f(g);
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(sizeof(Complex) * f.values.size()));
    if (!is) throw IoError("QHF1: truncated payload");
    return f;
}

void save_qhf1(const std::string& path, const ComplexField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    write_qhf1(os, f);
}

ComplexField load_qhf1(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for read: " + path);
    return read_qhf1(is);
}

std::uint64_t field_hash(const ComplexField& f) {
    std::ostringstream os(std::ios::binary);
    write_qhf1(os, f);
    return fnv1a(os.str());
}

std::uint64_t mask_hash(const DomainMask& m) {
    Fnv1a h;
    h.update(m.grid.describe());
    h.update(m.inside.data(), m.inside.size());
    return h.digest();
}

} // namespace qholo
