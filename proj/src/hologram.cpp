#include "qholo/hologram.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qholo/hash.hpp"

namespace qholo {

Hologram::Hologram(const GridSpec& g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.total())
        throw GridMismatchError("hologram value count does not match grid");
}

ComplexField Hologram::as_field() const {
    ComplexField f(grid);
    for (int i = 0; i < values.size(); ++i) f.values[i] = Complex(values[i], 0.0);
    return f;
}

Eigen::VectorXd clamp_nonnegative(Eigen::VectorXd v, double scale) {
    const double floor = -1e-15 * std::max(scale, 1.0);
    for (int i = 0; i < v.size(); ++i) {
        if (v[i] < floor)
            throw DegenerateInputError("value " + std::to_string(v[i]) +
                                       " is negative beyond rounding floor");
        if (v[i] < 0.0) v[i] = 0.0;
    }
    return v;
}

void write_hologram_csv(std::ostream& os, const Hologram& h) {
    char buf[128];
    const GridSpec& g = h.grid;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            if (g.ndim == 1)
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", g.coord_x(ix),
                              h.values[g.index(ix, iy)]);
            else
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", g.coord_x(ix),
                              g.coord_y(iy), h.values[g.index(ix, iy)]);
            os << buf;
        }
    if (!os) throw IoError("hologram CSV write failed");
}

void save_hologram_csv(const std::string& path, const Hologram& h) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    write_hologram_csv(os, h);
}

Hologram load_hologram_csv(const std::string& path, const GridSpec& grid) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open for read: " + path);
    Hologram h(grid);
    std::string line;
    int i = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (i >= grid.total()) throw IoError("hologram CSV: too many rows for grid");
        const auto pos = line.rfind(',');
        if (pos == std::string::npos) throw IoError("hologram CSV: malformed row");
        h.values[i++] = std::strtod(line.c_str() + pos + 1, nullptr);
    }
    if (i != grid.total()) throw IoError("hologram CSV: row count does not match grid");
    return h;
}

void save_hologram_qhf1(const std::string& path, const Hologram& h) {
    save_qhf1(path, h.as_field());
}

std::uint64_t hologram_hash(const Hologram& h) {
    Fnv1a hash;
    hash.update(h.grid.describe());
    hash.update(h.values.data(), sizeof(double) * static_cast<std::size_t>(h.values.size()));
    return hash.digest();
}

} // namespace qholo
