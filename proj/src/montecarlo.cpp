#include "qholo/montecarlo.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qholo/parallel.hpp"

namespace qholo {

EventStream sample_pairs(const CoincidenceMap& p, const DomainMask& wall, std::uint64_t n,
                         std::uint64_t seed, int threads) {
    require_same_grid(p.wall_grid, wall.grid, "sample_pairs wall");
    if (n == 0) throw DegenerateInputError("sample_pairs needs n >= 1");
    if (wall.empty()) throw DegenerateInputError("sample_pairs over an empty wall mask");

    // Flattened masses over (x1 in wall) x (all x2), row-major in x1.
    const std::vector<int> rows = wall.cells();
    const int n2 = p.detector_grid.total();
    std::vector<double> cum;
    cum.reserve(rows.size() * static_cast<std::size_t>(n2));
    double total = 0.0;
    for (int x1 : rows)
        for (int x2 = 0; x2 < n2; ++x2) {
            total += p.p(x1, x2);
            cum.push_back(total);
        }
    if (!(total > 0.0))
        throw DegenerateInputError("coincidence map has zero mass on the wall mask");

    EventStream s;
    s.seed = seed;
    s.x1_cells.resize(n);
    s.x2_cells.resize(n);

    constexpr std::uint64_t kChunk = 65536;
    for_each_chunk(n, kChunk, threads,
                   [&](std::size_t first, std::size_t last, std::size_t chunk) {
                       SplitMix64 rng(SplitMix64::sub_seed(seed, chunk));
                       for (std::size_t i = first; i < last; ++i) {
                           const double u = rng.next_double() * total;
                           const auto it = std::upper_bound(cum.begin(), cum.end(), u);
                           std::size_t flat = static_cast<std::size_t>(
                               std::min(it - cum.begin(),
                                        static_cast<std::ptrdiff_t>(cum.size() - 1)));
                           s.x1_cells[i] = static_cast<std::uint32_t>(rows[flat / n2]);
                           s.x2_cells[i] = static_cast<std::uint32_t>(flat % n2);
                       }
                   });
    return s;
}

HistogramEstimate bucket_histogram(const EventStream& s, const GridSpec& detector_grid) {
    HistogramEstimate h;
    h.grid = detector_grid;
    h.counts.assign(static_cast<std::size_t>(detector_grid.total()), 0);
    h.n = s.count();
    for (std::uint32_t c : s.x2_cells) {
        if (c >= h.counts.size()) throw IndexRangeError("event x2 cell outside detector grid");
        ++h.counts[c];
    }
    h.density.resize(detector_grid.total());
    const double scale = static_cast<double>(h.n) * detector_grid.cell_measure();
    for (int i = 0; i < h.density.size(); ++i)
        h.density[i] = static_cast<double>(h.counts[static_cast<std::size_t>(i)]) / scale;
    return h;
}

ConvergenceReport convergence_report(const HistogramEstimate& est, const Hologram& truth) {
    require_same_grid(est.grid, truth.grid, "convergence_report");
    const double mass = truth.total_mass();
    if (!(mass > 0.0)) throw DegenerateInputError("truth hologram has zero mass");
    const double cell = truth.grid.cell_measure();
    double l1 = 0.0;
    for (int i = 0; i < truth.values.size(); ++i)
        l1 += std::abs(est.density[i] - truth.values[i] / mass) * cell;
    return ConvergenceReport{l1, est.n};
}

void write_qhe1(std::ostream& os, const EventStream& s) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "QHE1 %llu %llu %s\n",
                  static_cast<unsigned long long>(s.count()),
                  static_cast<unsigned long long>(s.seed), s.rng_name.c_str());
    os << buf;
    for (std::size_t i = 0; i < s.x1_cells.size(); ++i) {
        os.write(reinterpret_cast<const char*>(&s.x1_cells[i]), sizeof(std::uint32_t));
        os.write(reinterpret_cast<const char*>(&s.x2_cells[i]), sizeof(std::uint32_t));
    }
    if (!os) throw IoError("QHE1 write failed");
}

EventStream read_qhe1(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("QHE1: missing header");
    std::istringstream hs(line);
    std::string magic, rng;
    unsigned long long n = 0, seed = 0;
    hs >> magic >> n >> seed >> rng;
    if (magic != "QHE1" || !hs) throw IoError("QHE1: bad header '" + line + "'");
    EventStream s;
    s.seed = seed;
    s.rng_name = rng;
    s.x1_cells.resize(n);
    s.x2_cells.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        is.read(reinterpret_cast<char*>(&s.x1_cells[i]), sizeof(std::uint32_t));
        is.read(reinterpret_cast<char*>(&s.x2_cells[i]), sizeof(std::uint32_t));
    }
    if (!is) throw IoError("QHE1: truncated payload");
    return s;
}

void save_qhe1(const std::string& path, const EventStream& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    write_qhe1(os, s);
}

EventStream load_qhe1(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for read: " + path);
    return read_qhe1(is);
}

void save_histogram_csv(const std::string& path, const HistogramEstimate& h) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    char buf[160];
    const GridSpec& g = h.grid;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const int i = g.index(ix, iy);
            if (g.ndim == 1)
                std::snprintf(buf, sizeof(buf), "%.17g,%llu,%.17g\n", g.coord_x(ix),
                              static_cast<unsigned long long>(h.counts[static_cast<std::size_t>(i)]),
                              h.density[i]);
            else
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%llu,%.17g\n", g.coord_x(ix),
                              g.coord_y(iy),
                              static_cast<unsigned long long>(h.counts[static_cast<std::size_t>(i)]),
                              h.density[i]);
            os << buf;
        }
}

} // namespace qholo
