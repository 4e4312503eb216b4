#include "qholo/holography.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "qholo/parallel.hpp"

namespace qholo {

Hologram record_hologram(const Scene& scene, const PumpProfile& pump,
                         const OpticalSystem& h2, int threads) {
    Hologram h = scene_marginal(pump, effective_h1(scene), h2, scene.wall(), threads);
    h.provenance.scene_hash = scene.hash();
    return h;
}

DcMode dc_mode_from_string(const std::string& s) {
    if (s == "none") return DcMode::None;
    if (s == "subtract_p0") return DcMode::SubtractP0;
    if (s == "subtract_mean") return DcMode::SubtractMean;
    throw DegenerateInputError("unknown dc_mode '" + s + "'");
}

std::string to_string(DcMode m) {
    switch (m) {
    case DcMode::None: return "none";
    case DcMode::SubtractP0: return "subtract_p0";
    case DcMode::SubtractMean: return "subtract_mean";
    }
    return "?";
}

OpticalSystem BackpropOptics::illumination_at(double depth) const {
    OpticalSystem free = OpticalSystem::fresnel(source_grid, geometry.wavelength,
                                                geometry.source_to_depth(depth));
    if (geometry.lens_focal)
        return compose(free, OpticalSystem::thin_lens(source_grid, geometry.wavelength,
                                                      *geometry.lens_focal));
    return free;
}

ReconstructionResult gabor_reconstruct(const Hologram& holo, const BackpropOptics& optics,
                                       const std::vector<double>& depths, DcMode dc_mode,
                                       const Hologram* p0_baseline, int max_peaks,
                                       int threads) {
    if (depths.empty()) throw DegenerateInputError("reconstruction needs at least one depth");
    require_same_grid(holo.grid, optics.h2.output_grid(), "reconstruction hologram grid");

    Eigen::VectorXd t = holo.values;
    switch (dc_mode) {
    case DcMode::None:
        break;
    case DcMode::SubtractP0:
        if (!p0_baseline)
            throw DegenerateInputError("dc_mode subtract_p0 needs the scene-free baseline");
        require_same_grid(holo.grid, p0_baseline->grid, "reconstruction baseline grid");
        t -= p0_baseline->values;
        break;
    case DcMode::SubtractMean:
        t.array() -= t.mean();
        break;
    }

    ComplexField plate(holo.grid);
    for (int i = 0; i < t.size(); ++i) plate.values[i] = Complex(t[i], 0.0);

    // Shared first stage: adjoint of the detector arm, then of the pump mask.
    ComplexField staged = optics.h2.adjoint(plate);
    staged = pointwise_multiply(conj(optics.zeta), staged);

    ReconstructionResult out;
    out.dc_mode = dc_mode;
    out.depths = depths;
    out.slices.resize(depths.size());
    for_each_chunk(depths.size(), 1, threads,
                   [&](std::size_t first, std::size_t last, std::size_t) {
                       for (std::size_t k = first; k < last; ++k) {
                           OpticalSystem illum = optics.illumination_at(depths[k]);
                           // adjoint of transpose(illum) = conjugated kernel
                           out.slices[k] = apply_conjugate(illum, staged);
                       }
                   });

    out.peaks = locate_peaks(out.slices, depths, max_peaks, &out.peak_list_truncated);
    return out;
}

std::vector<Peak> locate_peaks(const std::vector<ComplexField>& slices,
                               const std::vector<double>& depths, int k, bool* truncated) {
    if (k < 1) throw DegenerateInputError("peak count must be at least 1");
    if (slices.empty() || slices.size() != depths.size())
        throw DegenerateInputError("slice/depth lists are empty or mismatched");

    const GridSpec& g = slices.front().grid;
    std::vector<Peak> found;
    for (std::size_t d = 0; d < slices.size(); ++d) {
        require_same_grid(slices[d].grid, g, "locate_peaks slices");
        const auto& v = slices[d].values;
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const int idx = g.index(ix, iy);
                const double m = std::norm(v[idx]);
                bool is_max = true;
                auto beats = [&](int nidx) { return std::norm(v[nidx]) > m; };
                if (ix > 0 && beats(g.index(ix - 1, iy))) is_max = false;
                if (is_max && ix + 1 < g.nx && beats(g.index(ix + 1, iy))) is_max = false;
                if (g.ndim == 2) {
                    if (is_max && iy > 0 && beats(g.index(ix, iy - 1))) is_max = false;
                    if (is_max && iy + 1 < g.ny && beats(g.index(ix, iy + 1))) is_max = false;
                }
                if (is_max && m > 0.0)
                    found.push_back(Peak{idx, static_cast<int>(d), depths[d], m});
            }
    }
    std::stable_sort(found.begin(), found.end(), [](const Peak& a, const Peak& b) {
        if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
        if (a.depth_index != b.depth_index) return a.depth_index < b.depth_index;
        return a.cell < b.cell;
    });
    if (truncated) *truncated = static_cast<std::size_t>(k) > found.size();
    if (found.size() > static_cast<std::size_t>(k)) found.resize(static_cast<std::size_t>(k));
    return found;
}

void save_slice_pgm(const std::string& path, const ComplexField& slice) {
    const GridSpec& g = slice.grid;
    double lo = std::abs(slice.values[0]);
    double hi = lo;
    for (int i = 0; i < slice.size(); ++i) {
        const double m = std::abs(slice.values[i]);
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    const double span = hi > lo ? hi - lo : 1.0;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    os << "P5\n" << g.nx << " " << (g.ndim == 2 ? g.ny : 1) << "\n65535\n";
    for (int i = 0; i < slice.size(); ++i) {
        const double m = std::abs(slice.values[i]);
        const auto q = static_cast<unsigned>(std::lround((m - lo) / span * 65535.0));
        const unsigned char b[2] = {static_cast<unsigned char>(q >> 8),
                                    static_cast<unsigned char>(q & 0xff)};
        os.write(reinterpret_cast<const char*>(b), 2);
    }
    if (!os) throw IoError("PGM write failed");

    std::ofstream side(path + ".scale.txt", std::ios::binary);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "min %.17g\nmax %.17g\nmapping linear |value| -> [0,65535]\n",
                  lo, hi);
    side << buf;
}

void save_peaks_csv(const std::string& path, const std::vector<Peak>& peaks,
                    const GridSpec& grid) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    char buf[192];
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        const Peak& p = peaks[i];
        if (grid.ndim == 1)
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", i + 1,
                          grid.coord_x(grid.ix_of(p.cell)), p.depth, p.magnitude);
        else
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", i + 1,
                          grid.coord_x(grid.ix_of(p.cell)), grid.coord_y(grid.iy_of(p.cell)),
                          p.depth, p.magnitude);
        os << buf;
    }
}

} // namespace qholo
