#pragma once

#include <string>
#include <vector>

#include "qholo/scene.hpp"

namespace qholo {

// Marginal coincidence rate of the full scene, with provenance metadata.
Hologram record_hologram(const Scene& scene, const PumpProfile& pump,
                         const OpticalSystem& h2, int threads = 1);

enum class DcMode { None, SubtractP0, SubtractMean };

DcMode dc_mode_from_string(const std::string& s);
std::string to_string(DcMode m);

struct Peak {
    int cell = 0;        // transverse cell on the slice grid
    int depth_index = 0;
    double depth = 0.0;
    double magnitude = 0.0; // |slice|^2 at the peak
};

struct ReconstructionResult {
    std::vector<double> depths;
    std::vector<ComplexField> slices; // one per depth, scatterer-plane grid
    std::vector<Peak> peaks;          // sorted by magnitude desc, deterministic ties
    DcMode dc_mode = DcMode::None;
    bool peak_list_truncated = false;
};

// Everything needed to back-propagate a recorded hologram: the detector arm,
// the pump, and the chamber layout that parameterizes the illumination system
// by candidate depth.
struct BackpropOptics {
    ChamberGeometry geometry;
    GridSpec source_grid;
    ComplexField zeta;   // pump amplitude used during recording
    OpticalSystem h2;

    OpticalSystem illumination_at(double depth) const;
};

// Digital inline reconstruction: t = hologram - DC, then for each candidate
// depth apply the adjoint of (h2 after pump modulation after the depth's
// illumination system, transposed). The twin image is reported via the peak
// list, never suppressed. dc_mode SubtractP0 needs the scene-free baseline.
ReconstructionResult gabor_reconstruct(const Hologram& holo, const BackpropOptics& optics,
                                       const std::vector<double>& depths, DcMode dc_mode,
                                       const Hologram* p0_baseline = nullptr,
                                       int max_peaks = 8, int threads = 1);

// k largest local maxima of |slice|^2 across all depth slices. A cell is a
// local maximum if no transverse neighbour (4-neighbourhood, non-periodic)
// exceeds it. Ties break on lower depth index, then lower cell index.
std::vector<Peak> locate_peaks(const std::vector<ComplexField>& slices,
                               const std::vector<double>& depths, int k,
                               bool* truncated = nullptr);

// 16-bit binary PGM (P5, maxval 65535, big-endian samples) of |slice|, with
// the linear min-max scaling recorded in a sidecar text file.
void save_slice_pgm(const std::string& path, const ComplexField& slice);

void save_peaks_csv(const std::string& path, const std::vector<Peak>& peaks,
                    const GridSpec& grid);

} // namespace qholo
