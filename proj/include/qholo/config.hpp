#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qholo/biphoton.hpp"
#include "qholo/grid.hpp"
#include "qholo/holography.hpp"
#include "qholo/scene.hpp"

namespace qholo {

struct PumpSpec {
    enum class Kind { Gaussian, Uniform, Delta };
    Kind kind = Kind::Gaussian;
    double width = 0.1; // gaussian only
    double cx = 0.0;
    double cy = 0.0;
};

struct WallMaskSpec {
    enum class Kind { Full, Interval, Disk, Rect };
    Kind kind = Kind::Full;
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0; // interval: lo hi; disk: r cx cy; rect: x0 x1 y0 y1
};

// One experiment: chamber geometry, grids, pump, wall coverage, scatterers,
// Monte Carlo and reconstruction settings. Parsed from "key = value" text
// (one key per line, '#' comments); parse-then-serialize round-trips to the
// canonical form byte-identically.
struct ExperimentConfig {
    std::string preset = "fig1";

    GridSpec source_grid;
    GridSpec wall_grid;
    GridSpec detector_grid;

    double wavelength = 0.0;
    double opening_distance = 0.0;
    double wall_distance = 0.0;
    double detector_distance = 0.0;
    std::optional<double> lens_focal;
    bool lens_in_direct_path = true;

    WallMaskSpec wall_mask;
    PumpSpec pump;
    std::vector<PointScatterer> scatterers;

    std::uint64_t mc_n = 1000000;
    std::uint64_t mc_seed = 7;
    std::string rng_name = "splitmix64";

    std::vector<double> depths;
    DcMode dc_mode = DcMode::SubtractP0;

    std::string out_dir;
    int threads = 1;
    double tolerance_scale = 1.0;

    std::string canonical_text() const;

    // Derived builders used by every subcommand.
    ChamberGeometry geometry() const;
    DomainMask build_wall_mask() const;
    PumpProfile build_pump() const;
    Scene build_scene() const;
    OpticalSystem build_detector_arm() const; // h2: source grid -> detector grid
    BackpropOptics build_backprop_optics() const;
};

// Named presets: "fig1" (1-D demonstration chamber with a common-path lens)
// and "recon2d" (2-D reconstruction chamber whose direct path bypasses the
// illumination lens).
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// Parses config text. A "preset = NAME" line, if present, must come before
// any other key and rebases the defaults. Unknown keys and malformed values
// throw ParseError with the (1-based) line number; semantic violations throw
// ParseError naming the key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

} // namespace qholo
