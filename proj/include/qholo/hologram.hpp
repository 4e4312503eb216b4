#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "qholo/grid.hpp"

namespace qholo {

// Real nonnegative map on the detector-2 grid. Values are raw quadrature sums
// with no area normalization (scale convention "raw-sum"); negative rounding
// residue above -1e-15 is clamped to zero.
struct Hologram {
    GridSpec grid;
    Eigen::VectorXd values;

    struct Provenance {
        std::uint64_t scene_hash = 0;
        std::uint64_t pump_hash = 0;
        std::uint64_t wall_mask_hash = 0;
        std::string scale_convention = "raw-sum";
    } provenance;

    Hologram() = default;
    explicit Hologram(const GridSpec& g) : grid(g), values(Eigen::VectorXd::Zero(g.total())) {}
    Hologram(const GridSpec& g, Eigen::VectorXd v);

    double max_value() const { return values.size() ? values.maxCoeff() : 0.0; }
    double total_mass() const { return values.sum() * grid.cell_measure(); }
    ComplexField as_field() const;
};

// Clamp tiny negative rounding residue; anything below -1e-15*scale is a bug
// and throws.
Eigen::VectorXd clamp_nonnegative(Eigen::VectorXd v, double scale);

// CSV rows "x,value" (1-D) or "x,y,value" (2-D), 17 significant digits.
void write_hologram_csv(std::ostream& os, const Hologram& h);
void save_hologram_csv(const std::string& path, const Hologram& h);
Hologram load_hologram_csv(const std::string& path, const GridSpec& grid);

// QHF1 with zero imaginary parts.
void save_hologram_qhf1(const std::string& path, const Hologram& h);

std::uint64_t hologram_hash(const Hologram& h);

} // namespace qholo
