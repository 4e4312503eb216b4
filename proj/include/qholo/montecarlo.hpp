#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qholo/biphoton.hpp"
#include "qholo/grid.hpp"
#include "qholo/hologram.hpp"

namespace qholo {

// Counter-friendly splittable generator built on the splitmix64 finalizer.
// Streams are reproducible bitwise from (seed, parameters); chunk sub-seeds
// derive as sub_seed(c) = mix64(seed + (c+1) * 0x9e3779b97f4a7c15).
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    static std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t chunk) {
        return mix64(seed + (chunk + 1) * 0x9e3779b97f4a7c15ull);
    }

    std::uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ull;
        return mix64(state);
    }
    // Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
};

inline const char* kRngName = "splitmix64";

// Seeded sequence of sampled photon-pair detection events.
struct EventStream {
    std::uint64_t seed = 0;
    std::string rng_name = kRngName;
    std::vector<std::uint32_t> x1_cells; // wall-grid cell per event
    std::vector<std::uint32_t> x2_cells; // detector-grid cell per event

    std::uint64_t count() const { return x1_cells.size(); }
};

// i.i.d. draws from p restricted to x1 in the wall mask, normalized to a
// probability mass function over (x1, x2) cells, via inverse-CDF on the
// flattened masses. Generation is chunked (65536 events per chunk) with
// derived sub-seeds, so serial and parallel runs produce identical streams.
EventStream sample_pairs(const CoincidenceMap& p, const DomainMask& wall, std::uint64_t n,
                         std::uint64_t seed, int threads = 1);

struct HistogramEstimate {
    GridSpec grid;                     // detector grid
    std::vector<std::uint64_t> counts; // per x2 cell
    Eigen::VectorXd density;           // counts / (n * cell_measure); integrates to 1
    std::uint64_t n = 0;
};

// Discards x1 (bucket detection) and bins x2.
HistogramEstimate bucket_histogram(const EventStream& s, const GridSpec& detector_grid);

struct ConvergenceReport {
    double l1_distance = 0.0; // between unit-mass normalized curves, in [0, 2]
    std::uint64_t n = 0;
};

ConvergenceReport convergence_report(const HistogramEstimate& est, const Hologram& truth);

// QHE1 event file: ASCII header "QHE1 <n> <seed> <rng-name>", newline, then
// little-endian (x1, x2) uint32 pairs.
void write_qhe1(std::ostream& os, const EventStream& s);
EventStream read_qhe1(std::istream& is);
void save_qhe1(const std::string& path, const EventStream& s);
EventStream load_qhe1(const std::string& path);

void save_histogram_csv(const std::string& path, const HistogramEstimate& h);

} // namespace qholo
