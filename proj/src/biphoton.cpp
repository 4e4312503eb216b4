#include "qholo/biphoton.hpp"

#include <vector>

#include "qholo/parallel.hpp"

namespace qholo {

namespace {

// Kernel row h(x_out, .) as a field over the input grid, extracted through
// the adjoint: row = conj(adjoint(delta at x_out)).
ComplexField kernel_row(const OpticalSystem& sys, int out_cell) {
    ComplexField d = ComplexField::delta(sys.output_grid(), out_cell);
    return conj(sys.adjoint(d));
}

void require_source_match(const PumpProfile& pump, const OpticalSystem& h1,
                          const OpticalSystem& h2) {
    require_same_grid(pump.grid(), h1.input_grid(), "biphoton source/h1");
    require_same_grid(pump.grid(), h2.input_grid(), "biphoton source/h2");
}

} // namespace

PumpProfile PumpProfile::from_field(ComplexField f, bool normalize_it) {
    if (!f.all_finite()) throw DegenerateInputError("pump profile must be finite");
    PumpProfile p;
    if (normalize_it) {
        p.zeta = normalize(f);
        p.normalized = true;
    } else {
        p.zeta = std::move(f);
        p.normalized = false;
    }
    return p;
}

BiphotonAmplitude biphoton_amplitude(const PumpProfile& pump, const OpticalSystem& h1,
                                     const OpticalSystem& h2, const OracleBudget& budget) {
    require_source_match(pump, h1, h2);
    budget.check_matrix(h1.output_grid(), h2.output_grid(), "biphoton_amplitude");
    const int n1 = h1.output_grid().total();
    const int n2 = h2.output_grid().total();
    BiphotonAmplitude out;
    out.wall_grid = h1.output_grid();
    out.detector_grid = h2.output_grid();
    out.a.resize(n1, n2);
    for (int x2 = 0; x2 < n2; ++x2) {
        ComplexField w2 = kernel_row(h2, x2);
        out.a.col(x2) = h1.forward(pointwise_multiply(pump.zeta, w2)).values;
    }
    return out;
}

BiphotonAmplitude biphoton_amplitude_by_probes(const PumpProfile& pump,
                                               const OpticalSystem& h1,
                                               const OpticalSystem& h2,
                                               const OracleBudget& budget) {
    require_source_match(pump, h1, h2);
    budget.check_matrix(h1.output_grid(), h2.output_grid(), "biphoton_amplitude");
    BiphotonAmplitude out;
    out.wall_grid = h1.output_grid();
    out.detector_grid = h2.output_grid();
    out.a = Eigen::MatrixXcd::Zero(out.wall_grid.total(), out.detector_grid.total());
    const double dx = pump.grid().cell_measure();
    for (int x = 0; x < pump.grid().total(); ++x) {
        const Complex w = pump.zeta[x] * dx;
        if (w == Complex(0.0, 0.0)) continue;
        ComplexField c1 = point_response(h1, x);
        ComplexField c2 = point_response(h2, x);
        out.a.noalias() += w * (c1.values * c2.values.transpose());
    }
    return out;
}

CoincidenceMap coincidence_rate(const BiphotonAmplitude& a) {
    CoincidenceMap m;
    m.wall_grid = a.wall_grid;
    m.detector_grid = a.detector_grid;
    m.p = a.a.cwiseAbs2();
    return m;
}

Hologram marginal_hologram(const CoincidenceMap& p, const DomainMask& wall) {
    require_same_grid(p.wall_grid, wall.grid, "marginal_hologram wall");
    if (wall.empty()) throw DegenerateInputError("marginal over an empty wall mask");
    const double dx1 = p.wall_grid.cell_measure();
    Hologram h(p.detector_grid);
    for (int x1 = 0; x1 < p.wall_grid.total(); ++x1) {
        if (!wall.contains(x1)) continue;
        h.values += p.p.row(x1).transpose();
    }
    h.values *= dx1;
    h.values = clamp_nonnegative(std::move(h.values), h.max_value());
    return h;
}

Hologram scene_marginal(const PumpProfile& pump, const OpticalSystem& h1,
                        const OpticalSystem& h2, const DomainMask& wall, int threads) {
    require_source_match(pump, h1, h2);
    require_same_grid(wall.grid, h1.output_grid(), "scene_marginal wall");
    if (wall.empty()) throw DegenerateInputError("marginal over an empty wall mask");

    const std::vector<int> wall_cells = wall.cells();
    const double dx1 = h1.output_grid().cell_measure();
    const GridSpec det = h2.output_grid();

    constexpr std::size_t kChunk = 64;
    const std::size_t n_chunks = (wall_cells.size() + kChunk - 1) / kChunk;
    std::vector<Eigen::VectorXd> partial(n_chunks);

    for_each_chunk(wall_cells.size(), kChunk, threads,
                   [&](std::size_t first, std::size_t last, std::size_t chunk) {
                       Eigen::VectorXd acc = Eigen::VectorXd::Zero(det.total());
                       for (std::size_t i = first; i < last; ++i) {
                           ComplexField row = kernel_row(h1, wall_cells[i]);
                           ComplexField amp =
                               h2.forward(pointwise_multiply(pump.zeta, row));
                           acc += amp.values.cwiseAbs2();
                       }
                       partial[chunk] = std::move(acc);
                   });

    Hologram h(det);
    for (std::size_t c = 0; c < n_chunks; ++c) h.values += partial[c];
    h.values *= dx1;
    h.values = clamp_nonnegative(std::move(h.values), h.max_value());
    h.provenance.pump_hash = field_hash(pump.zeta);
    h.provenance.wall_mask_hash = mask_hash(wall);
    return h;
}

CoherenceKernel coherence_kernel(const OpticalSystem& h1, const DomainMask& wall,
                                 const OracleBudget& budget) {
    require_same_grid(wall.grid, h1.output_grid(), "coherence_kernel wall");
    if (wall.empty()) throw DegenerateInputError("coherence kernel over an empty wall mask");
    budget.check_matrix(h1.input_grid(), h1.input_grid(), "coherence_kernel");
    budget.check_matrix(h1.output_grid(), h1.input_grid(), "coherence_kernel");

    const int ns = h1.input_grid().total();
    const double dx1 = h1.output_grid().cell_measure();
    // columns h1(., x) for all source cells
    Eigen::MatrixXcd cols(h1.output_grid().total(), ns);
    for (int x = 0; x < ns; ++x) cols.col(x) = point_response(h1, x).values;

    Eigen::VectorXd m(h1.output_grid().total());
    for (int i = 0; i < m.size(); ++i) m[i] = wall.contains(i) ? dx1 : 0.0;

    CoherenceKernel k;
    k.source_grid = h1.input_grid();
    // g1(x,x') = sum_w m(w) h1(w,x) conj(h1(w,x'))
    k.g1 = cols.transpose() * m.asDiagonal() * cols.conjugate();
    return k;
}

Hologram marginal_via_kernel(const PumpProfile& pump, const CoherenceKernel& g1,
                             const OpticalSystem& h2, const OracleBudget& budget) {
    require_same_grid(pump.grid(), g1.source_grid, "marginal_via_kernel pump");
    require_same_grid(pump.grid(), h2.input_grid(), "marginal_via_kernel h2");
    budget.check_matrix(g1.source_grid, g1.source_grid, "marginal_via_kernel");

    const GridSpec det = h2.output_grid();
    const double dx = pump.grid().cell_measure();
    Hologram h(det);
    for (int x2 = 0; x2 < det.total(); ++x2) {
        ComplexField w2 = kernel_row(h2, x2);
        // w(x) = zeta(x) h2(x2, x) dx; pbar = w^T g1 conj(w)
        Eigen::VectorXcd w = pump.zeta.values.cwiseProduct(w2.values) * dx;
        const Complex v = w.transpose() * (g1.g1 * w.conjugate());
        h.values[x2] = v.real();
    }
    h.values = clamp_nonnegative(std::move(h.values), h.max_value());
    return h;
}

// Probability-normalized: |h2(x2,x)|^2 dx^2 is the cell-to-cell transition
// probability of the unit basis state, so s integrates to 1 through unitary
// optics and collapses to |zeta|^2 for the identity. The Eq.-(3)-style
// marginal of a unitary arm equals s / cell_measure (raw-sum convention).
Hologram singles_rate_detector2(const PumpProfile& pump, const OpticalSystem& h2) {
    require_same_grid(pump.grid(), h2.input_grid(), "singles_rate pump/h2");
    const double dx = pump.grid().cell_measure();
    Hologram s(h2.output_grid());
    for (int x = 0; x < pump.grid().total(); ++x) {
        const double w = std::norm(pump.zeta[x]) * dx * dx;
        if (w == 0.0) continue;
        s.values += w * point_response(h2, x).values.cwiseAbs2();
    }
    return s;
}

Hologram classical_factorized_marginal(const PumpProfile& pump, const OpticalSystem& h1,
                                       const OpticalSystem& h2, const DomainMask& wall) {
    require_source_match(pump, h1, h2);
    require_same_grid(wall.grid, h1.output_grid(), "classical baseline wall");
    if (wall.empty()) throw DegenerateInputError("classical baseline over an empty wall mask");

    // Bucket probability of arm 1: integral of the arm-1 singles rate over the wall.
    const double dx = pump.grid().cell_measure();
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(h1.output_grid().total());
    for (int x = 0; x < pump.grid().total(); ++x) {
        const double w = std::norm(pump.zeta[x]) * dx * dx;
        if (w == 0.0) continue;
        s1 += w * point_response(h1, x).values.cwiseAbs2();
    }
    double bucket = 0.0;
    for (int x1 = 0; x1 < s1.size(); ++x1)
        if (wall.contains(x1)) bucket += s1[x1];
    bucket *= h1.output_grid().cell_measure();

    Hologram s2 = singles_rate_detector2(pump, h2);
    s2.values *= bucket;
    return s2;
}

} // namespace qholo
