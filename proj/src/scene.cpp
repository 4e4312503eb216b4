#include "qholo/scene.hpp"

#include <sstream>

#include "qholo/hash.hpp"

namespace qholo {

namespace {

OpticalSystem propagator(const GridSpec& out, const GridSpec& in, double lambda, double d) {
    if (out == in) return OpticalSystem::fresnel(in, lambda, d);
    return OpticalSystem::dense(fresnel_dense_kernel(out, in, lambda, d));
}

} // namespace

Scene Scene::from_geometry(const ChamberGeometry& geom, const GridSpec& source,
                           const GridSpec& wall_grid, DomainMask wall,
                           const std::vector<PointScatterer>& scatterers) {
    if (!(geom.wavelength > 0.0)) throw DegenerateInputError("wavelength must be positive");
    if (!(geom.opening_distance > 0.0) || !(geom.wall_distance > 0.0))
        throw DegenerateInputError("chamber distances must be positive");
    require_same_grid(wall.grid, wall_grid, "scene wall mask");
    if (source.ndim != wall_grid.ndim)
        throw GridMismatchError("source and wall grids must share dimensionality");

    std::optional<OpticalSystem> lens;
    if (geom.lens_focal)
        lens = OpticalSystem::thin_lens(source, geom.wavelength, *geom.lens_focal);

    Scene s;
    s.geometry_ = geom;
    s.wall_ = std::move(wall);

    OpticalSystem direct_free =
        propagator(wall_grid, source, geom.wavelength, geom.source_to_wall());
    s.h0_ = (lens && geom.lens_in_direct_path) ? compose(direct_free, *lens) : direct_free;

    for (const auto& sc : scatterers) {
        if (!(sc.depth > 0.0) || !(sc.depth < geom.wall_distance)) {
            std::ostringstream os;
            os << "scatterer depth " << sc.depth << " outside chamber (0, "
               << geom.wall_distance << ")";
            throw DegenerateInputError(os.str());
        }
        Slot slot;
        slot.given = sc;
        bool clamped = false;
        slot.cell = source.nearest_cell(sc.x, sc.y, &clamped);
        if (clamped) throw DegenerateInputError("scatterer outside the scatterer-plane grid");
        slot.snap_x = source.coord_x(source.ix_of(slot.cell)) - sc.x;
        slot.snap_y = source.ndim == 2 ? source.coord_y(source.iy_of(slot.cell)) - sc.y : 0.0;

        OpticalSystem illum_free = OpticalSystem::fresnel(
            source, geom.wavelength, geom.source_to_depth(sc.depth));
        slot.illumination = lens ? compose(illum_free, *lens) : illum_free;
        slot.scattering =
            propagator(wall_grid, source, geom.wavelength, geom.wall_distance - sc.depth);
        s.slots_.push_back(std::move(slot));
    }
    return s;
}

Scene Scene::from_systems(OpticalSystem h0, DomainMask wall, std::vector<Slot> slots) {
    require_same_grid(wall.grid, h0.output_grid(), "scene wall mask");
    for (auto& slot : slots) {
        require_same_grid(slot.illumination.input_grid(), h0.input_grid(),
                          "scatterer illumination path");
        require_same_grid(slot.illumination.output_grid(), h0.input_grid(),
                          "scatterer illumination path output");
        require_same_grid(slot.scattering.input_grid(), h0.input_grid(),
                          "scatterer scattering path input");
        require_same_grid(slot.scattering.output_grid(), h0.output_grid(),
                          "scatterer scattering path");
        if (slot.cell < 0 || slot.cell >= h0.input_grid().total())
            throw IndexRangeError("scatterer cell outside the scatterer-plane grid");
    }
    Scene s;
    s.h0_ = std::move(h0);
    s.wall_ = std::move(wall);
    s.slots_ = std::move(slots);
    return s;
}

std::uint64_t Scene::hash() const {
    Fnv1a h;
    h.update(source_grid().describe());
    h.update(wall_grid().describe());
    h.update(wall_.inside.data(), wall_.inside.size());
    if (geometry_) {
        h.update_pod(geometry_->wavelength);
        h.update_pod(geometry_->opening_distance);
        h.update_pod(geometry_->wall_distance);
        h.update_pod(geometry_->lens_focal.value_or(0.0));
        h.update_pod(geometry_->lens_in_direct_path);
    }
    for (const auto& s : slots_) {
        h.update_pod(s.cell);
        h.update_pod(s.given.depth);
        h.update_pod(s.given.eta.real());
        h.update_pod(s.given.eta.imag());
    }
    return h.digest();
}

OpticalSystem effective_h1(const Scene& scene) {
    std::vector<OpticalSystem> paths;
    paths.push_back(scene.direct_path());
    const GridSpec& plane = scene.source_grid();
    for (const auto& slot : scene.scatterers()) {
        ComplexField point(plane);
        point.values[slot.cell] = slot.given.eta;
        paths.push_back(OpticalSystem::cascade(
            {slot.illumination, OpticalSystem::mask(std::move(point)), slot.scattering}));
    }
    if (paths.size() == 1) return paths.front();
    return OpticalSystem::sum(std::move(paths));
}

namespace {

const Scene::Slot& slot_at(const Scene& scene, int j) {
    if (j < 0 || j >= scene.count()) throw IndexRangeError("scatterer index out of range");
    return scene.scatterers()[static_cast<std::size_t>(j)];
}

// hI_j(x_j, .): illumination kernel row at the scatterer cell.
ComplexField backward_illumination(const Scene::Slot& slot, const GridSpec& plane) {
    ComplexField d = ComplexField::delta(plane, slot.cell);
    return conj(slot.illumination.adjoint(d));
}

} // namespace

Complex illumination_amplitude(const Scene& scene, int j, const PumpProfile& pump) {
    const auto& slot = slot_at(scene, j);
    require_same_grid(pump.grid(), scene.source_grid(), "illumination_amplitude pump");
    ComplexField row = backward_illumination(slot, scene.source_grid());
    Complex acc(0.0, 0.0);
    for (int x = 0; x < row.size(); ++x) acc += row[x] * pump.zeta[x];
    return acc * scene.source_grid().cell_measure();
}

ComplexField q_field(const Scene& scene, int j, const PumpProfile& pump,
                     const OpticalSystem& h2) {
    const auto& slot = slot_at(scene, j);
    require_same_grid(pump.grid(), scene.source_grid(), "q_field pump");
    require_same_grid(h2.input_grid(), scene.source_grid(), "q_field h2");
    ComplexField row = backward_illumination(slot, scene.source_grid());
    return h2.forward(pointwise_multiply(pump.zeta, row));
}

ComplexField f_kernel(const Scene& scene, int j) {
    const auto& slot = slot_at(scene, j);
    ComplexField scattered = point_response(slot.scattering, slot.cell);
    return scene.direct_path().adjoint(restrict_to(scattered, scene.wall()));
}

ComplexField r_field(const Scene& scene, int j, const PumpProfile& pump,
                     const OpticalSystem& h2) {
    require_same_grid(pump.grid(), scene.source_grid(), "r_field pump");
    require_same_grid(h2.input_grid(), scene.source_grid(), "r_field h2");
    ComplexField f = f_kernel(scene, j);
    // r = conj(h2(zeta .* conj(f))) so that r(x2) = sum_x conj(zeta) f conj(h2) dx.
    return conj(h2.forward(pointwise_multiply(pump.zeta, conj(f))));
}

Eigen::MatrixXcd wall_overlap_kernel(const Scene& scene) {
    const int n = scene.count();
    const double dx1 = scene.wall_grid().cell_measure();
    std::vector<ComplexField> waves;
    waves.reserve(static_cast<std::size_t>(n));
    for (const auto& slot : scene.scatterers())
        waves.push_back(restrict_to(point_response(slot.scattering, slot.cell), scene.wall()));
    Eigen::MatrixXcd w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Complex acc(0.0, 0.0);
            for (int c = 0; c < waves[i].size(); ++c)
                acc += waves[i][c] * std::conj(waves[j][c]);
            w(i, j) = acc * dx1;
        }
    return w;
}

Eigen::VectorXd DecompositionResult::scatter_term_without_cross() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(scatter_term.values.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        const double wjj = wall_overlap(static_cast<int>(j), static_cast<int>(j)).real();
        const double k2 = std::norm(coupling[j]);
        out += k2 * wjj * q[j].values.cwiseAbs2();
    }
    return out;
}

DecompositionResult hologram_decomposition(const Scene& scene, const PumpProfile& pump,
                                           const OpticalSystem& h2, int threads) {
    require_same_grid(pump.grid(), scene.source_grid(), "decomposition pump");
    require_same_grid(h2.input_grid(), scene.source_grid(), "decomposition h2");

    const int n = scene.count();
    const GridSpec det = h2.output_grid();
    const double cell = scene.source_grid().cell_measure();

    DecompositionResult out;
    out.direct_term =
        scene_marginal(pump, scene.direct_path(), h2, scene.wall(), threads);
    out.wall_overlap = wall_overlap_kernel(scene);
    out.q.reserve(static_cast<std::size_t>(n));
    out.r.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        out.q.push_back(q_field(scene, j, pump, h2));
        out.r.push_back(r_field(scene, j, pump, h2));
        out.illumination.push_back(illumination_amplitude(scene, j, pump));
        out.coupling.push_back(scene.scatterers()[static_cast<std::size_t>(j)].given.eta * cell);
    }

    Eigen::VectorXd scatter = Eigen::VectorXd::Zero(det.total());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Complex kk = out.coupling[static_cast<std::size_t>(i)] *
                               std::conj(out.coupling[static_cast<std::size_t>(j)]) *
                               out.wall_overlap(i, j);
            scatter += (kk * out.q[static_cast<std::size_t>(i)].values.cwiseProduct(
                                 out.q[static_cast<std::size_t>(j)].values.conjugate()))
                           .real();
        }
    const double scatter_scale = scatter.cwiseAbs().maxCoeff();
    out.scatter_term = Hologram(det, clamp_nonnegative(std::move(scatter), scatter_scale));

    out.interference = Eigen::VectorXd::Zero(det.total());
    for (int j = 0; j < n; ++j)
        out.interference += 2.0 * (out.coupling[static_cast<std::size_t>(j)] *
                                   out.q[static_cast<std::size_t>(j)].values.cwiseProduct(
                                       out.r[static_cast<std::size_t>(j)].values))
                                      .real();
    return out;
}

} // namespace qholo
