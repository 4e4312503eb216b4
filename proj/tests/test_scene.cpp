#include <doctest.h>

#include <random>

#include "qholo/scene.hpp"
#include "support/random_fields.hpp"

using namespace qholo;
using namespace qholo::testing;

namespace {

struct RandomScene {
    GridSpec g;
    PumpProfile pump;
    OpticalSystem h2;
    Scene scene;
    std::vector<Eigen::MatrixXcd> ki, ks;
    Eigen::MatrixXcd k0, k2;
};

RandomScene make_scene(std::uint64_t seed, int n, int n_scatterers,
                       double eta_scale = 0.5) {
    std::mt19937_64 rng(seed);
    RandomScene rc;
    rc.g = GridSpec::line(n, 1.0);
    rc.pump = PumpProfile::from_field(random_field(rng, rc.g));
    rc.k0 = random_matrix(rng, n, n);
    rc.k2 = random_matrix(rng, n, n);
    rc.h2 = OpticalSystem::dense(DenseKernel(rc.g, rc.g, rc.k2));
    DomainMask wall =
        DomainMask::from_predicate(rc.g, [](double x, double) { return x > -0.22; });

    std::uniform_int_distribution<int> cell_dist(0, n - 1);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<Scene::Slot> slots;
    for (int j = 0; j < n_scatterers; ++j) {
        rc.ki.push_back(random_matrix(rng, n, n));
        rc.ks.push_back(random_matrix(rng, n, n));
        Scene::Slot s;
        s.cell = cell_dist(rng);
        s.given.eta = eta_scale * Complex(nd(rng), nd(rng));
        s.illumination = OpticalSystem::dense(DenseKernel(rc.g, rc.g, rc.ki.back()));
        s.scattering = OpticalSystem::dense(DenseKernel(rc.g, rc.g, rc.ks.back()));
        slots.push_back(std::move(s));
    }
    rc.scene = Scene::from_systems(OpticalSystem::dense(DenseKernel(rc.g, rc.g, rc.k0)),
                                   wall, std::move(slots));
    return rc;
}

ChamberGeometry demo_geometry() {
    ChamberGeometry geom;
    geom.wavelength = 0.02;
    geom.opening_distance = 0.35;
    geom.wall_distance = 0.5;
    geom.lens_focal = 0.5;
    geom.lens_in_direct_path = true;
    return geom;
}

} // namespace

TEST_CASE("effective_h1: empty scene and zero-strength scatterers behave as h0") {
    std::mt19937_64 rng(1);
    RandomScene rc = make_scene(100, 16, 0);
    OpticalSystem h1 = effective_h1(rc.scene);
    ComplexField f = random_field(rng, rc.g);
    CHECK(rel_err(h1.forward(f).values, rc.scene.direct_path().forward(f).values) < 1e-12);

    RandomScene rz = make_scene(101, 16, 2, 0.0);
    OpticalSystem h1z = effective_h1(rz.scene);
    ComplexField f2 = random_field(rng, rz.g);
    CHECK(rel_err(h1z.forward(f2).values, rz.scene.direct_path().forward(f2).values) <
          1e-12);
}

TEST_CASE("effective_h1: one scatterer is a rank-one update of the dense kernel") {
    RandomScene rc = make_scene(7, 16, 1);
    const auto& slot = rc.scene.scatterers()[0];
    const double dx = rc.g.cell_measure();

    // oracle: K0 + eta * dx * (column of KS at cell) (row of KI at cell)
    Eigen::MatrixXcd expect = rc.k0;
    expect += slot.given.eta * dx * (rc.ks[0].col(slot.cell) * rc.ki[0].row(slot.cell));

    DenseKernel got = to_dense(effective_h1(rc.scene));
    CHECK(rel_err(Eigen::VectorXcd(got.k.reshaped()), Eigen::VectorXcd(expect.reshaped())) <
          1e-10);
}

TEST_CASE("effective_h1: adjoint identity holds for the scene system") {
    std::mt19937_64 rng(3);
    RandomScene rc = make_scene(8, 16, 3);
    CHECK(adjoint_identity_defect(effective_h1(rc.scene), rng, 30) < 1e-10);
}

TEST_CASE("illumination_amplitude: identity illumination with matching pump delta") {
    GridSpec g = GridSpec::line(12, 1.0);
    const int cell = 5;
    std::vector<Scene::Slot> slots(1);
    slots[0].cell = cell;
    slots[0].given.eta = Complex(1.0, 0.0);
    slots[0].illumination = OpticalSystem::identity(g);
    slots[0].scattering = OpticalSystem::identity(g);
    Scene scene = Scene::from_systems(OpticalSystem::identity(g), DomainMask::full(g),
                                      std::move(slots));

    // pump = indicator of the scatterer cell (value 1): amplitude delivered is 1
    ComplexField z(g);
    z.values[cell] = 1.0;
    PumpProfile pump = PumpProfile::from_field(z, false);
    CHECK(std::abs(illumination_amplitude(scene, 0, pump) - Complex(1.0, 0.0)) < 1e-13);

    PumpProfile zero;
    zero.zeta = ComplexField(g);
    CHECK(std::abs(illumination_amplitude(scene, 0, zero)) == 0.0);

    CHECK_THROWS_AS(illumination_amplitude(scene, 1, pump), IndexRangeError);
}

TEST_CASE("illumination_amplitude: dense random case matches direct quadrature") {
    RandomScene rc = make_scene(9, 16, 2);
    for (int j = 0; j < 2; ++j) {
        const auto& slot = rc.scene.scatterers()[static_cast<std::size_t>(j)];
        Complex expect(0.0, 0.0);
        for (int x = 0; x < 16; ++x)
            expect += rc.ki[static_cast<std::size_t>(j)](slot.cell, x) *
                      rc.pump.zeta.values[x];
        expect *= rc.g.cell_measure();
        CHECK(std::abs(illumination_amplitude(rc.scene, j, rc.pump) - expect) < 1e-12);
    }
}

TEST_CASE("q_field: identity chains give the pump-weighted delta") {
    GridSpec g = GridSpec::line(10, 1.0);
    const int cell = 3;
    std::vector<Scene::Slot> slots(1);
    slots[0].cell = cell;
    slots[0].given.eta = Complex(0.4, 0.0);
    slots[0].illumination = OpticalSystem::identity(g);
    slots[0].scattering = OpticalSystem::identity(g);
    Scene scene = Scene::from_systems(OpticalSystem::identity(g), DomainMask::full(g),
                                      std::move(slots));
    std::mt19937_64 rng(5);
    PumpProfile pump = PumpProfile::from_field(random_field(rng, g));

    ComplexField q = q_field(scene, 0, pump, OpticalSystem::identity(g));
    // hI row at cell is the delta (1/cell measure at cell): q = zeta .* that
    for (int i = 0; i < 10; ++i) {
        const Complex expect = i == cell
                                   ? pump.zeta.values[cell] / g.cell_measure()
                                   : Complex(0.0, 0.0);
        CHECK(std::abs(q.values[i] - expect) < 1e-12);
    }
}

TEST_CASE("q_field: uniform pump through fresnel h2 is the propagated point response") {
    GridSpec g = GridSpec::line(64, 1.0);
    const int cell = 40;
    std::vector<Scene::Slot> slots(1);
    slots[0].cell = cell;
    slots[0].given.eta = Complex(0.3, 0.0);
    slots[0].illumination = OpticalSystem::identity(g);
    slots[0].scattering = OpticalSystem::identity(g);
    Scene scene = Scene::from_systems(OpticalSystem::identity(g), DomainMask::full(g),
                                      std::move(slots));
    PumpProfile ones;
    ones.zeta = ComplexField::ones(g);
    OpticalSystem h2 = OpticalSystem::fresnel(g, 0.02, 0.45);

    ComplexField q = q_field(scene, 0, ones, h2);
    ComplexField expect = point_response(h2, cell);
    CHECK(rel_err(q.values, expect.values) < 1e-10);
}

TEST_CASE("q_field/r_field/f_kernel: dense random case matches literal quadrature") {
    RandomScene rc = make_scene(11, 16, 2);
    const double dx = rc.g.cell_measure();
    const auto wall_cells = rc.scene.wall().cells();

    for (int j = 0; j < 2; ++j) {
        const auto& slot = rc.scene.scatterers()[static_cast<std::size_t>(j)];
        const auto& ki = rc.ki[static_cast<std::size_t>(j)];
        const auto& ks = rc.ks[static_cast<std::size_t>(j)];

        // q
        ComplexField q = q_field(rc.scene, j, rc.pump, rc.h2);
        for (int x2 = 0; x2 < 16; ++x2) {
            Complex expect(0.0, 0.0);
            for (int x = 0; x < 16; ++x)
                expect += rc.pump.zeta.values[x] * rc.k2(x2, x) * ki(slot.cell, x);
            expect *= dx;
            CHECK(std::abs(q.values[x2] - expect) < 1e-10 * q.values.cwiseAbs().maxCoeff());
        }

        // f
        ComplexField f = f_kernel(rc.scene, j);
        for (int x = 0; x < 16; ++x) {
            Complex expect(0.0, 0.0);
            for (int x1 : wall_cells)
                expect += std::conj(rc.k0(x1, x)) * ks(x1, slot.cell);
            expect *= dx;
            CHECK(std::abs(f.values[x] - expect) < 1e-10 * f.values.cwiseAbs().maxCoeff());
        }

        // r
        ComplexField r = r_field(rc.scene, j, rc.pump, rc.h2);
        for (int x2 = 0; x2 < 16; ++x2) {
            Complex expect(0.0, 0.0);
            for (int x = 0; x < 16; ++x)
                expect += std::conj(rc.pump.zeta.values[x]) * f.values[x] *
                          std::conj(rc.k2(x2, x));
            expect *= dx;
            CHECK(std::abs(r.values[x2] - expect) < 1e-10 * r.values.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("f_kernel: identity systems with full wall give the scatterer delta") {
    GridSpec g = GridSpec::line(10, 1.0);
    std::vector<Scene::Slot> slots(1);
    slots[0].cell = 6;
    slots[0].given.eta = Complex(0.2, 0.0);
    slots[0].illumination = OpticalSystem::identity(g);
    slots[0].scattering = OpticalSystem::identity(g);
    Scene scene = Scene::from_systems(OpticalSystem::identity(g), DomainMask::full(g),
                                      std::move(slots));
    ComplexField f = f_kernel(scene, 0);
    for (int i = 0; i < 10; ++i) {
        const Complex expect = i == 6 ? Complex(1.0 / g.cell_measure(), 0.0)
                                      : Complex(0.0, 0.0);
        CHECK(std::abs(f.values[i] - expect) < 1e-12 / g.cell_measure());
    }
}

TEST_CASE("f_kernel: unitary direct path, full wall, matching scattering path") {
    // completeness: f collapses to the scatterer delta when hS = h0 (unitary)
    std::mt19937_64 rng(13);
    GridSpec g = GridSpec::line(16, 1.0);
    DenseKernel u = random_unitary_kernel(rng, g);
    std::vector<Scene::Slot> slots(1);
    slots[0].cell = 9;
    slots[0].given.eta = Complex(0.1, 0.0);
    slots[0].illumination = OpticalSystem::identity(g);
    slots[0].scattering = OpticalSystem::dense(u);
    Scene scene = Scene::from_systems(OpticalSystem::dense(u), DomainMask::full(g),
                                      std::move(slots));
    ComplexField f = f_kernel(scene, 0);
    ComplexField expect = ComplexField::delta(g, 9);
    CHECK(rel_err(f.values, expect.values) < 1e-9);
}

TEST_CASE("hologram_decomposition: empty scene gives the direct term exactly") {
    RandomScene rc = make_scene(200, 16, 0);
    DecompositionResult d = hologram_decomposition(rc.scene, rc.pump, rc.h2);
    CHECK(d.scatter_term.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.interference.cwiseAbs().maxCoeff() == 0.0);
    Hologram direct = scene_marginal(rc.pump, rc.scene.direct_path(), rc.h2,
                                     rc.scene.wall());
    CHECK(rel_err(d.direct_term.values, direct.values) == 0.0);
}

TEST_CASE("hologram_decomposition: master identity for N in {0,1,2,3}") {
    for (int n_sc : {0, 1, 2, 3}) {
        RandomScene rc = make_scene(300 + static_cast<std::uint64_t>(n_sc), 16, n_sc);
        DecompositionResult d = hologram_decomposition(rc.scene, rc.pump, rc.h2);
        Hologram direct = scene_marginal(rc.pump, effective_h1(rc.scene), rc.h2,
                                         rc.scene.wall());
        Eigen::VectorXd sum = d.direct_term.values + d.scatter_term.values + d.interference;
        CHECK(rel_err(sum, direct.values) < 1e-9);
    }
}

TEST_CASE("hologram_decomposition: master identity on the geometric chamber") {
    ChamberGeometry geom = demo_geometry();
    GridSpec src = GridSpec::line(64, 1.0);
    GridSpec wall_grid = GridSpec::line(128, 1.0);
    DomainMask wall = DomainMask::from_predicate(
        wall_grid, [](double x, double) { return x >= -0.45 && x <= 0.30; });
    std::vector<PointScatterer> sc = {{0.1328125, 0.0, 0.25, Complex(0.3, 0.0)}};
    Scene scene = Scene::from_geometry(geom, src, wall_grid, wall, sc);

    ComplexField z(src);
    for (int i = 0; i < 64; ++i) {
        const double x = src.coord_x(i);
        z.values[i] = std::exp(-x * x / (2 * 0.12 * 0.12));
    }
    PumpProfile pump = PumpProfile::from_field(z);
    OpticalSystem h2 = OpticalSystem::dense(
        fresnel_dense_kernel(GridSpec::line(128, 1.0), src, geom.wavelength, 0.45));

    DecompositionResult d = hologram_decomposition(scene, pump, h2);
    Hologram direct = scene_marginal(pump, effective_h1(scene), h2, scene.wall());
    Eigen::VectorXd sum = d.direct_term.values + d.scatter_term.values + d.interference;
    CHECK(rel_err(sum, direct.values) < 1e-9);

    // the interference term carries visible structure in this preset
    CHECK(d.interference.cwiseAbs().maxCoeff() >
          0.005 * d.direct_term.values.maxCoeff());
}

TEST_CASE("hologram_decomposition: homogeneity in a common real eta scaling") {
    RandomScene base = make_scene(42, 16, 1);
    DecompositionResult d1 = hologram_decomposition(base.scene, base.pump, base.h2);
    for (double c : {0.5, 2.0}) {
        std::vector<Scene::Slot> slots(base.scene.scatterers());
        for (auto& s : slots) s.given.eta *= c;
        Scene scaled = Scene::from_systems(base.scene.direct_path(), base.scene.wall(),
                                           std::move(slots));
        DecompositionResult dc = hologram_decomposition(scaled, base.pump, base.h2);
        Eigen::VectorXd scat_expect = d1.scatter_term.values * c * c;
        Eigen::VectorXd intf_expect = d1.interference * c;
        CHECK(rel_err(dc.scatter_term.values, scat_expect) < 1e-10);
        CHECK(rel_err(dc.interference, intf_expect) < 1e-10);
    }
}

TEST_CASE("hologram_decomposition: N=2 cross terms are exactly the superposition failure") {
    RandomScene rc = make_scene(55, 16, 2);
    DecompositionResult both = hologram_decomposition(rc.scene, rc.pump, rc.h2);

    // single-scatterer scenes
    Eigen::VectorXd singles_sum = Eigen::VectorXd::Zero(16);
    for (int j = 0; j < 2; ++j) {
        std::vector<Scene::Slot> one = {rc.scene.scatterers()[static_cast<std::size_t>(j)]};
        Scene sj = Scene::from_systems(rc.scene.direct_path(), rc.scene.wall(),
                                       std::move(one));
        singles_sum += hologram_decomposition(sj, rc.pump, rc.h2).scatter_term.values;
    }

    // cross term via the wall-overlap kernel
    Eigen::VectorXd cross =
        both.scatter_term.values - both.scatter_term_without_cross();
    Eigen::VectorXd failure = both.scatter_term.values - singles_sum;
    CHECK(rel_err(cross, failure) < 1e-9);
    CHECK(cross.cwiseAbs().maxCoeff() > 0.0);

    // omitting the cross terms breaks the master identity measurably
    Hologram direct = scene_marginal(rc.pump, effective_h1(rc.scene), rc.h2,
                                     rc.scene.wall());
    Eigen::VectorXd no_cross = both.direct_term.values +
                               both.scatter_term_without_cross() + both.interference;
    CHECK(rel_err(no_cross, direct.values) > 1e-4);
}

TEST_CASE("scene determinism: identical geometry rebuilds bitwise identical kernels") {
    ChamberGeometry geom = demo_geometry();
    GridSpec src = GridSpec::line(32, 1.0);
    GridSpec wall_grid = GridSpec::line(48, 1.0);
    DomainMask wall = DomainMask::full(wall_grid);
    std::vector<PointScatterer> sc = {{0.1, 0.0, 0.2, Complex(0.25, 0.1)}};

    Scene a = Scene::from_geometry(geom, src, wall_grid, wall, sc);
    Scene b = Scene::from_geometry(geom, src, wall_grid, wall, sc);
    DenseKernel ka = to_dense(effective_h1(a));
    DenseKernel kb = to_dense(effective_h1(b));
    CHECK(ka.k == kb.k);
    CHECK(a.hash() == b.hash());
}

TEST_CASE("scene geometry validation") {
    ChamberGeometry geom = demo_geometry();
    GridSpec src = GridSpec::line(16, 1.0);
    GridSpec wg = GridSpec::line(16, 1.0);
    DomainMask wall = DomainMask::full(wg);

    // depth outside the chamber
    CHECK_THROWS_AS(Scene::from_geometry(geom, src, wg, wall,
                                         {{0.0, 0.0, 0.6, Complex(0.1, 0.0)}}),
                    DegenerateInputError);
    // transverse position off the grid
    CHECK_THROWS_AS(Scene::from_geometry(geom, src, wg, wall,
                                         {{0.9, 0.0, 0.2, Complex(0.1, 0.0)}}),
                    DegenerateInputError);

    // snap offsets are recorded
    Scene s = Scene::from_geometry(geom, src, wg, wall,
                                   {{0.11, 0.0, 0.2, Complex(0.1, 0.0)}});
    const auto& slot = s.scatterers()[0];
    CHECK(std::abs(slot.snap_x) <= src.dx() / 2 + 1e-15);
    CHECK(src.coord_x(src.ix_of(slot.cell)) ==
          doctest::Approx(0.11 + slot.snap_x).epsilon(1e-12));
}
