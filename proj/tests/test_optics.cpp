#include <doctest.h>

#include <numbers>
#include <random>

#include "qholo/optics.hpp"
#include "support/random_fields.hpp"

using namespace qholo;
using namespace qholo::testing;

namespace {

// Band-limited probe confined to the central half of the grid.
ComplexField central_gaussian(const GridSpec& g, double sigma, double cx, double cy = 0.0) {
    ComplexField f(g);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const double ux = g.coord_x(ix) - cx;
            const double uy = g.coord_y(iy) - cy;
            f.values[g.index(ix, iy)] = std::exp(-(ux * ux + uy * uy) / (2 * sigma * sigma));
        }
    return f;
}

} // namespace

TEST_CASE("forward: identity returns the field unchanged") {
    std::mt19937_64 rng(1);
    GridSpec g = GridSpec::line(16, 1.0);
    ComplexField f = random_field(rng, g);
    CHECK(OpticalSystem::identity(g).forward(f).values == f.values);
    CHECK(OpticalSystem::identity(g).adjoint(f).values == f.values);
}

TEST_CASE("forward: quadrature-weighted identity matrix acts as identity") {
    std::mt19937_64 rng(2);
    GridSpec g = GridSpec::line(12, 3.0);
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Identity(12, 12) / g.cell_measure();
    OpticalSystem sys = OpticalSystem::dense(DenseKernel(g, g, k));
    ComplexField f = random_field(rng, g);
    CHECK(rel_err(sys.forward(f).values, f.values) < 1e-14);
}

TEST_CASE("forward: fresnel FFT path equals the dense analytic kernel") {
    // 256 cells, distance just above critical sampling; inputs confined to the
    // central half.
    const int n = 256;
    const double extent = 1.0;
    const double lambda = 0.01;
    const double d = 1.1 * extent * extent / (n * lambda);
    GridSpec g = GridSpec::line(n, extent);
    OpticalSystem fast = OpticalSystem::fresnel(g, lambda, d);
    OpticalSystem dense = OpticalSystem::dense(fresnel_dense_kernel(g, g, lambda, d));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 25; ++t) {
        const double sigma = extent / 24 + (extent / 16 - extent / 24) * ud(rng);
        const double c = (ud(rng) - 0.5) * extent / 4;
        ComplexField f = central_gaussian(g, sigma, c);
        worst = std::max(worst, rel_err(fast.forward(f).values, dense.forward(f).values));
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("adjoint: mask applies the conjugate transmittance") {
    std::mt19937_64 rng(3);
    GridSpec g = GridSpec::line(10, 1.0);
    ComplexField t = random_field(rng, g);
    ComplexField v = random_field(rng, g);
    OpticalSystem m = OpticalSystem::mask(t);
    ComplexField out = m.adjoint(v);
    for (int i = 0; i < 10; ++i)
        CHECK(std::abs(out.values[i] - std::conj(t.values[i]) * v.values[i]) < 1e-15);
}

TEST_CASE("adjoint: fresnel adjoint equals propagation by -d") {
    std::mt19937_64 rng(4);
    GridSpec g = GridSpec::line(64, 1.0);
    OpticalSystem fwd = OpticalSystem::fresnel(g, 0.02, 0.4);
    OpticalSystem back = OpticalSystem::fresnel(g, 0.02, -0.4);
    for (int t = 0; t < 5; ++t) {
        ComplexField u = random_field(rng, g);
        CHECK(rel_err(fwd.adjoint(u).values, back.forward(u).values) < 1e-12);
    }
}

TEST_CASE("adjoint identity holds for every system kind") {
    std::mt19937_64 rng(5);
    GridSpec g = GridSpec::line(24, 1.2);
    GridSpec g2 = GridSpec::line(18, 0.8);

    std::vector<OpticalSystem> systems;
    systems.push_back(OpticalSystem::identity(g));
    systems.push_back(OpticalSystem::dense(DenseKernel(g, g2, random_matrix(rng, 18, 24))));
    systems.push_back(OpticalSystem::fresnel(g, 0.015, 0.33));
    systems.push_back(OpticalSystem::thin_lens(g, 0.015, 0.5));
    systems.push_back(OpticalSystem::mask(random_field(rng, g)));
    systems.push_back(OpticalSystem::cascade(
        {OpticalSystem::fresnel(g, 0.015, 0.2), OpticalSystem::mask(random_field(rng, g)),
         OpticalSystem::dense(DenseKernel(g, g2, random_matrix(rng, 18, 24)))}));
    systems.push_back(OpticalSystem::sum(
        {OpticalSystem::fresnel(g, 0.015, 0.1), OpticalSystem::thin_lens(g, 0.015, 0.7)}));

    for (const auto& sys : systems)
        CHECK(adjoint_identity_defect(sys, rng, 25) < 1e-10);
}

TEST_CASE("thin lens is a pure phase: output magnitudes equal input magnitudes") {
    std::mt19937_64 rng(6);
    GridSpec g = GridSpec::plane(12, 12, 1.0, 1.0);
    OpticalSystem lens = OpticalSystem::thin_lens(g, 0.02, 0.4);
    ComplexField f = random_field(rng, g);
    ComplexField out = lens.forward(f);
    for (int i = 0; i < f.size(); ++i)
        CHECK(std::abs(std::abs(out.values[i]) - std::abs(f.values[i])) < 1e-14);
}

TEST_CASE("fresnel is unitary and linear") {
    std::mt19937_64 rng(8);
    GridSpec g = GridSpec::plane(16, 16, 1.0, 1.0);
    OpticalSystem p = OpticalSystem::fresnel(g, 0.02, 0.37);
    ComplexField f = random_field(rng, g);
    ComplexField h = random_field(rng, g);
    CHECK(std::abs(norm(p.forward(f)) - norm(f)) < 1e-10 * norm(f));

    const Complex a(0.3, -0.8), b(-1.1, 0.2);
    ComplexField combo(g);
    combo.values = a * f.values + b * h.values;
    ComplexField lhs = p.forward(combo);
    Eigen::VectorXcd rhs = a * p.forward(f).values + b * p.forward(h).values;
    CHECK(rel_err(lhs.values, rhs) < 1e-12);
}

TEST_CASE("compose: identity neutral element and mask algebra") {
    std::mt19937_64 rng(9);
    GridSpec g = GridSpec::line(20, 1.0);
    OpticalSystem s = OpticalSystem::fresnel(g, 0.02, 0.25);
    OpticalSystem c = compose(OpticalSystem::identity(g), s);
    ComplexField f = random_field(rng, g);
    CHECK(rel_err(c.forward(f).values, s.forward(f).values) < 1e-12);

    ComplexField t1 = random_field(rng, g);
    ComplexField t2 = random_field(rng, g);
    OpticalSystem m21 = compose(OpticalSystem::mask(t2), OpticalSystem::mask(t1));
    OpticalSystem prod = OpticalSystem::mask(pointwise_multiply(t2, t1));
    CHECK(rel_err(m21.forward(f).values, prod.forward(f).values) < 1e-12);
}

TEST_CASE("compose: fresnel distances cancel to the identity") {
    std::mt19937_64 rng(10);
    GridSpec g = GridSpec::line(64, 1.0);
    OpticalSystem round_trip = compose(OpticalSystem::fresnel(g, 0.02, -0.3),
                                       OpticalSystem::fresnel(g, 0.02, 0.3));
    ComplexField f = random_field(rng, g);
    CHECK(rel_err(round_trip.forward(f).values, f.values) < 1e-9);
}

TEST_CASE("compose: grid-incompatible members are rejected") {
    GridSpec a = GridSpec::line(8, 1.0);
    GridSpec b = GridSpec::line(12, 1.0);
    CHECK_THROWS_AS(compose(OpticalSystem::identity(a), OpticalSystem::identity(b)),
                    GridMismatchError);
}

TEST_CASE("point_response: identity gives a delta, dense gives the kernel column") {
    GridSpec g = GridSpec::line(9, 1.0);
    ComplexField d = point_response(OpticalSystem::identity(g), 4);
    CHECK(d.values[4] == Complex(9.0, 0.0)); // 1 / cell measure
    for (int i = 0; i < 9; ++i)
        if (i != 4) CHECK(d.values[i] == Complex(0.0, 0.0));

    std::mt19937_64 rng(11);
    Eigen::MatrixXcd k = random_matrix(rng, 9, 9);
    OpticalSystem sys = OpticalSystem::dense(DenseKernel(g, g, k));
    ComplexField col = point_response(sys, 2);
    CHECK(rel_err(col.values, Eigen::VectorXcd(k.col(2))) < 1e-13);

    CHECK_THROWS_AS(point_response(sys, 9), IndexRangeError);
}

TEST_CASE("point_response: fresnel matches the analytic kernel column") {
    // At the matched-sampling distance lambda*d = extent^2/n the sampled
    // chirp is exactly grid-periodic (even n), so the circular propagator's
    // point response coincides with the aperiodic analytic kernel.
    const int n = 256;
    const double extent = 1.0, lambda = 0.01;
    const double d = extent * extent / (n * lambda);
    GridSpec g = GridSpec::line(n, extent);
    OpticalSystem fast = OpticalSystem::fresnel(g, lambda, d);
    DenseKernel analytic = fresnel_dense_kernel(g, g, lambda, d);
    for (int cell : {n / 2, n / 3, 7}) {
        ComplexField pr = point_response(fast, cell);
        CHECK(rel_err(pr.values, Eigen::VectorXcd(analytic.k.col(cell))) < 1e-7);
    }
}

TEST_CASE("to_dense: identity, cascade product, mask diagonal") {
    std::mt19937_64 rng(12);
    GridSpec g = GridSpec::line(8, 1.0);
    const double w = g.cell_measure();

    DenseKernel id = to_dense(OpticalSystem::identity(g));
    CHECK(rel_err(Eigen::VectorXcd(id.k.reshaped()),
                  Eigen::VectorXcd((Eigen::MatrixXcd::Identity(8, 8) / w).reshaped())) < 1e-13);

    Eigen::MatrixXcd ka = random_matrix(rng, 8, 8);
    Eigen::MatrixXcd kb = random_matrix(rng, 8, 8);
    OpticalSystem cascade = compose(OpticalSystem::dense(DenseKernel(g, g, kb)),
                                    OpticalSystem::dense(DenseKernel(g, g, ka)));
    DenseKernel kc = to_dense(cascade);
    Eigen::MatrixXcd expect = kb * ka * w; // quadrature-weighted matrix product
    CHECK(rel_err(Eigen::VectorXcd(kc.k.reshaped()), Eigen::VectorXcd(expect.reshaped())) <
          1e-12);

    ComplexField t = random_field(rng, g);
    DenseKernel km = to_dense(OpticalSystem::mask(t));
    Eigen::MatrixXcd diag = (t.values / w).asDiagonal();
    CHECK(rel_err(Eigen::VectorXcd(km.k.reshaped()), Eigen::VectorXcd(diag.reshaped())) <
          1e-13);
}

TEST_CASE("to_dense: cap exceeded raises budget error") {
    GridSpec g = GridSpec::line(512, 1.0);
    OracleBudget tiny;
    tiny.max_cells_per_plane = 256;
    CHECK_THROWS_AS(to_dense(OpticalSystem::identity(g), tiny), BudgetExceededError);
}

TEST_CASE("dense equivalence: every fast kind equals its to_dense probe on central fields") {
    std::mt19937_64 rng(13);
    GridSpec g = GridSpec::line(48, 1.0);
    std::vector<OpticalSystem> systems;
    systems.push_back(OpticalSystem::fresnel(g, 0.02, 0.45));
    systems.push_back(OpticalSystem::thin_lens(g, 0.02, 0.6));
    systems.push_back(OpticalSystem::cascade({OpticalSystem::fresnel(g, 0.02, 0.2),
                                              OpticalSystem::thin_lens(g, 0.02, 0.5),
                                              OpticalSystem::fresnel(g, 0.02, 0.15)}));
    for (const auto& sys : systems) {
        DenseKernel k = to_dense(sys);
        OpticalSystem dense = OpticalSystem::dense(k);
        ComplexField f = central_gaussian(g, 0.06, 0.05);
        CHECK(rel_err(sys.forward(f).values, dense.forward(f).values) < 1e-7);
        CHECK(rel_err(sys.adjoint(f).values, dense.adjoint(f).values) < 1e-7);
    }
}

TEST_CASE("fresnel rejects zero distance") {
    GridSpec g = GridSpec::line(8, 1.0);
    CHECK_THROWS_AS(OpticalSystem::fresnel(g, 0.02, 0.0), DegenerateInputError);
}

TEST_CASE("transpose and conjugate application agree with dense kernels") {
    std::mt19937_64 rng(14);
    GridSpec gin = GridSpec::line(10, 1.0);
    GridSpec gout = GridSpec::line(14, 2.0);
    Eigen::MatrixXcd k = random_matrix(rng, 14, 10);
    OpticalSystem sys = OpticalSystem::dense(DenseKernel(gin, gout, k));

    ComplexField u = random_field(rng, gout);
    ComplexField f = random_field(rng, gin);

    // transpose maps output grid -> input grid with kernel k(x_out, x_in)
    Eigen::VectorXcd want_t = k.transpose() * u.values * gout.cell_measure();
    CHECK(rel_err(apply_transpose(sys, u).values, want_t) < 1e-13);

    Eigen::VectorXcd want_c = k.conjugate() * f.values * gin.cell_measure();
    CHECK(rel_err(apply_conjugate(sys, f).values, want_c) < 1e-13);
}

TEST_CASE("QHK1 round-trip at float32 precision") {
    std::mt19937_64 rng(15);
    Eigen::MatrixXcd k = random_matrix(rng, 6, 4);
    std::ostringstream os(std::ios::binary);
    write_qhk1(os, k);
    std::istringstream is(os.str(), std::ios::binary);
    Eigen::MatrixXcd back = read_qhk1(is);
    REQUIRE(back.rows() == 6);
    REQUIRE(back.cols() == 4);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 4; ++c) {
            CHECK(static_cast<float>(k(r, c).real()) == static_cast<float>(back(r, c).real()));
            CHECK(static_cast<float>(k(r, c).imag()) == static_cast<float>(back(r, c).imag()));
        }
}
