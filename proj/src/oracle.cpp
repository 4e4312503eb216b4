#include "qholo/oracle.hpp"

#include <random>

namespace qholo::oracle {

Hologram dense_marginal(const ComplexField& zeta, const DenseKernel& h1,
                        const DenseKernel& h2, const DomainMask& wall,
                        const OracleBudget& budget) {
    require_same_grid(zeta.grid, h1.input, "dense_marginal zeta/h1");
    require_same_grid(zeta.grid, h2.input, "dense_marginal zeta/h2");
    require_same_grid(wall.grid, h1.output, "dense_marginal wall");
    budget.check_matrix(h1.output, h1.input, "dense_marginal");
    budget.check_matrix(h2.output, h2.input, "dense_marginal");

    const int ns = zeta.grid.total();
    const int n1 = h1.output.total();
    const int n2 = h2.output.total();
    const double dx = zeta.grid.cell_measure();
    const double dx1 = h1.output.cell_measure();

    Hologram out(h2.output);
    for (int x1 = 0; x1 < n1; ++x1) {
        if (!wall.contains(x1)) continue;
        for (int x2 = 0; x2 < n2; ++x2) {
            Complex a(0.0, 0.0);
            for (int x = 0; x < ns; ++x) a += zeta.values[x] * h1.k(x1, x) * h2.k(x2, x);
            a *= dx;
            out.values[x2] += std::norm(a) * dx1;
        }
    }
    return out;
}

DenseDecomposition dense_decomposition(const ComplexField& zeta, const DenseKernel& h0,
                                       const std::vector<DenseSceneTerm>& terms,
                                       const DenseKernel& h2, const DomainMask& wall,
                                       const OracleBudget& budget) {
    require_same_grid(zeta.grid, h0.input, "dense_decomposition zeta/h0");
    require_same_grid(zeta.grid, h2.input, "dense_decomposition zeta/h2");
    require_same_grid(wall.grid, h0.output, "dense_decomposition wall");
    budget.check_matrix(h0.output, h0.input, "dense_decomposition");

    const int ns = zeta.grid.total();
    const int n1 = h0.output.total();
    const int n2 = h2.output.total();
    const int nsc = static_cast<int>(terms.size());
    const double dx = zeta.grid.cell_measure();
    const double dx1 = h0.output.cell_measure();

    DenseDecomposition out;
    out.direct_term = dense_marginal(zeta, h0, h2, wall, budget).values;

    // Per-scatterer ingredient fields by literal sums.
    std::vector<Eigen::VectorXcd> wall_wave; // hS_j(x1, x_j) over the wall
    for (const auto& t : terms) {
        require_same_grid(t.illumination.input, zeta.grid, "dense_decomposition hI");
        require_same_grid(t.illumination.output, zeta.grid, "dense_decomposition hI out");
        require_same_grid(t.scattering.output, h0.output, "dense_decomposition hS");
        Eigen::VectorXcd w(n1);
        for (int x1 = 0; x1 < n1; ++x1) w[x1] = t.scattering.k(x1, t.cell);
        wall_wave.push_back(std::move(w));
    }

    out.q.resize(terms.size());
    out.r.resize(terms.size());
    for (int j = 0; j < nsc; ++j) {
        const auto& t = terms[static_cast<std::size_t>(j)];
        // q_j(x2) = sum_x zeta(x) h2(x2,x) hI(x_j, x) dx
        Eigen::VectorXcd q(n2);
        for (int x2 = 0; x2 < n2; ++x2) {
            Complex acc(0.0, 0.0);
            for (int x = 0; x < ns; ++x)
                acc += zeta.values[x] * h2.k(x2, x) * t.illumination.k(t.cell, x);
            q[x2] = acc * dx;
        }
        // f_j(x) = sum_{x1 in wall} conj(h0(x1,x)) hS_j(x1, x_j) dx1
        Eigen::VectorXcd f(ns);
        for (int x = 0; x < ns; ++x) {
            Complex acc(0.0, 0.0);
            for (int x1 = 0; x1 < n1; ++x1)
                if (wall.contains(x1))
                    acc += std::conj(h0.k(x1, x)) * wall_wave[static_cast<std::size_t>(j)][x1];
            f[x] = acc * dx1;
        }
        // r_j(x2) = sum_x conj(zeta(x)) f_j(x) conj(h2(x2,x)) dx
        Eigen::VectorXcd r(n2);
        for (int x2 = 0; x2 < n2; ++x2) {
            Complex acc(0.0, 0.0);
            for (int x = 0; x < ns; ++x)
                acc += std::conj(zeta.values[x]) * f[x] * std::conj(h2.k(x2, x));
            r[x2] = acc * dx;
        }
        out.q[static_cast<std::size_t>(j)] = std::move(q);
        out.r[static_cast<std::size_t>(j)] = std::move(r);
    }

    out.wall_overlap.resize(nsc, nsc);
    for (int i = 0; i < nsc; ++i)
        for (int j = 0; j < nsc; ++j) {
            Complex acc(0.0, 0.0);
            for (int x1 = 0; x1 < n1; ++x1)
                if (wall.contains(x1))
                    acc += wall_wave[static_cast<std::size_t>(i)][x1] *
                           std::conj(wall_wave[static_cast<std::size_t>(j)][x1]);
            out.wall_overlap(i, j) = acc * dx1;
        }

    out.scatter_term = Eigen::VectorXd::Zero(n2);
    out.interference = Eigen::VectorXd::Zero(n2);
    for (int x2 = 0; x2 < n2; ++x2) {
        Complex scat(0.0, 0.0);
        Complex intf(0.0, 0.0);
        for (int i = 0; i < nsc; ++i) {
            const Complex ki = terms[static_cast<std::size_t>(i)].eta * dx;
            for (int j = 0; j < nsc; ++j) {
                const Complex kj = terms[static_cast<std::size_t>(j)].eta * dx;
                scat += ki * std::conj(kj) * out.wall_overlap(i, j) *
                        out.q[static_cast<std::size_t>(i)][x2] *
                        std::conj(out.q[static_cast<std::size_t>(j)][x2]);
            }
            intf += 2.0 * ki * out.q[static_cast<std::size_t>(i)][x2] *
                    out.r[static_cast<std::size_t>(i)][x2];
        }
        out.scatter_term[x2] = scat.real();
        out.interference[x2] = intf.real();
    }
    return out;
}

namespace {

// Fixed-seed random dense instances for the check battery.
struct RandomCase {
    GridSpec g;
    ComplexField zeta;
    DenseKernel h0, h2;
    std::vector<DenseSceneTerm> terms;
    DomainMask wall;
};

Eigen::MatrixXcd random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXcd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = Complex(nd(rng), nd(rng));
    return m;
}

RandomCase make_case(std::uint64_t seed, int n, int n_scatterers) {
    std::mt19937_64 rng(seed);
    RandomCase rc;
    rc.g = GridSpec::line(n, 1.0);
    Eigen::VectorXcd z = random_matrix(rng, n, 1);
    rc.zeta = normalize(ComplexField(rc.g, std::move(z)));
    rc.h0 = DenseKernel(rc.g, rc.g, random_matrix(rng, n, n));
    rc.h2 = DenseKernel(rc.g, rc.g, random_matrix(rng, n, n));
    std::uniform_int_distribution<int> cell_dist(0, n - 1);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int j = 0; j < n_scatterers; ++j) {
        DenseSceneTerm t;
        t.cell = cell_dist(rng);
        t.eta = 0.5 * Complex(nd(rng), nd(rng));
        t.illumination = DenseKernel(rc.g, rc.g, random_matrix(rng, n, n));
        t.scattering = DenseKernel(rc.g, rc.g, random_matrix(rng, n, n));
        rc.terms.push_back(std::move(t));
    }
    rc.wall = DomainMask::from_predicate(rc.g, [](double x, double) { return x > -0.2; });
    return rc;
}

Scene fast_scene(const RandomCase& rc) {
    std::vector<Scene::Slot> slots;
    for (const auto& t : rc.terms) {
        Scene::Slot s;
        s.given.eta = t.eta;
        s.cell = t.cell;
        s.illumination = OpticalSystem::dense(t.illumination);
        s.scattering = OpticalSystem::dense(t.scattering);
        slots.push_back(std::move(s));
    }
    return Scene::from_systems(OpticalSystem::dense(rc.h0), rc.wall, std::move(slots));
}

double rel_residual(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    if (!(scale > 0.0)) return 0.0;
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

} // namespace

std::vector<CheckResult> run_check_battery(double tolerance_scale) {
    std::vector<CheckResult> results;
    auto add = [&](const std::string& name, double res, double tol) {
        results.push_back(CheckResult{name, res, tol * tolerance_scale});
    };

    // Fast marginal path vs literal quadrature, randomized small instances.
    {
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            RandomCase rc = make_case(1000 + s, 16, 0);
            PumpProfile pump = PumpProfile::from_field(rc.zeta, false);
            Hologram fast = scene_marginal(pump, OpticalSystem::dense(rc.h0),
                                           OpticalSystem::dense(rc.h2), rc.wall);
            Hologram ref = dense_marginal(rc.zeta, rc.h0, rc.h2, rc.wall);
            worst = std::max(worst, rel_residual(fast.values, ref.values));
        }
        add("marginal fast path vs dense quadrature (20 x 16 cells)", worst, 1e-10);
    }

    // Decomposition fast path vs literal quadrature, N in {1,2,3}.
    {
        double worst = 0.0;
        double worst_master = 0.0;
        for (int nsc = 1; nsc <= 3; ++nsc)
            for (std::uint64_t s = 0; s < 5; ++s) {
                RandomCase rc = make_case(2000 + 10 * static_cast<std::uint64_t>(nsc) + s, 16, nsc);
                PumpProfile pump = PumpProfile::from_field(rc.zeta, false);
                DenseDecomposition ref =
                    dense_decomposition(rc.zeta, rc.h0, rc.terms, rc.h2, rc.wall);
                Scene scene = fast_scene(rc);
                DecompositionResult fast =
                    hologram_decomposition(scene, pump, OpticalSystem::dense(rc.h2));
                worst = std::max({worst,
                                  rel_residual(fast.direct_term.values, ref.direct_term),
                                  rel_residual(fast.scatter_term.values, ref.scatter_term),
                                  rel_residual(fast.interference, ref.interference)});
                Hologram direct = scene_marginal(pump, effective_h1(scene),
                                                 OpticalSystem::dense(rc.h2), rc.wall);
                Eigen::VectorXd sum = ref.direct_term + ref.scatter_term + ref.interference;
                worst_master = std::max(worst_master, rel_residual(sum, direct.values));
            }
        add("decomposition fast path vs dense quadrature (N=1..3)", worst, 1e-10);
        add("three-term sum vs direct marginal (literal quadrature)", worst_master, 1e-11);
    }

    // Summation-order independence of the dense marginal oracle.
    {
        RandomCase rc = make_case(3000, 12, 0);
        Hologram ref = dense_marginal(rc.zeta, rc.h0, rc.h2, rc.wall);
        // reversed-order zeta sum: permute source cells by reversing storage
        GridSpec g = rc.g;
        Eigen::VectorXcd zr = rc.zeta.values.reverse();
        Eigen::MatrixXcd k0 = rc.h0.k.rowwise().reverse();
        Eigen::MatrixXcd k2 = rc.h2.k.rowwise().reverse();
        Hologram ref2 = dense_marginal(ComplexField(g, zr), DenseKernel(g, g, k0),
                                       DenseKernel(g, g, k2), rc.wall);
        add("dense marginal summation-order shuffle", rel_residual(ref.values, ref2.values),
            1e-12);
    }

    return results;
}

} // namespace qholo::oracle
