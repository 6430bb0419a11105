#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deloc/rng.hpp>
#include <deloc/spectral.hpp>
#include <deloc/ucp1d.hpp>

#include <cmath>
#include <map>
#include <numbers>

using namespace deloc;
using namespace deloc::ucp;

TEST_CASE("doubling constant matches frozen values") {
    CHECK(c_sve(1.0, 0.0) == doctest::Approx(50.911688245431421).epsilon(1e-14));
    CHECK(c_sve(1.0, 18.0) == doctest::Approx(72.0).epsilon(1e-14)); // 2 sqrt(648+648)
    CHECK(c_sve(2.0, 0.0) == doctest::Approx(25.45584412271571).epsilon(1e-14));
    CHECK(c_sve(0.5, 3.0) == doctest::Approx(101.91172650877817).epsilon(1e-14));
    // at zero deviation the constant scales like 1/s
    CHECK(c_sve(0.25, 0.0) == doctest::Approx(4 * c_sve(1.0, 0.0)).epsilon(1e-13));
    // monotone in the deviation
    CHECK(c_sve(1.0, 2.0) > c_sve(1.0, 1.0));
    CHECK_THROWS_AS(c_sve(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(c_sve(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("restricted mass approximates the continuum integral") {
    auto g = GridSpec::make(1, Vec{0.0, 0.0}, 4.0, 0.01);
    Eigen::VectorXd phi(g.total_nodes());
    for (long i = 0; i < g.total_nodes(); ++i)
        phi[i] = std::sin(std::numbers::pi * (g.node(i)[0] + 2.0) / 4.0);
    // integral of sin^2(pi(x+2)/4) over (c-s/2, c+s/2)
    auto exact = [](double c, double s) {
        auto F = [](double x) { // antiderivative of sin^2(pi(x+2)/4)
            return x / 2.0 - std::sin(std::numbers::pi * (x + 2.0) / 2.0) / (std::numbers::pi);
        };
        return F(c + s / 2) - F(c - s / 2);
    };
    for (auto [c, s] : {std::pair{0.0, 1.0}, {0.5, 2.0}, {-1.0, 0.5}, {0.0, 4.0}}) {
        double got = restricted_mass(phi, g, c, s);
        CHECK(got == doctest::Approx(exact(c, s)).epsilon(0.02));
    }
    // windows outside the box carry no mass
    CHECK(restricted_mass(phi, g, 10.0, 1.0) == 0.0);
    // monotone in the window size
    CHECK(restricted_mass(phi, g, 0.0, 1.0) <= restricted_mass(phi, g, 0.0, 2.0));
}

TEST_CASE("restricted mass converges under grid refinement") {
    auto run = [](double h) {
        auto g = GridSpec::make(1, Vec{0.0, 0.0}, 4.0, h);
        Eigen::VectorXd phi(g.total_nodes());
        for (long i = 0; i < g.total_nodes(); ++i) phi[i] = g.node(i)[0]; // phi = x
        return restricted_mass(phi, g, 0.0, 1.0);                        // int x^2 = 1/12
    };
    double e1 = std::abs(run(0.02) - 1.0 / 12);
    double e2 = std::abs(run(0.002) - 1.0 / 12);
    CHECK(e2 < e1);
    CHECK(run(0.002) == doctest::Approx(1.0 / 12).epsilon(5e-3));
}

TEST_CASE("mass cannot jump under window translation faster than the bound") {
    // disordered operator, ground state: check several translated windows
    Box w{1, Vec{0.0, 0.0}, 16.0};
    auto base = generate_lattice(1, 1.0, w);
    Rng rng(37);
    auto pair = make_delone_pair(base, rng);
    SingleSitePotential u(0.8, 0.4, 0.9, BumpProfile::flat);
    auto grid = GridSpec::make(1, Vec{0.0, 0.0}, 12.0, 0.1);
    auto omega = sample_config(pair.extra.points, 0.5, rng);
    auto H = assemble_hamiltonian(pair, u, omega, std::nullopt, grid);
    auto gs = ground_state(H.matrix);
    const Eigen::VectorXd phi = gs.vectors.col(0);
    for (double k : {-3.0, 0.0, 2.0}) {
        for (double y : {-1.0, -0.5, 0.5, 1.0}) {
            auto tb = translate_bound_check(phi, grid, H.potential, gs.eigenvalues[0], 1.0, k, y);
            CHECK_FALSE(tb.vacuous);
            CHECK(tb.holds);
            CHECK(tb.lhs <= tb.rhs * 1.1);
            CHECK(tb.constant == doctest::Approx(c_sve(1.0, [&] {
                      double dev = 0.0;
                      for (long i = 0; i < H.potential.size(); ++i)
                          dev = std::max(dev, std::abs(H.potential[i] - gs.eigenvalues[0]));
                      return dev;
                  }())));
        }
    }
    // a window fully outside the box is vacuous
    auto tb = translate_bound_check(phi, grid, H.potential, gs.eigenvalues[0], 1.0, 20.0, 0.5);
    CHECK(tb.vacuous);
    CHECK(tb.holds);
}

TEST_CASE("index sets for L = 3M collapse the boundary centres") {
    auto js = index_sets(0.0, 6.0, 2.0);
    CHECK(js.j_min == -1);
    CHECK(js.j_max == 1);
    CHECK(js.left_boundary == doctest::Approx(-2.0));
    CHECK(js.right_boundary == doctest::Approx(2.0));
    REQUIRE(js.all.size() == 3); // boundaries coincide with lattice centres
    CHECK(js.all[0] == doctest::Approx(-2.0));
    CHECK(js.all[1] == doctest::Approx(0.0));
    CHECK(js.all[2] == doctest::Approx(2.0));
}

TEST_CASE("index sets for fractional L/M keep distinct boundary centres") {
    auto js = index_sets(0.0, 7.0, 2.0);
    CHECK(js.j_min == -1);
    CHECK(js.j_max == 1);
    REQUIRE(js.all.size() == 5);
    CHECK(js.all[0] == doctest::Approx(-2.5));
    CHECK(js.all[1] == doctest::Approx(-2.0));
    CHECK(js.all[2] == doctest::Approx(0.0));
    CHECK(js.all[3] == doctest::Approx(2.0));
    CHECK(js.all[4] == doctest::Approx(2.5));
    CHECK_THROWS_AS(index_sets(0.0, 2.0, 2.0), std::invalid_argument);
}

TEST_CASE("tau map: identity, outward reassignment, and fallback") {
    // x=0, L=11, M=2: J1 = {-4,...,4}, boundaries at +-4.5, neighbours +-6
    double x = 0.0, L = 11.0, M = 2.0, s = 0.4;
    CentreMap centres;
    for (long j = -3; j <= 3; ++j) centres[j] = 2.0 * static_cast<double>(j);
    // lattice elements map to themselves
    CHECK(tau_map(0.0, x, L, M, s, centres) == doctest::Approx(0.0));
    CHECK(tau_map(-4.0, x, L, M, s, centres) == doctest::Approx(-4.0));
    CHECK(tau_map(4.0, x, L, M, s, centres) == doctest::Approx(4.0));
    // boundary centres: neighbour windows at +-6 do not fit inside (-5.5, 5.5),
    // so they fall back to the extreme lattice centres
    CHECK(tau_map(4.5, x, L, M, s, centres) == doctest::Approx(4.0));
    CHECK(tau_map(-4.5, x, L, M, s, centres) == doctest::Approx(-4.0));
    // pulling the neighbour centre inward makes its window fit: reassign outward
    centres[3] = 5.2;   // window (5.0, 5.4) inside (-5.5, 5.5)
    centres[-3] = -5.2;
    CHECK(tau_map(4.5, x, L, M, s, centres) == doctest::Approx(6.0));
    CHECK(tau_map(-4.5, x, L, M, s, centres) == doctest::Approx(-6.0));
    // foreign kappa and missing neighbour centres are errors
    CHECK_THROWS_AS(tau_map(1.0, x, L, M, s, centres), std::invalid_argument);
    CentreMap sparse; // no entry for the outward neighbours
    for (long j = -2; j <= 2; ++j) sparse[j] = 2.0 * static_cast<double>(j);
    CHECK_THROWS_AS(tau_map(4.5, x, L, M, s, sparse), std::invalid_argument);
}

TEST_CASE("tau map hits every target at most twice") {
    Rng rng(314);
    for (int rep = 0; rep < 50; ++rep) {
        double M = rng.uniform(0.5, 3.0);
        double L = M * rng.uniform(2.2, 9.5);
        double x = rng.uniform(-5.0, 5.0);
        double s = M * rng.uniform(0.05, 0.45);
        auto js = index_sets(x, L, M);
        CentreMap centres;
        for (long j = js.j_min - 1; j <= js.j_max + 1; ++j) {
            double wiggle = rng.uniform(-0.5, 0.5) * (M - s) * 0.999;
            centres[j] = M * static_cast<double>(j) + wiggle;
        }
        std::map<long, int> hits; // key: target rounded to the lattice
        for (double kappa : js.all) {
            double target = tau_map(kappa, x, L, M, s, centres);
            ++hits[std::lround(target / M * 1024.0)];
        }
        for (auto const& [t, n] : hits) {
            (void)t;
            CHECK(n <= 2);
        }
    }
}

TEST_CASE("setup validation rejects escaping windows") {
    UcpSetup su;
    su.s = 0.5;
    su.M = 2.0;
    su.energy_window = {0.0, 4.0};
    su.centres[0] = 0.7;  // |0.7 - 0| <= (2 - 0.5)/2 = 0.75: fine
    su.potential = Eigen::VectorXd::Zero(3);
    su.validate();
    su.centres[1] = 2.8;  // |2.8 - 2| = 0.8 > 0.75: escapes
    CHECK_THROWS_AS(su.validate(), std::invalid_argument);
    su.centres.erase(1);
    su.s = 2.5; // s >= M
    CHECK_THROWS_AS(su.validate(), std::invalid_argument);
}

TEST_CASE("eigenfunction mass near the centres dominates the predicted share") {
    // disordered box, ground state and a handful of low modes
    Box w{1, Vec{0.0, 0.0}, 14.0};
    auto base = generate_lattice(1, 1.0, w);
    Rng rng(55);
    auto pair = make_delone_pair(base, rng);
    SingleSitePotential u(0.8, 0.4, 0.9, BumpProfile::flat);
    double L = 9.0, M = 3.0, s = 1.0;
    auto grid = GridSpec::make(1, Vec{0.0, 0.0}, L, 0.1);
    auto omega = sample_config(pair.extra.points, 0.5, rng);
    auto H = assemble_hamiltonian(pair, u, omega, std::nullopt, grid);
    auto eig = eigs_near(H.matrix, below_spectrum_shift(H.matrix), 5);

    UcpSetup su;
    su.s = s;
    su.M = M;
    su.potential = H.potential;
    su.energy_window = {eig.eigenvalues.front() - 1.0, eig.eigenvalues.back() + 1.0};
    for (long j = -1; j <= 1; ++j) su.centres[j] = M * static_cast<double>(j);

    for (size_t m = 0; m < eig.eigenvalues.size(); ++m) {
        auto mc = ucp_mass_check(eig.vectors.col(static_cast<long>(m)), grid,
                                 eig.eigenvalues[m], su, 0.0, L);
        CHECK(mc.holds);
        CHECK(mc.mass_sum > 0.0);
        CHECK(mc.total >= mc.mass_sum - 1e-15);
        // the constant is astronomically small, so the margin is enormous
        CHECK(mc.log10_ratio > 100.0);
        CHECK(mc.constant > 0.0);
        CHECK(mc.log_constant == doctest::Approx(std::log(mc.constant)).epsilon(1e-10));
    }
}

TEST_CASE("mass check survives constants that underflow to zero") {
    // big M drives the constant below the smallest double; logs keep working
    double L = 90.0, M = 30.0, s = 1.0;
    auto grid = GridSpec::make(1, Vec{0.0, 0.0}, L, 0.25);
    auto H = assemble_from_samples(grid, Eigen::VectorXd::Zero(grid.total_nodes()));
    auto gs = ground_state(H.matrix);
    UcpSetup su;
    su.s = s;
    su.M = M;
    su.potential = H.potential;
    su.energy_window = {gs.eigenvalues[0] - 1.0, gs.eigenvalues[0] + 1.0};
    for (long j = -1; j <= 1; ++j) su.centres[j] = M * static_cast<double>(j);
    auto mc = ucp_mass_check(gs.vectors.col(0), grid, gs.eigenvalues[0], su, 0.0, L);
    CHECK(mc.constant == 0.0); // underflow
    CHECK(mc.log_constant < -3000.0);
    CHECK(std::isfinite(mc.log_constant));
    CHECK(mc.holds);
    CHECK(mc.log10_ratio > 1000.0);
}

TEST_CASE("mass check rejects energies outside the window") {
    auto grid = GridSpec::make(1, Vec{0.0, 0.0}, 9.0, 0.1);
    auto H = assemble_from_samples(grid, Eigen::VectorXd::Zero(grid.total_nodes()));
    auto gs = ground_state(H.matrix);
    UcpSetup su;
    su.s = 1.0;
    su.M = 3.0;
    su.potential = H.potential;
    su.energy_window = {gs.eigenvalues[0] + 1.0, gs.eigenvalues[0] + 2.0};
    su.centres[0] = 0.0;
    CHECK_THROWS_AS(ucp_mass_check(gs.vectors.col(0), grid, gs.eigenvalues[0], su, 0.0, 9.0),
                    std::invalid_argument);
}

TEST_CASE("ground energy lifting: monotone, bounded below, perturbative slope") {
    double L = 6.0, M = 2.0, s = 0.5;
    auto grid = GridSpec::make(1, Vec{0.0, 0.0}, L, 0.05);
    SingleSitePotential u(0.8, 0.5, 0.9, BumpProfile::flat);
    CentreMap centres;
    std::vector<Vec> sites;
    for (long j = -1; j <= 1; ++j) {
        centres[j] = M * static_cast<double>(j);
        sites.push_back(Vec{centres[j], 0.0});
    }
    Eigen::VectorXd V0 = Eigen::VectorXd::Zero(grid.total_nodes());
    auto W = assemble_coupled_potential(sites, std::vector<double>(sites.size(), 1.0), u, grid);
    std::vector<double> ts;
    for (int i = 1; i <= 10; ++i) ts.push_back(0.1 * i);

    auto rep = lifting_1d(V0, W, grid, s, M, centres, 0.8, ts);
    CHECK(rep.monotone);
    CHECK(rep.all_hold);
    REQUIRE(rep.rows.size() == 10);
    for (auto const& row : rep.rows) {
        CHECK(row.lambda_t > rep.lambda0); // adding W > 0 lifts the energy
        CHECK(row.margin >= 0.0);
    }
    // the uc constant is tiny but the report keeps its log
    CHECK(rep.c_uc < 1e-100);
    CHECK(rep.log_c_uc == doctest::Approx(std::log(s / (4 * M)) - 2 * rep.c_svi * M));
    // first-order slope agrees with <phi0, W phi0> within 10%
    CHECK(rep.slope_estimate == doctest::Approx(rep.slope_perturbative).epsilon(0.1));
    // the realised lift is astronomically above the guaranteed bound: margin
    // at t=1 is essentially the whole lift
    CHECK(rep.rows.back().margin == doctest::Approx(rep.rows.back().lambda_t - rep.lambda0)
                                        .epsilon(1e-10));
}

TEST_CASE("lifting validates the coupler floor and the t grid") {
    double L = 6.0, M = 2.0, s = 0.5;
    auto grid = GridSpec::make(1, Vec{0.0, 0.0}, L, 0.05);
    SingleSitePotential u(0.8, 0.5, 0.9, BumpProfile::flat);
    CentreMap centres;
    std::vector<Vec> sites;
    for (long j = -1; j <= 1; ++j) {
        centres[j] = M * static_cast<double>(j);
        sites.push_back(Vec{centres[j], 0.0});
    }
    Eigen::VectorXd V0 = Eigen::VectorXd::Zero(grid.total_nodes());
    auto W = assemble_coupled_potential(sites, std::vector<double>(sites.size(), 1.0), u, grid);
    // floor above the bump height: rejected
    CHECK_THROWS_AS(lifting_1d(V0, W, grid, s, M, centres, 0.9, {0.5}), std::invalid_argument);
    // t outside (0,1]: rejected
    CHECK_THROWS_AS(lifting_1d(V0, W, grid, s, M, centres, 0.8, {0.0, 0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(lifting_1d(V0, W, grid, s, M, centres, 0.8, {1.5}), std::invalid_argument);
    CHECK_THROWS_AS(lifting_1d(V0, W, grid, s, M, centres, 0.8, {}), std::invalid_argument);
}
