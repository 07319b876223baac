#include <doctest.h>

#include <algorithm>

#include "sinkgeo/closed_forms.hpp"
#include "sinkgeo/geodesics.hpp"
#include "sinkgeo/sinkhorn.hpp"
#include "test_helpers.hpp"

using namespace sinkgeo;

namespace {

Path linear_path(const GroundSpace& space, const Vector& w0, const Vector& w1, int n_segments) {
    Path path;
    path.mode = PathMode::FixedSupport;
    path.space = &space;
    path.times = Vector::LinSpaced(n_segments + 1, 0.0, 1.0);
    path.weights.resize(static_cast<std::size_t>(n_segments) + 1);
    for (int k = 0; k <= n_segments; ++k) {
        Vector wk = (1.0 - path.times[k]) * w0 + path.times[k] * w1;
        path.weights[static_cast<std::size_t>(k)] = wk / wk.sum();
    }
    return path;
}

}  // namespace

TEST_CASE("path energy of a slow two-point exchange approaches r^2") {
    const double r = 0.1;
    Matrix pts(2, 1);
    pts << 0.0, r;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 1.0);
    Vector w0(2), w1(2);
    w0 << 1.0, 0.0;
    w1 << 0.0, 1.0;
    const double energy = path_energy(linear_path(space, w0, w1, 16));
    CHECK(energy == doctest::Approx(r * r).epsilon(0.15));
}

TEST_CASE("chain objective is exactly reversal invariant") {
    Matrix pts(4, 1);
    pts << 0.0, 0.4, 0.9, 1.5;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 0.8);
    Vector w0(4), w1(4);
    w0 << 0.4, 0.3, 0.2, 0.1;
    w1 << 0.05, 0.15, 0.35, 0.45;
    Path path = linear_path(space, w0, w1, 5);
    // Make the interior asymmetric so reversal is not a symmetry of the data.
    path.weights[2][0] += 0.07;
    path.weights[2][3] -= 0.07;

    const double forward = chain_objective(path);
    Path reversed = path;
    std::reverse(reversed.weights.begin(), reversed.weights.end());
    const double backward = chain_objective(reversed);
    CHECK(forward == backward);  // bitwise, not approximately
    CHECK(forward > 0.0);
}

TEST_CASE("geodesic between nearby measures on a small grid") {
    const int n = 7;
    Matrix pts = Vector::LinSpaced(n, 0.0, 1.0);
    GroundSpace space = GroundSpace::sqeuclidean(pts, 1.0);
    Vector w0(n), w1(n);
    w0 << 0.30, 0.20, 0.15, 0.12, 0.10, 0.08, 0.05;
    w1 << 0.05, 0.08, 0.10, 0.12, 0.15, 0.20, 0.30;
    Measure mu0(space, w0), mu1(space, w1);

    GeodesicResult res = solve_geodesic(mu0, mu1, 6);
    CHECK(res.converged);
    CHECK(res.iterations < 5000);
    CHECK(res.ds_estimate > 0.0);
    CHECK(res.lower_bound <= res.ds_estimate + 1e-9);
    CHECK(res.ds_estimate <= res.upper_bound + 1e-9);
    CHECK(res.chain_value <= chain_objective(linear_path(space, w0, w1, 6)) + 1e-12);
    CHECK_FALSE(res.energy_discrepancy);

    // Endpoints are preserved exactly.
    CHECK((res.path.weights.front() - w0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((res.path.weights.back() - w1).cwiseAbs().maxCoeff() == 0.0);

    // Interior stays strictly positive (mirror descent operates on logits).
    for (const Vector& wk : res.path.weights) CHECK(wk.minCoeff() > 0.0);
}

TEST_CASE("travelling dirac distance on a coarse grid") {
    const int n = 11;
    Matrix pts = Vector::LinSpaced(n, 0.0, 1.0);
    GroundSpace space = GroundSpace::sqeuclidean(pts, 1.0);
    Vector w0 = Vector::Zero(n), w1 = Vector::Zero(n);
    w0[0] = 1.0;
    w1[n - 1] = 1.0;
    GeodesicResult res = solve_geodesic(Measure(space, w0), Measure(space, w1), 8);
    CHECK(res.ds_estimate == doctest::Approx(1.0).epsilon(0.10));
    CHECK(res.lower_bound <= res.ds_estimate + 1e-6);
}

TEST_CASE("translated particle clouds move in a straight line") {
    Matrix x0(2, 1);
    x0 << 0.0, 0.6;
    Matrix x1(2, 1);
    x1 << 0.5, 1.1;
    Vector w(2);
    w << 0.5, 0.5;
    GeodesicResult res = solve_geodesic_particles(x0, x1, w, 1.0, 8);
    CHECK(res.ds_estimate == doctest::Approx(0.5).epsilon(0.05));
    CHECK(res.lower_bound <= res.ds_estimate + 1e-6);
    CHECK_FALSE(res.energy_discrepancy);
}

TEST_CASE("distance bounds are ordered and vanish on the diagonal") {
    Matrix pts(3, 1);
    pts << 0.0, 0.5, 1.0;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 0.9);
    Vector a(3), b(3);
    a << 0.3, 0.4, 0.3;
    b << 0.6, 0.3, 0.1;
    Measure mu(space, a), nu(space, b);

    auto [lower, upper] = ds_bounds(mu, nu);
    CHECK(lower > 0.0);
    CHECK(lower < upper);

    auto [lo_same, up_same] = ds_bounds(mu, mu);
    CHECK(lo_same <= 1e-9);
    CHECK(up_same <= 1e-6);
}

TEST_CASE("bridge marginal integrates to one") {
    const int n = 9;
    Matrix pts = Vector::LinSpaced(n, 0.0, 1.0);
    GroundSpace space = GroundSpace::sqeuclidean(pts, 1.0);
    Vector a(n), b(n);
    a << 0.2, 0.2, 0.15, 0.12, 0.1, 0.08, 0.06, 0.05, 0.04;
    b << 0.04, 0.05, 0.06, 0.08, 0.1, 0.12, 0.15, 0.2, 0.2;
    Measure mu0(space, a), mu1(space, b);

    const int grid_n = 2001;
    Matrix query(grid_n, 1);
    for (int i = 0; i < grid_n; ++i) query(i, 0) = -2.0 + 5.0 * i / (grid_n - 1.0);
    Vector density = bridge_marginal(mu0, mu1, 0.4, query);
    CHECK(density.minCoeff() >= 0.0);
    double integral = 0.0;
    const double h = 5.0 / (grid_n - 1.0);
    for (int i = 0; i + 1 < grid_n; ++i) integral += 0.5 * h * (density[i] + density[i + 1]);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-4));

    CHECK_THROWS_AS(bridge_marginal(mu0, mu1, 0.0, query), InvalidInput);
    CHECK_THROWS_AS(bridge_marginal(mu0, mu1, 1.0, query), InvalidInput);
}

TEST_CASE("path validation") {
    Matrix pts(2, 1);
    pts << 0.0, 1.0;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 1.0);
    Vector w0(2), w1(2);
    w0 << 0.7, 0.3;
    w1 << 0.3, 0.7;

    Path path = linear_path(space, w0, w1, 3);
    path.times[1] = path.times[2];  // not strictly increasing
    CHECK_THROWS_AS(chain_objective(path), InvalidInput);

    Path bad_ends = linear_path(space, w0, w1, 3);
    bad_ends.times[0] = 0.1;
    CHECK_THROWS_AS(chain_objective(bad_ends), InvalidInput);

    Measure mu0(space, w0), mu1(space, w1);
    CHECK_THROWS_AS(solve_geodesic(mu0, mu1, 1), InvalidInput);
}
