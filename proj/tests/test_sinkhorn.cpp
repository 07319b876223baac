#include <doctest.h>

#include "sinkgeo/sinkhorn.hpp"
#include "test_helpers.hpp"

using namespace sinkgeo;

namespace {
const SinkhornOptions kTight{1e-13, 200000};
}

TEST_CASE("soft-min transform on the symmetric two-point example") {
    const auto& ref = reference()["softmin"];
    GroundSpace space = GroundSpace::sqeuclidean(matrix_from(ref["points"]), ref["epsilon"].get<double>());
    Measure mu(space, vector_from(ref["weights"]));
    Vector value = t_eps(space, vector_from(ref["f"]), mu);
    const double expected = ref["value_each"].get<double>();
    CHECK(value[0] == doctest::Approx(expected).epsilon(1e-14));
    CHECK(value[1] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("soft-min shift identity") {
    Matrix pts(3, 1);
    pts << 0.0, 0.6, 1.4;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 0.9);
    Vector w(3);
    w << 0.2, 0.3, 0.5;
    Measure mu(space, w);
    Vector f(3);
    f << 0.1, -0.4, 0.25;
    Vector shifted = f.array() + 1.3;
    Vector delta = t_eps(space, shifted, mu) - t_eps(space, f, mu);
    CHECK((delta.array() + 1.3).abs().maxCoeff() < 1e-12);
}

TEST_CASE("five-point potentials against the high-precision solution") {
    const auto& ref = reference()["sinkhorn5"];
    GroundSpace space = GroundSpace::sqeuclidean(matrix_from(ref["points"]), ref["epsilon"].get<double>());
    Measure mu(space, vector_from(ref["mu"]));
    Measure nu(space, vector_from(ref["nu"]));

    Potentials pot = solve_potentials(mu, nu, kTight);
    CHECK(pot.converged);
    CHECK(pot.residual <= 1e-13);
    CHECK((pot.f - vector_from(ref["f"])).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((pot.g - vector_from(ref["g"])).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(pot.f[pot.gauge_index] == doctest::Approx(pot.g[0]).epsilon(1e-15));

    CHECK(ot_from_potentials(mu, nu, pot) == doctest::Approx(ref["ot"].get<double>()).epsilon(1e-12));
    CHECK(ot_eps(mu, mu, kTight) == doctest::Approx(ref["ot_mu_mu"].get<double>()).epsilon(1e-12));
    CHECK(ot_eps(nu, nu, kTight) == doctest::Approx(ref["ot_nu_nu"].get<double>()).epsilon(1e-12));
    CHECK(sinkhorn_divergence(mu, nu, kTight) ==
          doctest::Approx(ref["sdiv"].get<double>()).epsilon(1e-11));

    // Fixed-point property of the returned pair.
    CHECK((pot.f - t_eps(space, pot.g, nu)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((pot.g - t_eps(space, pot.f, mu)).cwiseAbs().maxCoeff() < 1e-12);

    // Self potentials stay symmetric.
    Potentials self = self_potentials(mu, kTight);
    CHECK((self.f - self.g).cwiseAbs().maxCoeff() == 0.0);
    CHECK((self.f - vector_from(ref["self_potential_mu"])).cwiseAbs().maxCoeff() < 1e-9);

    // Gradient pairing with a balanced tangent.
    Vector grad = grad_s_eps(mu, nu, kTight);
    const double pairing = grad.dot(vector_from(ref["grad_tangent"]));
    CHECK(pairing == doctest::Approx(ref["grad_pairing"].get<double>()).epsilon(1e-9));
}

TEST_CASE("plan marginals and the warm start") {
    const auto& ref = reference()["sinkhorn5"];
    GroundSpace space = GroundSpace::sqeuclidean(matrix_from(ref["points"]), ref["epsilon"].get<double>());
    Measure mu(space, vector_from(ref["mu"]));
    Measure nu(space, vector_from(ref["nu"]));

    Potentials pot = solve_potentials(mu, nu, kTight);
    Coupling cpl = plan(mu, nu, pot);
    CHECK((cpl.matrix.rowwise().sum() - mu.weights()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((cpl.matrix.colwise().sum().transpose() - nu.weights()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cpl.matrix.minCoeff() >= 0.0);
    CHECK(cpl.value == doctest::Approx(ref["ot"].get<double>()).epsilon(1e-12));

    Potentials restarted = solve_potentials(mu, nu, kTight, &pot);
    CHECK(restarted.converged);
    CHECK(restarted.iterations <= 3);

    SinkhornOptions one_sweep{1e-13, 1};
    Potentials rough = solve_potentials(mu, nu, one_sweep);
    CHECK_FALSE(rough.converged);
    CHECK_THROWS_AS(plan(mu, nu, rough), NotConverged);
}

TEST_CASE("self potential of the uniform two-point measure") {
    const auto& ref = reference()["two_dirac"]["self_potential"];
    const double r = ref["r"].get<double>();
    const double eps = ref["epsilon"].get<double>();
    Matrix pts(2, 1);
    pts << r, -r;
    GroundSpace space = GroundSpace::sqeuclidean(pts, eps);
    Vector w(2);
    w << 0.5, 0.5;
    Potentials self = self_potentials(Measure(space, w), kTight);
    const double expected = ref["f"].get<double>();
    CHECK(self.f[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(self.f[1] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("divergence is symmetric, nonnegative, zero on the diagonal") {
    Matrix pts(4, 1);
    pts << 0.0, 0.3, 0.9, 1.6;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 0.8);
    Vector a(4), b(4);
    a << 0.4, 0.1, 0.2, 0.3;
    b << 0.1, 0.3, 0.45, 0.15;
    Measure mu(space, a), nu(space, b);

    const double s_mn = sinkhorn_divergence(mu, nu, kTight);
    const double s_nm = sinkhorn_divergence(nu, mu, kTight);
    CHECK(s_mn > 0.0);
    CHECK(s_mn == doctest::Approx(s_nm).epsilon(1e-12));
    CHECK(std::abs(sinkhorn_divergence(mu, mu, kTight)) < 1e-12);

    // Gradient of S(., nu) at nu is constant across the support.
    Vector grad = grad_s_eps(nu, nu, kTight);
    CHECK((grad.array() - grad[0]).abs().maxCoeff() < 1e-10);
}

TEST_CASE("zero-weight points are carried through with extended potentials") {
    Matrix pts(3, 1);
    pts << 0.0, 0.5, 1.0;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 1.0);
    Vector a(3), b(3);
    a << 0.5, 0.0, 0.5;
    b << 0.25, 0.5, 0.25;
    Measure mu(space, a), nu(space, b);
    Potentials pot = solve_potentials(mu, nu, kTight);
    CHECK(pot.converged);
    CHECK(std::isfinite(pot.f[1]));
    // The extension is the soft-min transform of the converged dual.
    Vector full = t_eps(space, pot.g, nu);
    CHECK(std::abs(pot.f[1] - full[1]) < 1e-12);
}
