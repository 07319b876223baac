#include <doctest.h>

#include "sinkgeo/space.hpp"
#include "test_helpers.hpp"

using namespace sinkgeo;

TEST_CASE("sqeuclidean space basics") {
    Matrix pts(3, 2);
    pts << 0.0, 0.0, 1.0, 0.0, 0.0, 2.0;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 0.5);

    CHECK(space.size() == 3);
    CHECK(space.dim() == 2);
    CHECK(space.has_points());
    CHECK(space.sqeuclidean_cost());
    CHECK(space.epsilon() == 0.5);

    CHECK(space.cost()(0, 1) == doctest::Approx(1.0));
    CHECK(space.cost()(0, 2) == doctest::Approx(4.0));
    CHECK(space.cost()(1, 2) == doctest::Approx(5.0));
    CHECK(space.cost()(2, 2) == 0.0);
    CHECK(space.cost().isApprox(space.cost().transpose()));
    CHECK(space.cost_sup() == doctest::Approx(5.0));

    CHECK(space.gibbs()(0, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    CHECK(space.gibbs()(1, 1) == 1.0);
    CHECK(space.q_bound() == doctest::Approx(1.0 - std::exp(-4.0 * 5.0 / 0.5)).epsilon(1e-15));
}

TEST_CASE("explicit cost validation") {
    Matrix good(2, 2);
    good << 0.0, 1.0, 1.0, 0.0;
    GroundSpace space = GroundSpace::explicit_cost(good, 1.0);
    CHECK(space.size() == 2);
    CHECK_FALSE(space.has_points());
    CHECK_THROWS_AS(space.points(), Error);

    Matrix asym(2, 2);
    asym << 0.0, 1.0, 2.0, 0.0;
    CHECK_THROWS_AS(GroundSpace::explicit_cost(asym, 1.0), InvalidInput);

    Matrix neg(2, 2);
    neg << 0.0, -1.0, -1.0, 0.0;
    CHECK_THROWS_AS(GroundSpace::explicit_cost(neg, 1.0), InvalidInput);

    CHECK_THROWS_AS(GroundSpace::explicit_cost(good, 0.0), InvalidInput);
    CHECK_THROWS_AS(GroundSpace::explicit_cost(good, -1.0), InvalidInput);
}

TEST_CASE("gram warning on an indefinite gibbs matrix") {
    // c(1,2) = c(1,3) = 0 with c(2,3) large: the kernel matrix has a negative
    // eigenvalue, so this cost cannot embed into any RKHS.
    Matrix cost(3, 3);
    cost << 0.0, 0.0, 0.0, 0.0, 0.0, 10.0, 0.0, 10.0, 0.0;
    GroundSpace bad = GroundSpace::explicit_cost(cost, 1.0);
    CHECK(bad.gram_warning());

    Matrix pts(2, 1);
    pts << 0.0, 1.0;
    CHECK_FALSE(GroundSpace::sqeuclidean(pts, 1.0).gram_warning());
}

TEST_CASE("measure validation and support") {
    Matrix pts(3, 1);
    pts << 0.0, 1.0, 2.0;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 1.0);

    Vector w(3);
    w << 0.25, 0.0, 0.75;
    Measure mu(space, w);
    CHECK(mu.support() == std::vector<int>{0, 2});
    CHECK(mu[2] == 0.75);
    CHECK(mu.mean()[0] == doctest::Approx(1.5));

    Vector bad_sum(3);
    bad_sum << 0.25, 0.0, 0.75 + 1e-6;
    CHECK_THROWS_AS(Measure(space, bad_sum), InvalidInput);

    Vector negative(3);
    negative << -0.25, 0.5, 0.75;
    CHECK_THROWS_AS(Measure(space, negative), InvalidInput);

    Vector wrong_size(2);
    wrong_size << 0.5, 0.5;
    CHECK_THROWS_AS(Measure(space, wrong_size), InvalidInput);
}

TEST_CASE("tangent vectors must be balanced") {
    Matrix pts(2, 1);
    pts << 0.0, 1.0;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 1.0);

    Vector ok(2);
    ok << 0.3, -0.3;
    CHECK_NOTHROW(TangentVector(space, ok));

    Vector off(2);
    off << 0.3, -0.2;
    CHECK_THROWS_AS(TangentVector(space, off), UnbalancedTangent);
}

TEST_CASE("rkhs norm of a two-point difference") {
    const auto& ref = reference()["rkhs_two_point"];
    GroundSpace space = GroundSpace::sqeuclidean(matrix_from(ref["points"]), ref["epsilon"].get<double>());
    Vector a = vector_from(ref["a"]);
    CHECK(mmd_sq(space, a) == doctest::Approx(ref["mmd_sq"].get<double>()).epsilon(1e-14));
    CHECK(rkhs_inner(space, a, a) == doctest::Approx(mmd_sq(space, a)).epsilon(1e-15));
}
