#include <doctest.h>

#include "sinkgeo/fd.hpp"
#include "sinkgeo/sinkhorn.hpp"
#include "sinkgeo/tensor.hpp"
#include "test_helpers.hpp"

using namespace sinkgeo;

namespace {
const SinkhornOptions kTight{1e-13, 200000};

SelfTransport reference_transport() {
    const auto& ref = reference()["tensor3"];
    static const GroundSpace space =
        GroundSpace::sqeuclidean(matrix_from(ref["points"]), ref["epsilon"].get<double>());
    Measure mu(space, vector_from(ref["mu"]));
    return self_transport(mu, kTight);
}
}  // namespace

TEST_CASE("three-point self transport against the frozen solution") {
    const auto& ref = reference()["tensor3"];
    SelfTransport st = reference_transport();

    CHECK(st.converged);
    CHECK((st.f - vector_from(ref["self_potential"])).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(st.f.minCoeff() >= -1e-9);
    CHECK((st.K.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(st.H.isApprox(st.H.transpose(), 1e-14));

    Vector eig = vector_from(ref["eigenvalues"]);
    CHECK((st.eigenvalues - eig).cwiseAbs().maxCoeff() < 1e-9);
    SpectralReport rep = spectral_report(st);
    CHECK(rep.eigenvalues[1] == doctest::Approx(ref["lambda2"].get<double>()).epsilon(1e-9));
    CHECK(rep.q_bound == doctest::Approx(ref["q_bound"].get<double>()).epsilon(1e-12));
    CHECK(rep.gap == doctest::Approx(1.0 - ref["lambda2"].get<double>()).epsilon(1e-9));
}

TEST_CASE("pseudo solve, tensor value, and the potential derivative") {
    const auto& ref = reference()["tensor3"];
    SelfTransport st = reference_transport();
    TangentVector b(st.mu.space(), vector_from(ref["b"]));
    const Vector b_vals = vector_from(ref["b"]);

    Vector x = pseudo_solve(st, st.H * b_vals);
    CHECK((x - vector_from(ref["pseudo_solve"])).cwiseAbs().maxCoeff() < 1e-8);
    // Quotient representative: zero mean against the weights.
    CHECK(std::abs(st.mu.weights().dot(x)) < 1e-12);

    const double g = metric_tensor(st, b);
    CHECK(g == doctest::Approx(ref["g"].get<double>()).epsilon(1e-10));
    CHECK(b_vals.dot(st.H * b_vals) == doctest::Approx(ref["b_H_b"].get<double>()).epsilon(1e-10));

    Vector df = potential_derivative(st, b);
    CHECK((df - vector_from(ref["potential_derivative"])).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(-0.5 * b_vals.dot(df) == doctest::Approx(g).epsilon(1e-12));

    // The finite-difference route agrees.
    const double fd = fd_metric_vertical(st.mu, b);
    CHECK(fd == doctest::Approx(g).epsilon(1e-5));
}

TEST_CASE("sphere coordinates and the equivalent tensor") {
    const auto& ref = reference()["tensor3"];
    SelfTransport st = reference_transport();
    const GroundSpace& space = st.mu.space();
    TangentVector b(space, vector_from(ref["b"]));

    Vector alpha = map_A(st);
    CHECK(alpha.dot(space.gibbs() * alpha) == doctest::Approx(1.0).epsilon(1e-10));
    Measure back = map_A_inverse(space, alpha);
    CHECK((back.weights() - st.mu.weights()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((map_B(st).values - space.gibbs() * alpha).cwiseAbs().maxCoeff() < 1e-10);

    SignedVector bdot = beta_dot_from_mu_dot(st, b);
    CHECK((bdot.values - vector_from(ref["beta_dot"])).cwiseAbs().maxCoeff() < 1e-8);

    Vector u = st.a.cwiseProduct(bdot.values);
    CHECK(u.dot(st.H.ldlt().solve(u)) ==
          doctest::Approx(ref["beta_dot_norm_sq"].get<double>()).epsilon(1e-9));

    const double gt = tilde_metric_tensor(st, bdot);
    CHECK(gt == doctest::Approx(ref["g_tilde"].get<double>()).epsilon(1e-10));
    CHECK(gt == doctest::Approx(metric_tensor(st, b)).epsilon(1e-10));
}

TEST_CASE("pseudo solve operator residuals") {
    const auto& ref = reference()["tensor3"];
    SelfTransport st = reference_transport();
    Vector v = st.H * vector_from(ref["b"]);
    const Eigen::Index n = v.size();

    Vector x_plus = pseudo_solve(st, v, QuotientOp::IPlusK);
    CHECK(((Matrix::Identity(n, n) + st.K) * x_plus - v).cwiseAbs().maxCoeff() < 1e-10);

    Vector x_minus = pseudo_solve(st, v, QuotientOp::IMinusK);
    CHECK(((Matrix::Identity(n, n) - st.K) * x_minus - v).cwiseAbs().maxCoeff() < 1e-10);

    Vector x_sq = pseudo_solve(st, v, QuotientOp::IMinusKSq);
    CHECK(((Matrix::Identity(n, n) - st.K * st.K) * x_sq - v).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("support handling of vertical tangents") {
    Matrix pts(2, 1);
    pts << 0.0, 1.0;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 1.0);
    Vector dirac(2);
    dirac << 1.0, 0.0;
    Measure mu(space, dirac);
    SelfTransport st = self_transport(mu, kTight);
    CHECK(st.support == std::vector<int>{0});
    CHECK(st.H.rows() == 1);
    CHECK(st.f[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isfinite(st.f[1]));

    Vector zero = Vector::Zero(2);
    CHECK(metric_tensor(st, TangentVector(space, zero)) == 0.0);

    Vector off_support(2);
    off_support << 0.5, -0.5;
    CHECK_THROWS_AS(metric_tensor(st, TangentVector(space, off_support)), SupportViolation);
}

TEST_CASE("disconnected support is singular beyond the gauge") {
    Matrix pts(2, 1);
    pts << 0.0, 100.0;
    GroundSpace space = GroundSpace::sqeuclidean(pts, 0.01);
    Vector w(2);
    w << 0.5, 0.5;
    SelfTransport st = self_transport(Measure(space, w), kTight);
    Vector b(2);
    b << 1.0, -1.0;
    CHECK_THROWS_AS(pseudo_solve(st, b), SingularBeyondGauge);
}

TEST_CASE("tilde tensor rejects directions off the sphere tangent") {
    SelfTransport st = reference_transport();
    SignedVector not_tangent{&st.mu.space(), st.beta};
    CHECK_THROWS_AS(tilde_metric_tensor(st, not_tangent), NotTangent);
}

TEST_CASE("sphere inverse rejects points off the image") {
    const auto& ref = reference()["tensor3"];
    GroundSpace space =
        GroundSpace::sqeuclidean(matrix_from(ref["points"]), ref["epsilon"].get<double>());
    SelfTransport st = reference_transport();
    Vector alpha = map_A(st);
    CHECK_THROWS_AS(map_A_inverse(space, Vector(2.0 * alpha)), NotInImage);
    Vector negative = alpha;
    negative[0] = -negative[0];
    CHECK_THROWS_AS(map_A_inverse(space, negative), NotInImage);
}

TEST_CASE("finite differences in position space") {
    const auto& ref = reference()["large_eps"];
    Matrix pts = matrix_from(ref["points"]);
    Matrix vel = vector_from(ref["velocities"]);  // one spatial dimension
    Vector w = vector_from(ref["mu"]);

    // Very diffuse regime: only the center of mass motion contributes.
    double c_sup = 0.0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        for (Eigen::Index j = 0; j < pts.rows(); ++j)
            c_sup = std::max(c_sup, (pts.row(i) - pts.row(j)).squaredNorm());
    GroundSpace diffuse = GroundSpace::sqeuclidean(pts, 1e3 * c_sup);
    auto [probe, limit] = tensor_eps_infinity_check(Measure(diffuse, w), vel);
    CHECK(limit == doctest::Approx(ref["limit"].get<double>()).epsilon(1e-14));
    CHECK(std::abs(probe - limit) <= 0.05 * ref["v_l2_sq"].get<double>());

    // Moderate regime: matches the closed form for symmetric spreading.
    const auto& ncases = reference()["nonconvexity"]["cases"];
    const double r = ncases[2]["r"].get<double>();
    const double expected = ncases[2]["value"].get<double>();
    Matrix two(2, 1);
    two << r, -r;
    GroundSpace space = GroundSpace::sqeuclidean(two, 1.0);
    Vector half(2);
    half << 0.5, 0.5;
    Matrix spread(2, 1);
    spread << 1.0, -1.0;
    const double fd = fd_metric_horizontal(Measure(space, half), spread);
    CHECK(fd == doctest::Approx(expected).epsilon(1e-3));
}
