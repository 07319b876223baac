#include "sinkgeo/closed_forms.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "sinkgeo/errors.hpp"

namespace sinkgeo {

namespace {

void require_eps(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("epsilon must be positive and finite");
}

void require_variance(double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("variance must be nonnegative and finite");
}

double kappa(double v0, double v1, double eps) {
    return 1.0 + std::sqrt(1.0 + 16.0 * v0 * v1 / (eps * eps));
}

}  // namespace

double gaussian_ot_eps(double v0, double v1, double eps) {
    require_variance(v0);
    require_variance(v1);
    require_eps(eps);
    const double k = kappa(v0, v1, eps);
    return v0 + v1 - 0.5 * eps * (k - std::log(k) + std::log(2.0) - 2.0);
}

double gaussian_sinkhorn(const Gaussian1D& g0, const Gaussian1D& g1, double eps) {
    require_variance(g0.variance);
    require_variance(g1.variance);
    require_eps(eps);
    const double k00 = kappa(g0.variance, g0.variance, eps);
    const double k11 = kappa(g1.variance, g1.variance, eps);
    const double k01 = kappa(g0.variance, g1.variance, eps);
    const double dm = g0.mean - g1.mean;
    return dm * dm + 0.25 * eps * (k00 - 2.0 * k01 + k11 + std::log(k01 * k01 / (k00 * k11)));
}

double gaussian_metric(double v, double eps) {
    require_variance(v);
    require_eps(eps);
    return 1.0 / (4.0 * std::sqrt(eps * eps / 16.0 + v * v));
}

double gaussian_F(double x) {
    if (!std::isfinite(x)) throw InvalidInput("argument of F must be finite");
    if (x == 0.0) return 0.0;
    // F is odd; integrate on [0, |x|].
    const double ax = std::abs(x);
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double u) { return std::pow(1.0 + u * u, -0.25); }, 0.0, ax, 15, 1e-12, &error);
    if (error > 1e-10) throw QuadratureFailure("quadrature for F did not reach the requested accuracy");
    return x > 0.0 ? value : -value;
}

double gaussian_F_inv(double y) {
    if (!std::isfinite(y)) throw InvalidInput("argument of F inverse must be finite");
    if (y == 0.0) return 0.0;
    const double ay = std::abs(y);
    // Bracket the root: F(x) >= x / (1+x^2)^{1/4} is crude, but F(x) ~ 2 sqrt(x)
    // for large x, so (ay/2)^2 + ay + 1 always overshoots.
    double lo = 0.0;
    double hi = 0.25 * ay * ay + ay + 1.0;
    while (gaussian_F(hi) < ay) hi *= 2.0;
    // Safeguarded Newton: F' is explicit and strictly positive.
    double x = std::min(ay, hi);
    for (int it = 0; it < 100; ++it) {
        const double fx = gaussian_F(x) - ay;
        if (fx > 0.0) hi = x;
        else lo = x;
        const double step = fx * std::pow(1.0 + x * x, 0.25);  // fx / F'(x)
        double next = x - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return y > 0.0 ? x : -x;
}

GaussianGeodesicPoint gaussian_geodesic(double v0, double v1, double t, double eps) {
    require_variance(v0);
    require_variance(v1);
    require_eps(eps);
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("time parameter must lie in [0, 1]");
    const double y0 = gaussian_F(4.0 * v0 / eps);
    const double y1 = gaussian_F(4.0 * v1 / eps);
    GaussianGeodesicPoint out;
    out.d_hat = 0.25 * std::sqrt(eps) * std::abs(y1 - y0);
    out.v_t = 0.25 * eps * gaussian_F_inv((1.0 - t) * y0 + t * y1);
    return out;
}

Vector gaussian_grid(const Gaussian1D& g0, const Gaussian1D& g1, int n, double sigmas) {
    require_variance(g0.variance);
    require_variance(g1.variance);
    if (n < 2) throw InvalidInput("grid needs at least two points");
    const double s0 = std::sqrt(g0.variance);
    const double s1 = std::sqrt(g1.variance);
    double lo = std::min(g0.mean - sigmas * s0, g1.mean - sigmas * s1);
    double hi = std::max(g0.mean + sigmas * s0, g1.mean + sigmas * s1);
    if (hi <= lo) {  // both are Diracs at the same spot; give the grid some width
        lo -= 1.0;
        hi += 1.0;
    }
    return Vector::LinSpaced(n, lo, hi);
}

Vector gaussian_weights(const Vector& grid, const Gaussian1D& g) {
    require_variance(g.variance);
    Vector w = Vector::Zero(grid.size());
    if (g.variance == 0.0) {
        Eigen::Index nearest = 0;
        (grid.array() - g.mean).abs().minCoeff(&nearest);
        w[nearest] = 1.0;
        return w;
    }
    w = (-(grid.array() - g.mean).square() / (2.0 * g.variance)).exp();
    return w / w.sum();
}

TwoDiracValues two_dirac_values(double r, double s, double eps) {
    if (!(r >= 0.0) || !(s >= 0.0)) throw InvalidInput("dirac offsets must be nonnegative");
    require_eps(eps);
    auto k = [eps](double x, double y) { return std::exp(-(x - y) * (x - y) / eps); };
    TwoDiracValues out;
    const double cross = k(r, s) + k(r, -s);
    out.ot = eps * (std::log(2.0) - std::log(cross));
    out.sdiv = eps * (-std::log(cross) + 0.5 * std::log1p(k(r, -r)) + 0.5 * std::log1p(k(s, -s)));
    return out;
}

double triangle_gap(double eps) {
    require_eps(eps);
    const double r = std::sqrt(eps);
    const double s01 = two_dirac_values(0.0, r, eps).sdiv;
    const double s12 = two_dirac_values(r, 2.0 * r, eps).sdiv;
    const double s02 = two_dirac_values(0.0, 2.0 * r, eps).sdiv;
    return (std::sqrt(s02) - std::sqrt(s01) - std::sqrt(s12)) / std::sqrt(eps);
}

TwoPointState two_point_state(double r, double m, double eps) {
    if (!(r >= 0.0)) throw InvalidInput("distance must be nonnegative");
    require_eps(eps);
    if (!(m > 0.0 && m < 1.0)) throw DegenerateMass("mass split must be strictly between 0 and 1");
    TwoPointState st;
    st.r = r;
    st.m = m;
    st.epsilon = eps;
    st.b = std::exp(-2.0 * r * r / eps);
    st.m_sq = m * (1.0 - m);
    // p = (-b + sqrt(b^2 + 4 M^2 b (1-b))) / (2 (1-b)), rewritten with the
    // conjugate so r -> 0 (b -> 1) stays finite: the limit is p = M^2.
    st.p = 2.0 * st.m_sq * st.b / (st.b + std::sqrt(st.b * st.b + 4.0 * st.m_sq * st.b * (1.0 - st.b)));
    st.lambda2 = 1.0 - st.p / st.m_sq;
    return st;
}

double two_point_tensor(const TwoPointState& state, double m_dot) {
    if (!(state.p > 0.0)) throw DegenerateMass("self-transport plan has no off-diagonal mass");
    return 0.5 * state.epsilon * m_dot * m_dot * (state.m_sq - state.p) /
           (state.p * (2.0 * state.m_sq - state.p));
}

double nonconvexity_value(double r, double eps) {
    if (!(r >= 0.0)) throw InvalidInput("spread must be nonnegative");
    require_eps(eps);
    const double z = 4.0 * r * r / eps;
    const double k = std::exp(-z);
    return 1.0 + k / (1.0 + k) * (2.0 * z / (1.0 + k) - 2.0);
}

}  // namespace sinkgeo
