#include "sinkgeo/fd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sinkgeo/errors.hpp"

namespace sinkgeo {

namespace {

// Two rounds of Richardson extrapolation on values of an even-error quantity
// sampled at steps t, t/2, t/4: kills the t^2 and t^4 terms.
double richardson(double g1, double g2, double g3) {
    const double l1 = (4.0 * g2 - g1) / 3.0;
    const double l2 = (4.0 * g3 - g2) / 3.0;
    return (16.0 * l2 - l1) / 15.0;
}

}  // namespace

double fd_metric_vertical(const Measure& mu, const TangentVector& b, const SinkhornOptions& opt) {
    const GroundSpace& space = mu.space();
    if (&b.space() != &space) throw InvalidInput("tangent vector lives on a different ground space");
    const Vector& w = mu.weights();
    const double scale = b.weights().cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    Vector dir = b.weights() / scale;

    // Feasibility of mu +/- t dir and the step floor, both over the support
    // of the direction.
    double t_max = std::numeric_limits<double>::infinity();
    double w_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < dir.size(); ++i) {
        if (dir[i] == 0.0) continue;
        if (w[i] == 0.0) throw SupportViolation("direction assigns mass motion outside the support of the measure");
        t_max = std::min(t_max, w[i] / std::abs(dir[i]));
        w_min = std::min(w_min, w[i]);
    }
    const double floor = 1e-3 * w_min;
    double t1 = std::max(std::min(1e-2, 0.5 * t_max), floor);

    const double ot_self = ot_eps(mu, mu, opt);
    auto divergence_at = [&](double t, double sign) {
        Vector pw = (w + sign * t * dir).cwiseMax(0.0);
        Measure nu(space, pw);
        return ot_eps(mu, nu, opt) - 0.5 * ot_self - 0.5 * ot_eps(nu, nu, opt);
    };

    double g[3];
    double t = t1;
    for (int k = 0; k < 3; ++k, t = std::max(0.5 * t, floor)) {
        g[k] = (divergence_at(t, +1.0) + divergence_at(t, -1.0)) / (2.0 * t * t);
    }
    return scale * scale * richardson(g[0], g[1], g[2]);
}

double fd_metric_horizontal(const Measure& mu, const Matrix& velocities, const SinkhornOptions& opt) {
    const GroundSpace& space = mu.space();
    if (!space.has_points()) throw InvalidInput("horizontal probe needs a space built from point coordinates");
    const Matrix& pts = space.points();
    if (velocities.rows() != pts.rows() || velocities.cols() != pts.cols())
        throw InvalidInput("velocities must be one row per point of the space");

    const double scale = velocities.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    Matrix v = velocities / scale;
    const auto n = pts.rows();
    const Vector& w = mu.weights();
    const double ot_self = ot_eps(mu, mu, opt);

    auto divergence_at = [&](double t, double sign) {
        Matrix moved = pts + sign * t * v;
        // Cross term on the disjoint union of the two clouds. The self terms
        // live on the individual clouds, which gives the same values as the
        // support-restricted solves on the union.
        Matrix both(2 * n, pts.cols());
        both.topRows(n) = pts;
        both.bottomRows(n) = moved;
        GroundSpace uspace = GroundSpace::sqeuclidean(both, space.epsilon());
        Vector w0 = Vector::Zero(2 * n), w1 = Vector::Zero(2 * n);
        w0.head(n) = w;
        w1.tail(n) = w;
        const double cross = ot_eps(Measure(uspace, w0), Measure(uspace, w1), opt);
        GroundSpace mspace = GroundSpace::sqeuclidean(moved, space.epsilon());
        Measure pushed(mspace, w);
        return cross - 0.5 * ot_self - 0.5 * ot_eps(pushed, pushed, opt);
    };

    double g[3];
    double t = 1e-2;
    for (int k = 0; k < 3; ++k, t *= 0.5) {
        g[k] = (divergence_at(t, +1.0) + divergence_at(t, -1.0)) / (2.0 * t * t);
    }
    return scale * scale * richardson(g[0], g[1], g[2]);
}

std::pair<double, double> tensor_eps_infinity_check(const Measure& mu, const Matrix& velocities,
                                                    const SinkhornOptions& opt) {
    const double probe = fd_metric_horizontal(mu, velocities, opt);
    Vector mean = velocities.transpose() * mu.weights();
    return {probe, mean.squaredNorm()};
}

}  // namespace sinkgeo
