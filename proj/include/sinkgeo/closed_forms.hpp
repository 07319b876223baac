#pragma once

#include "sinkgeo/space.hpp"

namespace sinkgeo {

// Exact formulas on special families, used as oracles for the generic
// solvers and for figure generation.

struct Gaussian1D {
    double mean = 0.0;
    double variance = 0.0;  // >= 0; zero means a Dirac
};

// Entropic transport cost between centered one-dimensional Gaussians N(0,v0)
// and N(0,v1): v0 + v1 - (eps/2)(kappa - log kappa + log 2 - 2) with
// kappa = 1 + sqrt(1 + 16 v0 v1 / eps^2).
double gaussian_ot_eps(double v0, double v1, double eps);

// Sinkhorn divergence between two one-dimensional Gaussians. The mean part
// separates exactly: S = (m0-m1)^2 + variance part in the kappa's.
double gaussian_sinkhorn(const Gaussian1D& g0, const Gaussian1D& g1, double eps);

// Metric tensor of the divergence on the centered Gaussian family,
// parametrized by variance: g(v) = 1 / (4 sqrt(eps^2/16 + v^2)).
double gaussian_metric(double v, double eps);

// Antiderivative F with F(0) = 0, F'(x) = (1+x^2)^{-1/4}, and its inverse.
// F has no elementary form; it is integrated adaptively to 1e-12 and
// inverted by safeguarded Newton (F' is explicit and strictly positive).
double gaussian_F(double x);
double gaussian_F_inv(double y);

struct GaussianGeodesicPoint {
    double v_t = 0.0;   // variance at time t
    double d_hat = 0.0; // geodesic distance between the endpoints
};

// Geodesic of the variance metric: v_t = (eps/4) F^{-1} of the linear
// interpolation between F(4 v0/eps) and F(4 v1/eps), and the distance
// d_hat = (sqrt(eps)/4) |F(4 v1/eps) - F(4 v0/eps)|.
GaussianGeodesicPoint gaussian_geodesic(double v0, double v1, double t, double eps);

// Shared grid for comparing the Gaussian formulas against the generic
// discrete solver: equispaced points covering both distributions out to
// `sigmas` standard deviations (tail mass is negligible against the 1e-3
// relative comparison tolerance at the default 6).
Vector gaussian_grid(const Gaussian1D& g0, const Gaussian1D& g1, int n = 400, double sigmas = 6.0);

// Density weights of g on the grid, normalized to a probability vector.
// A zero-variance input puts all mass on the nearest node.
Vector gaussian_weights(const Vector& grid, const Gaussian1D& g);

struct TwoDiracValues {
    double ot = 0.0;
    double sdiv = 0.0;
};

// Transport cost and divergence between the symmetric pairs
// (delta_r + delta_{-r})/2 and (delta_s + delta_{-s})/2 on the line, through
// the kernel values k(r, s) = exp(-(r-s)^2/eps). Note the self-interaction
// enters as k(r, -r) = exp(-4 r^2/eps): the two atoms sit distance 2r apart.
TwoDiracValues two_dirac_values(double r, double s, double eps);

// Normalized triangle defect of sqrt(S) on the triple mu_0, mu_r, mu_2r of
// the symmetric family at r = sqrt(eps):
// (sqrt(S(mu_0, mu_2r)) - sqrt(S(mu_0, mu_r)) - sqrt(S(mu_r, mu_2r))) / sqrt(eps).
// Positive (about 0.093) and independent of eps by the scaling identity, so
// sqrt(S) is not a metric.
double triangle_gap(double eps);

// Two-point ground space with d(x1, x2) = r and mass m at the first point.
// Here b = exp(-2 r^2 / eps): the squared distance is r^2, and the kernel
// ratio entering the self-transport plan is exp(-2 r^2/eps). Contrast with
// the symmetric-Dirac family above, whose atoms at +/-r give exp(-4 r^2/eps).
struct TwoPointState {
    double r = 0.0;
    double m = 0.0;
    double epsilon = 0.0;
    double b = 0.0;        // exp(-2 r^2 / eps)
    double m_sq = 0.0;     // M^2 = m(1-m)
    double p = 0.0;        // off-diagonal mass of the self-transport plan
    double lambda2 = 0.0;  // 1 - p/M^2, second eigenvalue of K
};

// Derived quantities of the self-transport problem on the two-point space.
// Throws DegenerateMass at m in {0, 1}.
TwoPointState two_point_state(double r, double m, double eps);

// Metric tensor on the two-point space for mass flow rate m_dot:
// g = (eps/2) m_dot^2 (M^2 - p) / (p (2 M^2 - p)).
double two_point_tensor(const TwoPointState& state, double m_dot);

// Second-order response of the divergence to symmetric spreading of
// mu_r = (delta_r + delta_{-r})/2, normalized so that values above 1 defeat
// joint convexity of S along point motion:
// 1 + kappa/(1+kappa) ((8 r^2/eps)/(1+kappa) - 2), kappa = exp(-4 r^2/eps).
// Exceeds 1 for every r > sqrt(eps/2); the actual sign change sits slightly
// below that, at the root of 4 r^2/eps = 1 + kappa.
double nonconvexity_value(double r, double eps);

}  // namespace sinkgeo
