#pragma once

#include "sinkgeo/sinkhorn.hpp"

namespace sinkgeo {

// Everything derived from the self-transport problem OT_eps(mu, mu): the
// potential f (= g), the scalings a = exp(f/eps) and beta = exp(-f/eps), and
// the operators H (kernel form) and K = H diag(mu) (Markov form), restricted
// to the support of mu. The vectors f, a, beta are stored at full length with
// the natural soft-min extension at zero-weight points.
struct SelfTransport {
    Measure mu;
    std::vector<int> support;
    Vector f;     // full length
    Vector a;     // exp(f/eps)
    Vector beta;  // exp(-f/eps)
    Matrix H;     // support x support, H_ij = exp((f_i + f_j - c_ij)/eps)
    Matrix K;     // H * diag(mu support weights); rows sum to 1
    // Spectral data of the symmetrization M = D^{1/2} H D^{1/2}, D = diag(mu):
    // same spectrum as K, eigenvalues in [0, 1] with lambda_1 = 1 simple on
    // connected supports. Stored descending.
    Vector eigenvalues;
    Matrix eigenvectors;
    Vector sqrt_w;  // sqrt of support weights
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;

    const GroundSpace& space() const { return mu.space(); }
};

SelfTransport self_transport(const Measure& mu, const SinkhornOptions& opt = {});

// Which quotient operator a pseudo_solve call inverts.
enum class QuotientOp {
    IMinusKSq,  // (I - K^2)^+, the metric-tensor solve
    IMinusK,    // (I - K)^+, the second term of the RKHS form
    IPlusK,     // (I + K)^{-1}, genuinely invertible, no quotient involved
};

// Solve the requested operator equation in support coordinates. For the two
// singular operators the right-hand side is implicitly projected onto the
// image (constants are invisible to balanced pairings) and the returned
// representative has zero mu-mean. Throws SingularBeyondGauge when a second
// eigenvalue sits within 1e-12 of 1, which signals a disconnected support.
Vector pseudo_solve(const SelfTransport& st, const Vector& v, QuotientOp op = QuotientOp::IMinusKSq);

// Metric tensor g_mu(b, b) = (eps/2) b^T (I - K^2)^+ H b for a balanced
// vertical tangent supported inside the support of mu.
double metric_tensor(const SelfTransport& st, const TangentVector& b);

// d/ds f_{mu, mu+sb} at s = 0, equal to -eps (I - K^2)^+ H b, in support
// coordinates with the zero mu-mean representative. Satisfies
// metric_tensor(st, b) = -<b, result>/2.
Vector potential_derivative(const SelfTransport& st, const TangentVector& b);

// Change of variables: A(mu) = a mu (combination coefficients, full length,
// zero off support), B(mu) = beta (function values, full length).
Vector map_A(const SelfTransport& st);
SignedVector map_B(const SelfTransport& st);

// Inverse of A on its image: alpha -> weights alpha_i (gibbs alpha)_i. The
// image is cut out of the cone of nonnegative vectors by the unit-sphere
// condition alpha^T gibbs alpha = 1, enforced within 1e-6.
Measure map_A_inverse(const GroundSpace& space, const Vector& alpha);

// Derivative of B along the vertical perturbation b: values of beta_dot at
// every point, solving H b = (I + K)[a beta_dot] on the support and extending
// off support through the kernel. Tangent to the unit sphere at B(mu).
SignedVector beta_dot_from_mu_dot(const SelfTransport& st, const TangentVector& b);

// Metric tensor in sphere coordinates:
// (eps/2)(||beta_dot||_{H_c}^2 + 2 <a beta_dot, (I-K)^+ [a beta_dot]>_{L2(mu)}).
// Equals metric_tensor(st, b) when beta_dot = beta_dot_from_mu_dot(st, b).
// Off-support entries of beta_dot are ignored: the element is determined by
// its values on the support.
double tilde_metric_tensor(const SelfTransport& st, const SignedVector& beta_dot);

struct SpectralReport {
    Vector eigenvalues;  // descending, of D^{1/2} H D^{1/2}
    double gap = 0.0;    // 1 - lambda_2
    double q_bound = 0.0;
};

SpectralReport spectral_report(const SelfTransport& st);

}  // namespace sinkgeo
