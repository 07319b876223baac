#pragma once

#include "sinkgeo/space.hpp"

namespace sinkgeo {

struct SinkhornOptions {
    double tol = 1e-10;     // sup-norm change of g per sweep
    int max_iter = 100000;  // sweeps
};

// Dual pair solving the Schroedinger system f = T_eps(g, nu), g = T_eps(f, mu),
// stored as full-length vectors: values at zero-weight points carry the natural
// extension obtained by one extra soft-min application.
struct Potentials {
    Vector f;
    Vector g;
    int gauge_index = 0;    // first support index of mu; f[gauge] = g[first support of nu]
    double residual = 0.0;  // final fixed-point residual (sup norm)
    int iterations = 0;     // sweeps used
    bool converged = false;
};

// Soft-min transform T_eps(f, mu)(y) = -eps log sum_i exp((f_i - c(x_i, y))/eps) mu_i,
// evaluated at every point of the space. Log-domain with max subtraction; only
// support entries of f participate.
Vector t_eps(const GroundSpace& space, const Vector& f, const Measure& mu);

// Alternating Sinkhorn iteration. Zero-weight points are excluded from the
// fixed point and reconstructed afterwards; the gauge shifts both potentials by
// the same constant so that f and g agree at the first support indices. When
// max_iter is exhausted the best iterate is returned with converged = false.
Potentials solve_potentials(const Measure& mu, const Measure& nu,
                            const SinkhornOptions& opt = {},
                            const Potentials* warm = nullptr);

// Self-transport potentials for (mu, mu): the averaged iteration
// f <- (f + T_eps(f, mu))/2 preserves f = g exactly.
Potentials self_potentials(const Measure& mu, const SinkhornOptions& opt = {},
                           const Potentials* warm = nullptr);

// Dual value <mu, f> + <nu, g> of an already-solved pair.
double ot_from_potentials(const Measure& mu, const Measure& nu, const Potentials& pot);

// Entropic optimal transport value OT_eps(mu, nu).
double ot_eps(const Measure& mu, const Measure& nu, const SinkhornOptions& opt = {});

struct Coupling {
    Matrix matrix;  // n x n plan, rows marginal mu, columns marginal nu
    double value = 0.0;
};

// Optimal plan pi = exp((f + g - c)/eps) (mu x nu). Requires converged potentials.
Coupling plan(const Measure& mu, const Measure& nu, const Potentials& pot);

// Debiased divergence S_eps = OT_eps(mu,nu) - OT_eps(mu,mu)/2 - OT_eps(nu,nu)/2.
double sinkhorn_divergence(const Measure& mu, const Measure& nu,
                           const SinkhornOptions& opt = {});

// Gradient of mu -> S_eps(mu, nu) as a function on the support: f_{mu,nu} - f_{mu,mu}.
// Defined up to an additive constant; pairing with balanced tangents is gauge-free.
Vector grad_s_eps(const Measure& mu, const Measure& nu, const SinkhornOptions& opt = {});

}  // namespace sinkgeo
