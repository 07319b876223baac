#pragma once

#include <utility>

#include "sinkgeo/sinkhorn.hpp"

namespace sinkgeo {

// Options for the inner transport solves of the finite-difference probes.
// The quadratic differences amplify solver noise by 1/t^2, so these run
// tighter than the defaults.
inline SinkhornOptions fd_options() { return SinkhornOptions{1e-13, 200000}; }

// Quadratic-response probe of the divergence along a vertical (mass
// reallocation) direction: the limit of S(mu, mu + t b)/t^2, estimated from
// symmetric second differences at three step sizes with two rounds of
// Richardson extrapolation. The direction is normalized to unit sup norm
// internally and the result rescaled, so the caller's scaling of b is
// respected. Steps start at min(1e-2, half the largest feasible step) and
// never drop below 1e-3 times the smallest weight under the direction's
// support.
double fd_metric_vertical(const Measure& mu, const TangentVector& b,
                          const SinkhornOptions& opt = fd_options());

// Same probe along a horizontal (point motion) direction: velocities is one
// row per point of the space. Each evaluation embeds mu and its pushforward
// under x -> x + t v in a common 2n-point space. Requires a space built from
// point coordinates.
double fd_metric_horizontal(const Measure& mu, const Matrix& velocities,
                            const SinkhornOptions& opt = fd_options());

// Large-epsilon behavior of the horizontal response: returns the probe value
// and the limit || sum_i mu_i v_i ||^2 it should approach as epsilon grows.
std::pair<double, double> tensor_eps_infinity_check(const Measure& mu, const Matrix& velocities,
                                                    const SinkhornOptions& opt = fd_options());

}  // namespace sinkgeo
