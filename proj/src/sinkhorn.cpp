#include "sinkgeo/sinkhorn.hpp"

#include <cmath>

namespace sinkgeo {

namespace {

void require_same_space(const Measure& mu, const Measure& nu) {
    if (&mu.space() != &nu.space()) {
        throw InvalidInput("measures live on different ground spaces");
    }
}

// Rows of the cost matrix at the support indices of mu, prepared once so the
// per-sweep soft-min is a dense column reduction.
struct SoftMin {
    Matrix cost_rows;  // ns x n
    Vector log_w;      // ns
    double eps;

    SoftMin(const GroundSpace& space, const Measure& mu) : eps(space.epsilon()) {
        const auto& sup = mu.support();
        const int ns = static_cast<int>(sup.size());
        cost_rows.resize(ns, space.size());
        log_w.resize(ns);
        for (int a = 0; a < ns; ++a) {
            cost_rows.row(a) = space.cost().row(sup[a]);
            log_w[a] = std::log(mu[sup[a]]);
        }
    }

    // f given in support coordinates (length ns); returns values at all points.
    Vector apply(const Vector& f_sup) const {
        Matrix arg = -cost_rows;
        arg.colwise() += f_sup;
        arg /= eps;
        arg.colwise() += log_w;
        Vector m = arg.colwise().maxCoeff().transpose();
        Vector lse =
            (arg.rowwise() - m.transpose()).array().exp().colwise().sum().log().matrix().transpose();
        return -eps * (m + lse);
    }
};

Vector restrict_to(const std::vector<int>& idx, const Vector& v) {
    Vector out(idx.size());
    for (size_t a = 0; a < idx.size(); ++a) out[static_cast<Eigen::Index>(a)] = v[idx[a]];
    return out;
}

}  // namespace

Vector t_eps(const GroundSpace& space, const Vector& f, const Measure& mu) {
    if (f.size() != space.size()) throw InvalidInput("t_eps: potential length mismatch");
    if (&mu.space() != &space) throw InvalidInput("t_eps: measure on a different space");
    SoftMin sm(space, mu);
    return sm.apply(restrict_to(mu.support(), f));
}

Potentials solve_potentials(const Measure& mu, const Measure& nu,
                            const SinkhornOptions& opt, const Potentials* warm) {
    require_same_space(mu, nu);
    const GroundSpace& space = mu.space();
    SoftMin from_mu(space, mu);  // computes g = T(f, mu)
    SoftMin from_nu(space, nu);  // computes f = T(g, nu)

    Vector f = warm ? warm->f : Vector::Zero(space.size());
    Vector f_sup = restrict_to(mu.support(), f);
    Vector g = from_mu.apply(f_sup);
    Vector g_sup = restrict_to(nu.support(), g);

    Potentials pot;
    pot.gauge_index = mu.support().front();
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        f = from_nu.apply(g_sup);
        f_sup = restrict_to(mu.support(), f);
        Vector g_new = from_mu.apply(f_sup);
        residual = (g_new - g).cwiseAbs().maxCoeff();
        g = g_new;
        g_sup = restrict_to(nu.support(), g);
        if (residual <= opt.tol) {
            ++it;
            break;
        }
    }
    // One more half-sweep so that f = T(g, nu) holds exactly at every point,
    // including zero-weight ones; g then satisfies its equation within tol.
    f = from_nu.apply(g_sup);

    const double shift = (f[pot.gauge_index] - g[nu.support().front()]) / 2.0;
    pot.f = f.array() - shift;
    pot.g = g.array() + shift;
    pot.residual = residual;
    pot.iterations = it;
    pot.converged = residual <= opt.tol;
    return pot;
}

Potentials self_potentials(const Measure& mu, const SinkhornOptions& opt,
                           const Potentials* warm) {
    const GroundSpace& space = mu.space();
    SoftMin sm(space, mu);
    Vector f_sup = warm ? restrict_to(mu.support(), warm->f)
                        : Vector::Zero(static_cast<Eigen::Index>(mu.support().size()));

    Potentials pot;
    pot.gauge_index = mu.support().front();
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    Vector tf_all;
    for (; it < opt.max_iter; ++it) {
        tf_all = sm.apply(f_sup);
        Vector tf_sup = restrict_to(mu.support(), tf_all);
        residual = (tf_sup - f_sup).cwiseAbs().maxCoeff();
        f_sup = 0.5 * (f_sup + tf_sup);
        if (residual <= opt.tol) {
            ++it;
            break;
        }
    }
    // Extend by one soft-min application; on the support this agrees with the
    // iterate within the residual.
    pot.f = sm.apply(f_sup);
    for (size_t a = 0; a < mu.support().size(); ++a) {
        pot.f[mu.support()[a]] = f_sup[static_cast<Eigen::Index>(a)];
    }
    pot.g = pot.f;
    pot.residual = residual;
    pot.iterations = it;
    pot.converged = residual <= opt.tol;
    return pot;
}

double ot_from_potentials(const Measure& mu, const Measure& nu, const Potentials& pot) {
    return mu.weights().dot(pot.f) + nu.weights().dot(pot.g);
}

double ot_eps(const Measure& mu, const Measure& nu, const SinkhornOptions& opt) {
    require_same_space(mu, nu);
    if (&mu == &nu || (mu.weights() - nu.weights()).cwiseAbs().maxCoeff() == 0.0) {
        Potentials pot = self_potentials(mu, opt);
        return 2.0 * mu.weights().dot(pot.f);
    }
    Potentials pot = solve_potentials(mu, nu, opt);
    return ot_from_potentials(mu, nu, pot);
}

Coupling plan(const Measure& mu, const Measure& nu, const Potentials& pot) {
    require_same_space(mu, nu);
    if (!pot.converged) throw NotConverged("plan requested from non-converged potentials");
    const GroundSpace& space = mu.space();
    const double eps = space.epsilon();
    const int n = space.size();
    Coupling c;
    c.matrix.resize(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            c.matrix(i, j) =
                std::exp((pot.f[i] + pot.g[j] - space.cost()(i, j)) / eps) * mu[i] * nu[j];
        }
    }
    c.value = ot_from_potentials(mu, nu, pot);
    return c;
}

double sinkhorn_divergence(const Measure& mu, const Measure& nu, const SinkhornOptions& opt) {
    require_same_space(mu, nu);
    return ot_eps(mu, nu, opt) - 0.5 * ot_eps(mu, mu, opt) - 0.5 * ot_eps(nu, nu, opt);
}

Vector grad_s_eps(const Measure& mu, const Measure& nu, const SinkhornOptions& opt) {
    Potentials cross = solve_potentials(mu, nu, opt);
    Potentials self = self_potentials(mu, opt);
    return cross.f - self.f;
}

}  // namespace sinkgeo
