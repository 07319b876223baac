#include "sinkgeo/tensor.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "sinkgeo/errors.hpp"

namespace sinkgeo {

namespace {

// A second unit eigenvalue of K means the quotient by constants is not
// enough to restore invertibility.
constexpr double kUnitEigTol = 1e-12;

Vector restrict_to(const std::vector<int>& idx, const Vector& v) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[idx[k]];
    return out;
}

}  // namespace

SelfTransport self_transport(const Measure& mu, const SinkhornOptions& opt) {
    const GroundSpace& space = mu.space();
    const double eps = space.epsilon();
    Potentials pot = self_potentials(mu, opt);

    SelfTransport st{mu,
                     mu.support(),
                     pot.f,
                     (pot.f.array() / eps).exp().matrix(),
                     (-pot.f.array() / eps).exp().matrix(),
                     Matrix(),
                     Matrix(),
                     Vector(),
                     Matrix(),
                     Vector(),
                     pot.residual,
                     pot.iterations,
                     pot.converged};

    const auto& sup = st.support;
    const auto m = static_cast<Eigen::Index>(sup.size());
    st.H.resize(m, m);
    st.sqrt_w.resize(m);
    Vector w_sup(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        w_sup[i] = mu.weights()[sup[static_cast<std::size_t>(i)]];
        st.sqrt_w[i] = std::sqrt(w_sup[i]);
        for (Eigen::Index j = 0; j < m; ++j) {
            const int pi = sup[static_cast<std::size_t>(i)];
            const int pj = sup[static_cast<std::size_t>(j)];
            st.H(i, j) = std::exp((pot.f[pi] + pot.f[pj] - space.cost()(pi, pj)) / eps);
        }
    }
    st.K = st.H * w_sup.asDiagonal();

    Matrix M = st.sqrt_w.asDiagonal() * st.H * st.sqrt_w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    if (es.info() != Eigen::Success) throw SolverError("eigendecomposition of the self-transport operator failed");
    // Eigen sorts ascending; flip to descending so eigenvalues[0] is the unit one.
    st.eigenvalues = es.eigenvalues().reverse();
    st.eigenvectors = es.eigenvectors().rowwise().reverse();
    return st;
}

Vector pseudo_solve(const SelfTransport& st, const Vector& v, QuotientOp op) {
    const auto m = static_cast<Eigen::Index>(st.support.size());
    if (v.size() != m) throw InvalidInput("pseudo_solve: right-hand side must be in support coordinates");

    const bool quotient = op != QuotientOp::IPlusK;
    if (quotient) {
        int unit = 0;
        for (Eigen::Index k = 0; k < m; ++k)
            if (std::abs(1.0 - st.eigenvalues[k]) < kUnitEigTol) ++unit;
        if (unit > 1) throw SingularBeyondGauge("support is disconnected at this scale: a second unit eigenvalue makes the quotient solve singular");
    }

    // Work in the symmetrized frame: x = D^{-1/2} h(M) D^{1/2} v with h the
    // spectral transform of the requested operator, unit modes annihilated.
    Vector y = st.sqrt_w.cwiseProduct(v);
    Vector c = st.eigenvectors.transpose() * y;
    for (Eigen::Index k = 0; k < m; ++k) {
        const double lam = st.eigenvalues[k];
        switch (op) {
            case QuotientOp::IMinusKSq:
                c[k] = (std::abs(1.0 - lam) < kUnitEigTol) ? 0.0 : c[k] / (1.0 - lam * lam);
                break;
            case QuotientOp::IMinusK:
                c[k] = (std::abs(1.0 - lam) < kUnitEigTol) ? 0.0 : c[k] / (1.0 - lam);
                break;
            case QuotientOp::IPlusK:
                c[k] = c[k] / (1.0 + lam);
                break;
        }
    }
    Vector x = (st.eigenvectors * c).cwiseQuotient(st.sqrt_w);
    if (quotient) {
        // Pin the additive gauge: return the zero mu-mean representative.
        double mean = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) mean += st.sqrt_w[i] * st.sqrt_w[i] * x[i];
        x.array() -= mean;
    }
    return x;
}

namespace {

// Shared validation for vertical tangents against a self-transport state.
Vector tangent_on_support(const SelfTransport& st, const TangentVector& b) {
    if (&b.space() != &st.space()) throw InvalidInput("tangent vector lives on a different ground space");
    const Vector& w = st.mu.weights();
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (b.weights()[i] != 0.0 && w[i] == 0.0)
            throw SupportViolation("tangent vector assigns mass motion outside the support of the measure");
    return restrict_to(st.support, b.weights());
}

}  // namespace

double metric_tensor(const SelfTransport& st, const TangentVector& b) {
    Vector b_sup = tangent_on_support(st, b);
    Vector rhs = st.H * b_sup;
    Vector x = pseudo_solve(st, rhs, QuotientOp::IMinusKSq);
    return 0.5 * st.space().epsilon() * b_sup.dot(x);
}

Vector potential_derivative(const SelfTransport& st, const TangentVector& b) {
    Vector b_sup = tangent_on_support(st, b);
    Vector rhs = st.H * b_sup;
    return -st.space().epsilon() * pseudo_solve(st, rhs, QuotientOp::IMinusKSq);
}

Vector map_A(const SelfTransport& st) {
    return st.a.cwiseProduct(st.mu.weights());
}

SignedVector map_B(const SelfTransport& st) {
    return SignedVector{&st.space(), st.beta};
}

Measure map_A_inverse(const GroundSpace& space, const Vector& alpha) {
    if (alpha.size() != space.size()) throw InvalidInput("coefficient vector size does not match the ground space");
    if ((alpha.array() < 0.0).any()) throw NotInImage("coefficient vector has negative entries");
    Vector g_alpha = space.gibbs() * alpha;
    const double norm_sq = alpha.dot(g_alpha);
    if (std::abs(norm_sq - 1.0) > 1e-6)
        throw NotInImage("coefficient vector is off the kernel unit sphere: ||alpha||^2 = " + std::to_string(norm_sq));
    // w_i = alpha_i (G alpha)_i sums to alpha^T G alpha; dividing by it makes
    // the weights an exact probability vector.
    Vector w = alpha.cwiseProduct(g_alpha) / norm_sq;
    return Measure(space, w);
}

SignedVector beta_dot_from_mu_dot(const SelfTransport& st, const TangentVector& b) {
    Vector b_sup = tangent_on_support(st, b);
    Vector rhs = st.H * b_sup;
    Vector u = pseudo_solve(st, rhs, QuotientOp::IPlusK);  // u = a beta_dot on support
    Vector a_sup = restrict_to(st.support, st.a);
    Vector bd_sup = u.cwiseQuotient(a_sup);

    // Extend off support through the kernel: the element has combination
    // coefficients alpha_dot = G_sup^{-1} bd_sup = a .* (H^{-1} u), so its
    // value anywhere is a Gibbs application of alpha_dot.
    Vector alpha_dot_sup = a_sup.cwiseProduct(st.H.ldlt().solve(u));
    const auto n = st.space().size();
    Vector alpha_dot = Vector::Zero(n);
    for (std::size_t k = 0; k < st.support.size(); ++k) alpha_dot[st.support[k]] = alpha_dot_sup[static_cast<Eigen::Index>(k)];
    Vector values = st.space().gibbs() * alpha_dot;
    for (std::size_t k = 0; k < st.support.size(); ++k) values[st.support[k]] = bd_sup[static_cast<Eigen::Index>(k)];
    return SignedVector{&st.space(), values};
}

double tilde_metric_tensor(const SelfTransport& st, const SignedVector& beta_dot) {
    if (beta_dot.space != &st.space()) throw InvalidInput("beta_dot lives on a different ground space");
    if (beta_dot.values.size() != st.space().size()) throw InvalidInput("beta_dot must hold one value per point");
    Vector bd_sup = restrict_to(st.support, beta_dot.values);
    Vector a_sup = restrict_to(st.support, st.a);
    Vector w_sup = restrict_to(st.support, st.mu.weights());
    Vector u = a_sup.cwiseProduct(bd_sup);

    // Tangency to the unit sphere at B(mu): <beta_dot, B(mu)>_{H_c} with
    // B(mu) = sum_i a_i mu_i k(x_i, .) is the mu-weighted pairing below.
    const double pairing = w_sup.dot(u);
    if (std::abs(pairing) > 1e-8)
        throw NotTangent("beta_dot is not tangent to the kernel unit sphere: <beta_dot, B(mu)> = " + std::to_string(pairing));

    // ||beta_dot||_{H_c}^2 through H = diag(a) G_sup diag(a).
    const double norm_sq = u.dot(st.H.ldlt().solve(u));
    // Second term: the quotient solve is well posed exactly because u has
    // zero mu-mean, which is the tangency just checked.
    Vector x = pseudo_solve(st, u, QuotientOp::IMinusK);
    const double cross = u.cwiseProduct(w_sup).dot(x);
    return 0.5 * st.space().epsilon() * (norm_sq + 2.0 * cross);
}

SpectralReport spectral_report(const SelfTransport& st) {
    SpectralReport rep;
    rep.eigenvalues = st.eigenvalues;
    rep.gap = st.eigenvalues.size() > 1 ? 1.0 - st.eigenvalues[1] : 1.0;
    rep.q_bound = st.space().q_bound();
    return rep;
}

}  // namespace sinkgeo
