#include "sinkgeo/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sinkgeo/errors.hpp"
#include "sinkgeo/tensor.hpp"

namespace sinkgeo {

namespace {

constexpr double kInitFloor = 1e-12;    // strictly positive interior steps for the logit parametrization
constexpr double kUpdateFloor = 1e-250; // keeps mirror updates away from exact zero
constexpr double kArmijo = 1e-4;
constexpr double kEtaMax = 1e6;         // per-node step sizes grow on acceptance up to this cap

bool lex_less(const Vector& a, const Vector& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

bool lex_less(const Matrix& a, const Matrix& b) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (a(i, j) != b(i, j)) return a(i, j) < b(i, j);
    return false;
}

// Deterministic, orientation-free accumulation: time reversal permutes the
// segment values, so summing them in sorted order gives an exact identity.
double sorted_sum(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::accumulate(v.begin(), v.end(), 0.0);
}

void check_times(const Vector& times) {
    if (times.size() < 2) throw InvalidInput("a path needs at least two time points");
    if (times[0] != 0.0 || times[times.size() - 1] != 1.0) throw InvalidInput("path times must start at 0 and end at 1");
    for (Eigen::Index k = 0; k + 1 < times.size(); ++k)
        if (!(times[k] < times[k + 1])) throw InvalidInput("path times must be strictly increasing");
}

Vector normalized(const Vector& w) { return w / w.sum(); }

// Divergence between two labeled clouds with common weights, evaluated on
// the disjoint union of the clouds. Returns the value and the cross plan
// block (rows indexing X, columns Y) when requested.
double particle_sdiv(const Matrix& X, const Matrix& Y, const Vector& w, double eps,
                     const SinkhornOptions& opt, Matrix* cross_plan = nullptr) {
    const auto n = X.rows();
    Matrix both(2 * n, X.cols());
    both.topRows(n) = X;
    both.bottomRows(n) = Y;
    GroundSpace uspace = GroundSpace::sqeuclidean(both, eps);
    Vector w0 = Vector::Zero(2 * n), w1 = Vector::Zero(2 * n);
    w0.head(n) = w;
    w1.tail(n) = w;
    Measure mu0(uspace, w0), mu1(uspace, w1);
    Potentials pot = solve_potentials(mu0, mu1, opt);
    const double cross = ot_from_potentials(mu0, mu1, pot);
    if (cross_plan) *cross_plan = plan(mu0, mu1, pot).matrix.topRightCorner(n, n);

    GroundSpace sx = GroundSpace::sqeuclidean(X, eps);
    GroundSpace sy = GroundSpace::sqeuclidean(Y, eps);
    Measure mx(sx, w), my(sy, w);
    return cross - 0.5 * ot_eps(mx, mx, opt) - 0.5 * ot_eps(my, my, opt);
}

}  // namespace

double path_energy(const Path& path, const SinkhornOptions& opt) {
    if (path.mode != PathMode::FixedSupport) throw InvalidInput("path energy is defined for fixed-support paths");
    if (!path.space) throw InvalidInput("path has no ground space");
    check_times(path.times);
    const int N = path.segments();
    if (static_cast<int>(path.weights.size()) != N + 1) throw InvalidInput("path needs one weight vector per time");
    const GroundSpace& space = *path.space;

    std::vector<Vector> w(path.weights.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (path.weights[k].size() != space.size()) throw InvalidInput("path weights do not match the space size");
        w[k] = normalized(path.weights[k]);
    }

    // Interior steps must carry mass wherever any step of the path does,
    // otherwise the central-difference tangents leave their support.
    for (Eigen::Index i = 0; i < space.size(); ++i) {
        bool used = false;
        for (const auto& wk : w) used = used || wk[i] > 0.0;
        if (!used) continue;
        for (int k = 1; k < N; ++k)
            if (!(w[static_cast<std::size_t>(k)][i] > 0.0))
                throw SupportViolation("interior path step vanishes on the common support");
    }

    auto tensor_at = [&](int k, const Vector& b) {
        Measure mu(space, w[static_cast<std::size_t>(k)]);
        SelfTransport st = self_transport(mu, opt);
        return metric_tensor(st, TangentVector(space, b));
    };
    auto admissible = [&](const Vector& b, const Vector& base) {
        for (Eigen::Index i = 0; i < b.size(); ++i)
            if (b[i] != 0.0 && base[i] == 0.0) return false;
        return true;
    };

    std::vector<double> e(static_cast<std::size_t>(N) + 1, 0.0);
    for (int k = 1; k < N; ++k) {
        Vector b = (w[static_cast<std::size_t>(k) + 1] - w[static_cast<std::size_t>(k) - 1]) /
                   (path.times[k + 1] - path.times[k - 1]);
        e[static_cast<std::size_t>(k)] = tensor_at(k, b);
    }
    Vector b0 = (w[1] - w[0]) / (path.times[1] - path.times[0]);
    Vector bN = (w[static_cast<std::size_t>(N)] - w[static_cast<std::size_t>(N) - 1]) /
                (path.times[N] - path.times[N - 1]);
    const bool adm0 = admissible(b0, w[0]);
    const bool admN = admissible(bN, w[static_cast<std::size_t>(N)]);
    if (N == 1 && (!adm0 || !admN))
        throw SupportViolation("single-segment path moves mass off the endpoint supports");
    e[0] = adm0 ? tensor_at(0, b0) : e[1];
    e[static_cast<std::size_t>(N)] = admN ? tensor_at(N, bN) : e[static_cast<std::size_t>(N) - 1];

    double total = 0.0;
    for (int k = 0; k < N; ++k)
        total += (path.times[k + 1] - path.times[k]) *
                 0.5 * (e[static_cast<std::size_t>(k)] + e[static_cast<std::size_t>(k) + 1]);
    return total;
}

double chain_objective(const Path& path, const SinkhornOptions& opt) {
    check_times(path.times);
    const int N = path.segments();
    std::vector<double> seg;
    seg.reserve(static_cast<std::size_t>(N));
    if (path.mode == PathMode::FixedSupport) {
        if (!path.space) throw InvalidInput("path has no ground space");
        if (static_cast<int>(path.weights.size()) != N + 1) throw InvalidInput("path needs one weight vector per time");
        std::vector<Measure> mu;
        mu.reserve(path.weights.size());
        for (const auto& wk : path.weights) mu.emplace_back(*path.space, normalized(wk));
        for (int k = 0; k < N; ++k) {
            const auto a = static_cast<std::size_t>(k);
            const bool fwd = !lex_less(mu[a + 1].weights(), mu[a].weights());
            seg.push_back(fwd ? sinkhorn_divergence(mu[a], mu[a + 1], opt)
                              : sinkhorn_divergence(mu[a + 1], mu[a], opt));
        }
    } else {
        if (static_cast<int>(path.positions.size()) != N + 1) throw InvalidInput("path needs one point matrix per time");
        for (int k = 0; k < N; ++k) {
            const auto a = static_cast<std::size_t>(k);
            const bool fwd = !lex_less(path.positions[a + 1], path.positions[a]);
            seg.push_back(fwd ? particle_sdiv(path.positions[a], path.positions[a + 1], path.particle_weights,
                                              path.epsilon, opt)
                              : particle_sdiv(path.positions[a + 1], path.positions[a], path.particle_weights,
                                              path.epsilon, opt));
        }
    }
    return N * sorted_sum(std::move(seg));
}

namespace {

// Chain state for the fixed-support solver: steps, per-step self-transport
// values, per-segment divergences with warm-startable potentials.
class ChainWorker {
  public:
    ChainWorker(const GroundSpace& space, std::vector<Vector> weights, const SinkhornOptions& opt)
        : space_(space), opt_(opt), w_(std::move(weights)) {
        const auto n_steps = w_.size();
        self_ot_.resize(n_steps);
        self_pot_.resize(n_steps);
        seg_.resize(n_steps - 1);
        cross_pot_.resize(n_steps - 1);
        seg_fwd_.assign(n_steps - 1, true);
        eta_.assign(n_steps, 1.0);
        for (std::size_t k = 0; k < n_steps; ++k) refresh_self(k, nullptr);
        for (std::size_t k = 0; k + 1 < n_steps; ++k) refresh_segment(k, nullptr, true);
    }

    int segments() const { return static_cast<int>(seg_.size()); }
    const std::vector<Vector>& weights() const { return w_; }
    const std::vector<double>& segment_values() const { return seg_; }
    double chain() const { return segments() * sorted_sum(seg_); }

    // Potential of the step-k measure inside segment `s` (s = k-1 or k).
    Vector cross_potential_of(std::size_t s, std::size_t k) const {
        if (s == k) return seg_fwd_[s] ? cross_pot_[s].f : cross_pot_[s].g;  // k is the left end
        return seg_fwd_[s] ? cross_pot_[s].g : cross_pot_[s].f;             // k is the right end
    }

    // One Gauss-Seidel sweep of mirror-descent updates over interior steps.
    // Returns the total objective decrease.
    double sweep() {
        const double n_seg = segments();
        double gained = 0.0;
        for (std::size_t k = 1; k + 1 < w_.size(); ++k) {
            Vector grad = n_seg * ((cross_potential_of(k - 1, k) - self_pot_[k].f) +
                                   (cross_potential_of(k, k) - self_pot_[k].f));
            const Vector& wk = w_[k];
            const double mean = wk.dot(grad);
            double pred = 0.0;
            for (Eigen::Index i = 0; i < wk.size(); ++i) pred += wk[i] * (grad[i] - mean) * (grad[i] - mean);
            if (!(pred > 1e-30)) continue;

            const double local_old = seg_[k - 1] + seg_[k];
            for (double eta = eta_[k]; eta >= 1e-12; eta *= 0.5) {
                Vector logits = wk.array().log() - eta * grad.array();
                logits.array() -= logits.maxCoeff();
                Vector cand = logits.array().exp();
                cand = (cand / cand.sum()).cwiseMax(kUpdateFloor);
                cand /= cand.sum();

                Measure mu_c(space_, cand);
                Potentials self_c = self_potentials(mu_c, opt_, &self_pot_[k]);
                const double self_ot_c = ot_from_potentials(mu_c, mu_c, self_c);
                bool fwd_prev, fwd_next;
                Potentials cp_prev, cp_next;
                const double s_prev = eval_segment(k - 1, mu_c, self_ot_c, true, &cp_prev, &fwd_prev);
                const double s_next = eval_segment(k + 1, mu_c, self_ot_c, false, &cp_next, &fwd_next);
                const double local_new = s_prev + s_next;
                if (n_seg * (local_old - local_new) >= kArmijo * eta * pred) {
                    w_[k] = cand;
                    self_pot_[k] = self_c;
                    self_ot_[k] = self_ot_c;
                    seg_[k - 1] = s_prev;
                    cross_pot_[k - 1] = cp_prev;
                    seg_fwd_[k - 1] = fwd_prev;
                    seg_[k] = s_next;
                    cross_pot_[k] = cp_next;
                    seg_fwd_[k] = fwd_next;
                    gained += n_seg * (local_old - local_new);
                    eta_[k] = std::min(2.0 * eta, kEtaMax);
                    break;
                }
            }
        }
        return gained;
    }

    // Replace the whole interior with `cand` (same length as the chain,
    // endpoints ignored) if doing so lowers the chain value. Used for
    // extrapolation jumps; rejected candidates leave the state untouched.
    bool try_jump(const std::vector<Vector>& cand) {
        const auto n_steps = w_.size();
        std::vector<Vector> w_c = w_;
        for (std::size_t k = 1; k + 1 < n_steps; ++k) w_c[k] = cand[k];

        std::vector<Potentials> self_pot_c = self_pot_;
        std::vector<double> self_ot_c = self_ot_;
        for (std::size_t k = 1; k + 1 < n_steps; ++k) {
            Measure mu(space_, w_c[k]);
            self_pot_c[k] = self_potentials(mu, opt_, &self_pot_[k]);
            self_ot_c[k] = ot_from_potentials(mu, mu, self_pot_c[k]);
        }

        std::vector<Potentials> cross_c(n_steps - 1);
        std::vector<bool> fwd_c(n_steps - 1);
        std::vector<double> seg_c(n_steps - 1);
        for (std::size_t s = 0; s + 1 < n_steps; ++s) {
            Measure left(space_, w_c[s]), right(space_, w_c[s + 1]);
            const bool fwd = !lex_less(right.weights(), left.weights());
            Potentials warm = cross_pot_[s];
            if (warm.f.size() > 0 && fwd != seg_fwd_[s]) std::swap(warm.f, warm.g);
            const Measure& a = fwd ? left : right;
            const Measure& b = fwd ? right : left;
            cross_c[s] = solve_potentials(a, b, opt_, warm.f.size() > 0 ? &warm : nullptr);
            fwd_c[s] = fwd;
            seg_c[s] = ot_from_potentials(a, b, cross_c[s]) - 0.5 * self_ot_c[s] - 0.5 * self_ot_c[s + 1];
        }

        if (!(segments() * sorted_sum(seg_c) < chain())) return false;
        w_ = std::move(w_c);
        self_pot_ = std::move(self_pot_c);
        self_ot_ = std::move(self_ot_c);
        cross_pot_ = std::move(cross_c);
        seg_fwd_ = std::move(fwd_c);
        seg_ = std::move(seg_c);
        return true;
    }

  private:
    void refresh_self(std::size_t k, const Potentials* warm) {
        Measure mu(space_, w_[k]);
        self_pot_[k] = self_potentials(mu, opt_, warm);
        self_ot_[k] = ot_from_potentials(mu, mu, self_pot_[k]);
    }

    // Divergence between the (fixed) step at `other` and a candidate measure
    // replacing its neighbor, in canonical orientation.
    double eval_segment(std::size_t other, const Measure& cand, double cand_self_ot, bool cand_is_right,
                        Potentials* pot_out, bool* fwd_out) {
        Measure mu_o(space_, w_[other]);
        const Measure& left = cand_is_right ? mu_o : cand;
        const Measure& right = cand_is_right ? cand : mu_o;
        const bool fwd = !lex_less(right.weights(), left.weights());
        const std::size_t s = cand_is_right ? other : other - 1;
        Potentials warm = cross_pot_[s];
        if (warm.f.size() > 0 && fwd != seg_fwd_[s]) std::swap(warm.f, warm.g);
        const Measure& a = fwd ? left : right;
        const Measure& b = fwd ? right : left;
        Potentials pot = solve_potentials(a, b, opt_, warm.f.size() > 0 ? &warm : nullptr);
        const double cross = ot_from_potentials(a, b, pot);
        const double self_o = self_ot_[other];
        *pot_out = pot;
        *fwd_out = fwd;
        return cross - 0.5 * cand_self_ot - 0.5 * self_o;
    }

    void refresh_segment(std::size_t s, const Potentials* warm, bool warm_fwd) {
        Measure left(space_, w_[s]), right(space_, w_[s + 1]);
        const bool fwd = !lex_less(right.weights(), left.weights());
        Potentials warm_sw;
        const Potentials* wp = nullptr;
        if (warm && warm->f.size() > 0) {
            warm_sw = *warm;
            if (fwd != warm_fwd) std::swap(warm_sw.f, warm_sw.g);
            wp = &warm_sw;
        }
        const Measure& a = fwd ? left : right;
        const Measure& b = fwd ? right : left;
        cross_pot_[s] = solve_potentials(a, b, opt_, wp);
        seg_fwd_[s] = fwd;
        seg_[s] = ot_from_potentials(a, b, cross_pot_[s]) - 0.5 * self_ot_[s] - 0.5 * self_ot_[s + 1];
    }

    const GroundSpace& space_;
    SinkhornOptions opt_;
    std::vector<Vector> w_;
    std::vector<double> self_ot_;
    std::vector<Potentials> self_pot_;
    std::vector<double> seg_;
    std::vector<Potentials> cross_pot_;
    std::vector<bool> seg_fwd_;
    std::vector<double> eta_;
};

// Aitken-style acceleration: Gauss-Seidel damps the chain's fast modes
// within a few sweeps but relaxes slow collective modes geometrically. The
// displacement since `snap` isolates the slow mode dominating that window,
// and jumping along it (largest improving multiple from a ladder) collapses
// it. Rejected jumps leave the iterate untouched, so descent stays monotone.
void try_extrapolation(ChainWorker& worker, const std::vector<Vector>& snap) {
    const std::vector<Vector>& cur = worker.weights();
    double disp = 0.0;
    std::vector<Vector> dir(cur.size());
    for (std::size_t k = 1; k + 1 < cur.size(); ++k) {
        Vector d = (cur[k].array() / snap[k].array()).log();
        d.array() -= d.mean();
        disp = std::max(disp, d.cwiseAbs().maxCoeff());
        dir[k] = std::move(d);
    }
    if (disp <= 1e-15) return;
    std::vector<Vector> cand = cur;
    for (double gamma : {1e4, 3e3, 1e3, 3e2, 1e2, 30.0, 10.0, 3.0, 1.0}) {
        if (gamma * disp > 400.0) continue;  // keep exp() in range
        for (std::size_t k = 1; k + 1 < cur.size(); ++k) {
            Vector logits = cur[k].array().log() + gamma * dir[k].array();
            logits.array() -= logits.maxCoeff();
            Vector wk = logits.array().exp();
            wk = (wk / wk.sum()).cwiseMax(kUpdateFloor);
            cand[k] = wk / wk.sum();
        }
        if (worker.try_jump(cand)) return;
    }
}

std::vector<Vector> initial_weights(const Measure& mu0, const Measure& mu1, const Vector& times,
                                    const GeodesicOptions& opt) {
    const auto n_steps = static_cast<std::size_t>(times.size());
    std::vector<Vector> w(n_steps);
    w.front() = mu0.weights();
    w.back() = mu1.weights();

    Vector alpha0, alpha1;
    double theta = 0.0;
    if (opt.arc_init) {
        SelfTransport st0 = self_transport(mu0, opt.sinkhorn);
        SelfTransport st1 = self_transport(mu1, opt.sinkhorn);
        alpha0 = map_A(st0);
        alpha1 = map_A(st1);
        const double c = std::clamp(alpha0.dot(mu0.space().gibbs() * alpha1), -1.0, 1.0);
        theta = std::acos(c);
    }

    for (std::size_t k = 1; k + 1 < n_steps; ++k) {
        const double t = times[static_cast<Eigen::Index>(k)];
        Vector wk;
        if (opt.arc_init && theta > 1e-12) {
            // Great-circle interpolation on the kernel unit sphere, pulled
            // back to weights.
            Vector alpha = (std::sin((1.0 - t) * theta) * alpha0 + std::sin(t * theta) * alpha1) / std::sin(theta);
            wk = alpha.cwiseProduct(mu0.space().gibbs() * alpha);
        } else {
            wk = (1.0 - t) * mu0.weights() + t * mu1.weights();
        }
        wk = (wk / wk.sum()).cwiseMax(kInitFloor);
        w[k] = wk / wk.sum();
    }
    return w;
}

}  // namespace

GeodesicResult solve_geodesic(const Measure& mu0, const Measure& mu1, int n_segments, const GeodesicOptions& opt) {
    if (&mu0.space() != &mu1.space()) throw InvalidInput("endpoints must live on one ground space");
    if (n_segments < 2) throw InvalidInput("need at least two segments");
    const GroundSpace& space = mu0.space();
    Vector times = Vector::LinSpaced(n_segments + 1, 0.0, 1.0);

    ChainWorker worker(space, initial_weights(mu0, mu1, times, opt), opt.sinkhorn);

    std::vector<double> history{worker.chain()};
    std::vector<Vector> snap = worker.weights();
    std::vector<Vector> snap_long = snap;
    bool converged = false;
    int it = 0;
    while (it < opt.max_iterations) {
        worker.sweep();
        ++it;

        // Aitken-style acceleration: Gauss-Seidel damps the chain's fast
        // modes within a few sweeps but relaxes the slow collective mode
        // geometrically. The displacement across a window of sweeps isolates
        // that mode, and jumping along it (largest improving multiple from a
        // ladder) collapses it. Rejected jumps leave the iterate untouched,
        // so descent stays monotone.
        if (it % opt.stall_window == 0) {
            // String-method resampling: place the steps at uniform cumulative
            // arc length along the current polygonal path. Equal segment
            // values are the signature of a constant-speed geodesic, and
            // direct resampling removes the tangential drift that sweeps
            // relax only slowly.
            {
                const std::vector<double>& seg = worker.segment_values();
                const std::vector<Vector>& wts = worker.weights();
                const auto n_steps = wts.size();
                std::vector<double> arc(n_steps, 0.0);
                for (std::size_t s = 0; s + 1 < n_steps; ++s)
                    arc[s + 1] = arc[s] + std::sqrt(std::max(seg[s], 0.0));
                if (arc.back() > 0.0) {
                    std::vector<Vector> cand = wts;
                    std::size_t bracket = 0;
                    for (std::size_t m = 1; m + 1 < n_steps; ++m) {
                        const double u = arc.back() * static_cast<double>(m) / static_cast<double>(n_steps - 1);
                        while (bracket + 2 < n_steps && arc[bracket + 1] < u) ++bracket;
                        const double span = arc[bracket + 1] - arc[bracket];
                        const double theta = span > 0.0 ? (u - arc[bracket]) / span : 0.0;
                        Vector wk = (1.0 - theta) * wts[bracket] + theta * wts[bracket + 1];
                        wk = (wk / wk.sum()).cwiseMax(kUpdateFloor);
                        cand[m] = wk / wk.sum();
                    }
                    worker.try_jump(cand);
                }
            }

            try_extrapolation(worker, snap);
            snap = worker.weights();
            if (it % (5 * opt.stall_window) == 0) {
                // A longer window isolates the very slowest mode more cleanly.
                try_extrapolation(worker, snap_long);
                snap_long = worker.weights();
            }
        }

        const double chain = worker.chain();
        history.push_back(chain);
        if (static_cast<int>(history.size()) > opt.stall_window) {
            const double before = history[history.size() - 1 - static_cast<std::size_t>(opt.stall_window)];
            if (before - chain <= opt.rel_tol * std::max(chain, 1e-12)) {
                converged = true;
                break;
            }
        }
    }

    GeodesicResult res;
    res.path.mode = PathMode::FixedSupport;
    res.path.space = &space;
    res.path.times = times;
    res.path.weights = worker.weights();
    res.path.epsilon = space.epsilon();
    res.chain_value = worker.chain();
    res.ds_estimate = std::sqrt(std::max(res.chain_value, 0.0));
    res.iterations = it;
    res.converged = converged;
    auto bounds = ds_bounds(mu0, mu1, opt.sinkhorn);
    res.lower_bound = bounds.first;
    res.upper_bound = bounds.second;
    res.energy = path_energy(res.path, opt.sinkhorn);
    res.energy_discrepancy =
        std::abs(res.energy - res.chain_value) > 0.05 * std::max({res.chain_value, res.energy, 1e-12});
    return res;
}

GeodesicResult solve_geodesic_particles(const Matrix& points0, const Matrix& points1, const Vector& weights,
                                        double eps, int n_segments, const GeodesicOptions& opt) {
    if (points0.rows() != points1.rows() || points0.cols() != points1.cols())
        throw InvalidInput("endpoint clouds must have matching shapes");
    if (weights.size() != points0.rows()) throw InvalidInput("one weight per atom required");
    if (n_segments < 2) throw InvalidInput("need at least two segments");
    Vector w = weights;
    if ((w.array() <= 0.0).any()) throw InvalidInput("particle weights must be strictly positive");
    w /= w.sum();
    const int N = n_segments;
    const auto n = points0.rows();

    Vector times = Vector::LinSpaced(N + 1, 0.0, 1.0);
    std::vector<Matrix> P(static_cast<std::size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) {
        const double t = times[k];
        P[static_cast<std::size_t>(k)] = (1.0 - t) * points0 + t * points1;
    }

    auto seg_value = [&](const Matrix& X, const Matrix& Y, Matrix* plan_block = nullptr) {
        const bool fwd = !lex_less(Y, X);
        if (fwd) return particle_sdiv(X, Y, w, eps, opt.sinkhorn, plan_block);
        const double v = particle_sdiv(Y, X, w, eps, opt.sinkhorn, plan_block);
        if (plan_block) *plan_block = plan_block->transpose().eval();
        return v;
    };

    std::vector<double> seg(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k)
        seg[static_cast<std::size_t>(k)] = seg_value(P[static_cast<std::size_t>(k)], P[static_cast<std::size_t>(k) + 1]);
    auto chain = [&]() { return N * sorted_sum(seg); };

    auto self_plan = [&](const Matrix& X) {
        GroundSpace s = GroundSpace::sqeuclidean(X, eps);
        Measure mu(s, w);
        Potentials pot = self_potentials(mu, opt.sinkhorn);
        return plan(mu, mu, pot).matrix;
    };

    std::vector<double> history{chain()};
    std::vector<double> eta_start(static_cast<std::size_t>(N) + 1, 1.0);
    bool converged = false;
    int it = 0;
    while (it < opt.max_iterations) {
        for (int k = 1; k < N; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            Matrix cp_prev, cp_next;
            seg[ku - 1] = seg_value(P[ku], P[ku - 1], &cp_prev);  // rows index P[k]
            seg[ku] = seg_value(P[ku], P[ku + 1], &cp_next);
            Matrix pi_self = self_plan(P[ku]);

            // Envelope-theorem gradient of the two adjacent divergences with
            // respect to the atom positions of step k.
            Matrix grad = Matrix::Zero(n, P[ku].cols());
            Vector rp = cp_prev.rowwise().sum();
            Vector rn = cp_next.rowwise().sum();
            Vector rs = pi_self.rowwise().sum();
            grad += 2.0 * (rp.asDiagonal() * P[ku] - cp_prev * P[ku - 1]);
            grad += 2.0 * (rn.asDiagonal() * P[ku] - cp_next * P[ku + 1]);
            grad -= 4.0 * (rs.asDiagonal() * P[ku] - pi_self * P[ku]);
            grad *= N;

            const double pred = grad.squaredNorm();
            if (!(pred > 1e-30)) continue;
            const double local_old = seg[ku - 1] + seg[ku];
            for (double eta = eta_start[ku]; eta >= 1e-12; eta *= 0.5) {
                Matrix cand = P[ku] - eta * grad;
                double s_prev, s_next;
                try {
                    s_prev = seg_value(P[ku - 1], cand);
                    s_next = seg_value(cand, P[ku + 1]);
                } catch (const SolverError&) {
                    continue;  // overshot to where the solver stops converging
                }
                if (N * (local_old - (s_prev + s_next)) >= kArmijo * eta * pred) {
                    P[ku] = cand;
                    seg[ku - 1] = s_prev;
                    seg[ku] = s_next;
                    eta_start[ku] = std::min(2.0 * eta, kEtaMax);
                    break;
                }
            }
        }
        ++it;
        history.push_back(chain());
        if (static_cast<int>(history.size()) > opt.stall_window) {
            const double before = history[history.size() - 1 - static_cast<std::size_t>(opt.stall_window)];
            if (before - history.back() <= opt.rel_tol * std::max(history.back(), 1e-12)) {
                converged = true;
                break;
            }
        }
    }

    GeodesicResult res;
    res.path.mode = PathMode::DiracParticle;
    res.path.times = times;
    res.path.positions = P;
    res.path.particle_weights = w;
    res.path.epsilon = eps;
    res.chain_value = chain();
    res.ds_estimate = std::sqrt(std::max(res.chain_value, 0.0));
    res.iterations = it;
    res.converged = converged;

    // Kinetic energy of the labeled atoms, central differences inside,
    // one-sided at the ends (always admissible here).
    const auto steps = P.size();
    std::vector<double> e(steps, 0.0);
    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t lo = k == 0 ? 0 : k - 1;
        const std::size_t hi = k + 1 == steps ? k : k + 1;
        Matrix v = (P[hi] - P[lo]) / (times[static_cast<Eigen::Index>(hi)] - times[static_cast<Eigen::Index>(lo)]);
        e[k] = w.dot(v.rowwise().squaredNorm());
    }
    res.energy = 0.0;
    for (std::size_t k = 0; k + 1 < steps; ++k)
        res.energy += (times[static_cast<Eigen::Index>(k) + 1] - times[static_cast<Eigen::Index>(k)]) *
                      0.5 * (e[k] + e[k + 1]);
    res.energy_discrepancy =
        std::abs(res.energy - res.chain_value) > 0.05 * std::max({res.chain_value, res.energy, 1e-12});

    // Bounds on the disjoint union of the endpoint clouds.
    Matrix both(2 * n, points0.cols());
    both.topRows(n) = points0;
    both.bottomRows(n) = points1;
    GroundSpace uspace = GroundSpace::sqeuclidean(both, eps);
    Vector w0 = Vector::Zero(2 * n), w1 = Vector::Zero(2 * n);
    w0.head(n) = w;
    w1.tail(n) = w;
    auto bounds = ds_bounds(Measure(uspace, w0), Measure(uspace, w1), opt.sinkhorn);
    res.lower_bound = bounds.first;
    res.upper_bound = bounds.second;
    return res;
}

std::pair<double, double> ds_bounds(const Measure& mu0, const Measure& mu1, const SinkhornOptions& opt) {
    if (&mu0.space() != &mu1.space()) throw InvalidInput("measures must live on one ground space");
    const GroundSpace& space = mu0.space();
    const double eps = space.epsilon();
    Potentials p0 = self_potentials(mu0, opt);
    Potentials p1 = self_potentials(mu1, opt);
    Vector alpha0 = (p0.f.array() / eps).exp().matrix().cwiseProduct(mu0.weights());
    Vector alpha1 = (p1.f.array() / eps).exp().matrix().cwiseProduct(mu1.weights());
    Vector d = alpha0 - alpha1;
    const double norm = std::sqrt(std::max(d.dot(space.gibbs() * d), 0.0));
    const double big_c = 1.0 + 2.0 * std::exp(11.0 * space.cost_sup() / (2.0 * eps));
    const double lower = std::sqrt(0.5 * eps) * norm;
    const double upper = 0.5 * M_PI * std::sqrt(0.5 * eps * big_c) * norm;
    return {lower, upper};
}

Vector bridge_marginal(const Measure& mu0, const Measure& mu1, double t, const Matrix& query_points,
                       const SinkhornOptions& opt) {
    if (&mu0.space() != &mu1.space()) throw InvalidInput("measures must live on one ground space");
    const GroundSpace& space = mu0.space();
    if (!space.has_points() || !space.sqeuclidean_cost())
        throw InvalidInput("bridge marginals need squared Euclidean cost on point coordinates");
    if (!(t > 0.0 && t < 1.0)) throw InvalidInput("bridge time must lie strictly inside (0, 1)");
    const Matrix& pts = space.points();
    if (query_points.cols() != pts.cols()) throw InvalidInput("query points have the wrong dimension");

    Potentials pot = solve_potentials(mu0, mu1, opt);
    Matrix pi = plan(mu0, mu1, pot).matrix;
    const double var = t * (1.0 - t) * space.epsilon() / 2.0;
    const auto d = pts.cols();
    const double norm_const = std::pow(2.0 * M_PI * var, -0.5 * static_cast<double>(d));

    Vector out = Vector::Zero(query_points.rows());
    for (Eigen::Index q = 0; q < query_points.rows(); ++q) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
            if (mu0.weights()[i] == 0.0) continue;
            for (Eigen::Index j = 0; j < pts.rows(); ++j) {
                if (pi(i, j) == 0.0) continue;
                const double dist2 =
                    (query_points.row(q) - ((1.0 - t) * pts.row(i) + t * pts.row(j))).squaredNorm();
                acc += pi(i, j) * std::exp(-dist2 / (2.0 * var));
            }
        }
        out[q] = norm_const * acc;
    }
    return out;
}

}  // namespace sinkgeo
