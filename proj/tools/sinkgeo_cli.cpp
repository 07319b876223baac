// Command-line front end: compute / geodesic / bridge / figures / validate.
//
// Exit codes: 0 success, 2 validation failure, 3 file IO, 4 unparseable or
// invalid input, 5 solver failure. All floating-point output goes through
// fmt17 so identical runs produce byte-identical artifacts.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "sinkgeo/closed_forms.hpp"
#include "sinkgeo/errors.hpp"
#include "sinkgeo/geodesics.hpp"
#include "sinkgeo/io.hpp"
#include "sinkgeo/sinkhorn.hpp"
#include "sinkgeo/tensor.hpp"
#include "sinkgeo/validate.hpp"

namespace {

using sinkgeo::io::fmt17;
using ordered = nlohmann::ordered_json;

bool g_quiet = false;

void note(const std::string& line) {
    if (!g_quiet) std::fprintf(stderr, "%s\n", line.c_str());
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
    } else {
        sinkgeo::io::write_text_file(out_path, text);
        note("wrote " + out_path);
    }
}

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
};

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    const auto a = text.find(':');
    const auto b = text.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
        throw sinkgeo::InvalidInput("grid must be lo:hi:count, got '" + text + "'");
    try {
        g.lo = std::stod(text.substr(0, a));
        g.hi = std::stod(text.substr(a + 1, b - a - 1));
        g.count = std::stoi(text.substr(b + 1));
    } catch (const std::exception&) {
        throw sinkgeo::InvalidInput("grid must be lo:hi:count, got '" + text + "'");
    }
    if (g.count < 2 || !(g.hi > g.lo)) throw sinkgeo::InvalidInput("grid needs hi > lo and count >= 2");
    return g;
}

// ------------------------------------------------------------------ compute

int run_ot_or_sdiv(bool divergence, const std::string& space_path, const std::string& mu_path,
                   const std::string& nu_path, const sinkgeo::SinkhornOptions& opt,
                   const std::string& out_path) {
    sinkgeo::GroundSpace space = sinkgeo::io::load_space(space_path);
    sinkgeo::Measure mu = sinkgeo::io::load_measure(mu_path, space);
    sinkgeo::Measure nu = sinkgeo::io::load_measure(nu_path, space);

    double value = 0.0;
    int iterations = 0;
    double residual = 0.0;
    if (divergence) {
        sinkgeo::Potentials cross = sinkgeo::solve_potentials(mu, nu, opt);
        sinkgeo::Potentials self_mu = sinkgeo::self_potentials(mu, opt);
        sinkgeo::Potentials self_nu = sinkgeo::self_potentials(nu, opt);
        value = sinkgeo::ot_from_potentials(mu, nu, cross) -
                0.5 * sinkgeo::ot_from_potentials(mu, mu, self_mu) -
                0.5 * sinkgeo::ot_from_potentials(nu, nu, self_nu);
        iterations = cross.iterations + self_mu.iterations + self_nu.iterations;
        residual = std::max({cross.residual, self_mu.residual, self_nu.residual});
        if (!cross.converged || !self_mu.converged || !self_nu.converged)
            throw sinkgeo::NotConverged("sinkhorn did not reach tol " + fmt17(opt.tol));
    } else {
        sinkgeo::Potentials pot = sinkgeo::solve_potentials(mu, nu, opt);
        if (!pot.converged) throw sinkgeo::NotConverged("sinkhorn did not reach tol " + fmt17(opt.tol));
        value = sinkgeo::ot_from_potentials(mu, nu, pot);
        iterations = pot.iterations;
        residual = pot.residual;
    }

    ordered j;
    j["value"] = value;
    j["iterations"] = iterations;
    j["residual"] = residual;
    emit(sinkgeo::io::dump17(j, 2), out_path);
    return 0;
}

int run_tensor(const std::string& space_path, const std::string& mu_path,
               const std::string& tangent_path, const sinkgeo::SinkhornOptions& opt,
               const std::string& out_path) {
    sinkgeo::GroundSpace space = sinkgeo::io::load_space(space_path);
    sinkgeo::Measure mu = sinkgeo::io::load_measure(mu_path, space);
    sinkgeo::TangentVector b = sinkgeo::io::load_tangent(tangent_path, space);

    sinkgeo::SelfTransport st = sinkgeo::self_transport(mu, opt);
    sinkgeo::SpectralReport rep = sinkgeo::spectral_report(st);
    const double g = sinkgeo::metric_tensor(st, b);
    sinkgeo::SignedVector bdot = sinkgeo::beta_dot_from_mu_dot(st, b);
    const double gt = sinkgeo::tilde_metric_tensor(st, bdot);

    ordered j;
    j["g"] = g;
    j["g_tilde"] = gt;
    j["lambda2"] = rep.eigenvalues.size() > 1 ? rep.eigenvalues[1] : 0.0;
    j["q_bound"] = rep.q_bound;
    emit(sinkgeo::io::dump17(j, 2), out_path);
    return 0;
}

int run_bounds(const std::string& space_path, const std::string& mu0_path,
               const std::string& mu1_path, const sinkgeo::SinkhornOptions& opt,
               const std::string& out_path) {
    sinkgeo::GroundSpace space = sinkgeo::io::load_space(space_path);
    sinkgeo::Measure mu0 = sinkgeo::io::load_measure(mu0_path, space);
    sinkgeo::Measure mu1 = sinkgeo::io::load_measure(mu1_path, space);
    auto [lower, upper] = sinkgeo::ds_bounds(mu0, mu1, opt);
    ordered j;
    j["lower"] = lower;
    j["upper"] = upper;
    emit(sinkgeo::io::dump17(j, 2), out_path);
    return 0;
}

// ----------------------------------------------------------------- geodesic

int run_geodesic(const std::string& space_path, const std::string& mu0_path,
                 const std::string& mu1_path, int steps, const sinkgeo::GeodesicOptions& opt,
                 const std::string& out_path) {
    sinkgeo::GroundSpace space = sinkgeo::io::load_space(space_path);
    sinkgeo::Measure mu0 = sinkgeo::io::load_measure(mu0_path, space);
    sinkgeo::Measure mu1 = sinkgeo::io::load_measure(mu1_path, space);
    sinkgeo::GeodesicResult res = sinkgeo::solve_geodesic(mu0, mu1, steps, opt);
    note("geodesic: " + std::to_string(res.iterations) + " sweeps, ds = " + fmt17(res.ds_estimate));

    ordered j;
    j["times"] = std::vector<double>(res.path.times.data(), res.path.times.data() + res.path.times.size());
    ordered weights = ordered::array();
    for (const sinkgeo::Vector& w : res.path.weights)
        weights.push_back(std::vector<double>(w.data(), w.data() + w.size()));
    j["weights"] = std::move(weights);
    j["chain_value"] = res.chain_value;
    j["energy"] = res.energy;
    j["ds_estimate"] = res.ds_estimate;
    j["lower_bound"] = res.lower_bound;
    j["upper_bound"] = res.upper_bound;
    j["iterations"] = res.iterations;
    j["converged"] = res.converged;
    j["energy_discrepancy"] = res.energy_discrepancy;
    emit(sinkgeo::io::dump17(j, 2), out_path);
    return res.converged ? 0 : 5;
}

// ------------------------------------------------------------------- bridge

int run_bridge(const std::string& space_path, const std::string& mu0_path,
               const std::string& mu1_path, double t, const std::string& grid_text,
               const sinkgeo::SinkhornOptions& opt, const std::string& out_path) {
    sinkgeo::GroundSpace space = sinkgeo::io::load_space(space_path);
    if (!space.has_points() || space.dim() != 1)
        throw sinkgeo::InvalidInput("bridge output is a 1-d density scan; the space must have 1-d points");
    sinkgeo::Measure mu0 = sinkgeo::io::load_measure(mu0_path, space);
    sinkgeo::Measure mu1 = sinkgeo::io::load_measure(mu1_path, space);
    GridSpec grid = parse_grid(grid_text);

    sinkgeo::Matrix query(grid.count, 1);
    for (int i = 0; i < grid.count; ++i)
        query(i, 0) = grid.lo + (grid.hi - grid.lo) * i / (grid.count - 1.0);
    sinkgeo::Vector density = sinkgeo::bridge_marginal(mu0, mu1, t, query, opt);

    std::string csv = "# figure=bridge t=" + fmt17(t) + " epsilon=" + fmt17(space.epsilon()) +
                      " grid=" + grid_text + "\n";
    csv += "x,density\n";
    for (int i = 0; i < grid.count; ++i)
        csv += fmt17(query(i, 0)) + "," + fmt17(density[i]) + "\n";
    emit(csv, out_path);
    return 0;
}

// ------------------------------------------------------------------ figures

std::string figure_gaussians(double eps) {
    const double v0 = 0.3, v1 = 1.2;
    std::string csv = "# figure=gaussians epsilon=" + fmt17(eps) + " v0=" + fmt17(v0) +
                      " v1=" + fmt17(v1) + "\n";
    csv += "t,v_path,v_bures,metric,speed_sq_times_metric\n";
    const double y0 = sinkgeo::gaussian_F(4.0 * v0 / eps);
    const double y1 = sinkgeo::gaussian_F(4.0 * v1 / eps);
    for (int i = 0; i <= 60; ++i) {
        const double t = i / 60.0;
        auto pt = sinkgeo::gaussian_geodesic(v0, v1, t, eps);
        const double vdot = 0.25 * eps * (y1 - y0) *
                            std::pow(1.0 + std::pow(4.0 * pt.v_t / eps, 2.0), 0.25);
        const double bures = std::pow((1.0 - t) * std::sqrt(v0) + t * std::sqrt(v1), 2.0);
        const double g = sinkgeo::gaussian_metric(pt.v_t, eps);
        csv += fmt17(t) + "," + fmt17(pt.v_t) + "," + fmt17(bures) + "," + fmt17(g) + "," +
               fmt17(g * vdot * vdot) + "\n";
    }
    return csv;
}

std::string figure_triangle(double eps) {
    // Gap of the root-divergence triangle inequality on (delta_0, nu_r, nu_2r)
    // where nu_r puts mass 1/2 on each of +-r; positive entries are violations.
    std::string csv = "# figure=triangle epsilon=" + fmt17(eps) + " family=(delta_0,nu_r,nu_2r)\n";
    csv += "r_over_sqrt_eps,gap_over_sqrt_eps,d01,d12,d02\n";
    for (int i = 1; i <= 60; ++i) {
        const double r = (i * 0.05) * std::sqrt(eps);
        const double d01 = std::sqrt(sinkgeo::two_dirac_values(0.0, r, eps).sdiv);
        const double d12 = std::sqrt(sinkgeo::two_dirac_values(r, 2.0 * r, eps).sdiv);
        const double d02 = std::sqrt(sinkgeo::two_dirac_values(0.0, 2.0 * r, eps).sdiv);
        const double gap = (d02 - d01 - d12) / std::sqrt(eps);
        csv += fmt17(i * 0.05) + "," + fmt17(gap) + "," + fmt17(d01) + "," + fmt17(d12) + "," +
               fmt17(d02) + "\n";
    }
    return csv;
}

std::string figure_nonconvexity(double eps) {
    // Energy-per-rate of symmetric spreading of two half masses at +-r,
    // normalized so that values above 1 certify nonconvexity of S along
    // linear interpolation; crosses 1 slightly below r = sqrt(eps/2).
    std::string csv = "# figure=nonconvexity epsilon=" + fmt17(eps) + "\n";
    csv += "r_over_sqrt_eps,value\n";
    for (int i = 1; i <= 200; ++i) {
        const double rho = i * 0.008;
        csv += fmt17(rho) + "," + fmt17(sinkgeo::nonconvexity_value(rho * std::sqrt(eps), eps)) + "\n";
    }
    return csv;
}

std::string figure_twopoint(double eps) {
    std::string csv = "# figure=twopoint epsilon=" + fmt17(eps) + " mdot=1\n";
    csv += "r_over_sqrt_eps,m,g,lambda2\n";
    for (double rho : {0.25, 0.5, 1.0, 1.5, 2.0}) {
        for (int i = 1; i <= 19; ++i) {
            const double m = i * 0.05;
            sinkgeo::TwoPointState st = sinkgeo::two_point_state(rho * std::sqrt(eps), m, eps);
            csv += fmt17(rho) + "," + fmt17(m) + "," + fmt17(sinkgeo::two_point_tensor(st, 1.0)) +
                   "," + fmt17(st.lambda2) + "\n";
        }
    }
    return csv;
}

int run_figures(const std::string& which, double eps, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw sinkgeo::IOError("cannot create directory '" + out_dir + "': " + ec.message());

    std::string csv;
    if (which == "gaussians") csv = figure_gaussians(eps);
    else if (which == "triangle") csv = figure_triangle(eps);
    else if (which == "nonconvexity") csv = figure_nonconvexity(eps);
    else csv = figure_twopoint(eps);
    const std::string path = (std::filesystem::path(out_dir) / (which + ".csv")).string();
    sinkgeo::io::write_text_file(path, csv);
    note("wrote " + path);
    return 0;
}

// ----------------------------------------------------------------- validate

int run_validate(const std::string& suite, std::uint64_t seed, const std::string& out_path) {
    std::vector<sinkgeo::CheckResult> results = sinkgeo::validate_suite(suite, seed);
    int failures = 0;
    for (const sinkgeo::CheckResult& r : results) {
        if (!r.passed) ++failures;
        std::string line = (r.passed ? "PASS " : "FAIL ") + r.name + "  observed " + fmt17(r.observed) +
                           " vs " + fmt17(r.threshold);
        if (!r.detail.empty()) line += "  (" + r.detail + ")";
        note(line);
    }
    note(std::to_string(results.size() - failures) + "/" + std::to_string(results.size()) +
         " checks passed");

    ordered j;
    j["suite"] = suite;
    j["seed"] = seed;
    j["passed"] = failures == 0;
    j["failures"] = failures;
    ordered checks = ordered::array();
    for (const sinkgeo::CheckResult& r : results) {
        ordered c;
        c["name"] = r.name;
        c["passed"] = r.passed;
        c["observed"] = r.observed;
        c["threshold"] = r.threshold;
        if (!r.detail.empty()) c["detail"] = r.detail;
        checks.push_back(std::move(c));
    }
    j["checks"] = std::move(checks);
    emit(sinkgeo::io::dump17(j, 2), out_path);
    return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    // Deterministic by default; opt into parallel dense kernels explicitly.
    int threads = 1;
    if (const char* env = std::getenv("SINKGEO_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) threads = parsed;
    }
    Eigen::setNbThreads(threads);

    CLI::App app{"Riemannian geometry of the Sinkhorn divergence: solvers, closed forms, figures"};
    app.require_subcommand(1);
    app.add_flag("--quiet", g_quiet, "suppress progress lines on stderr");
    bool json_only = false;
    app.add_flag("--json", json_only, "machine-readable output only (implies --quiet)");

    std::string space_path, mu_path, nu_path, tangent_path, out_path;
    sinkgeo::SinkhornOptions sopt;

    CLI::App* compute = app.add_subcommand("compute", "single values: ot, sdiv, tensor, bounds");
    compute->require_subcommand(1);
    auto add_solver_opts = [&](CLI::App* cmd) {
        cmd->add_option("--tol", sopt.tol, "sinkhorn fixed-point tolerance");
        cmd->add_option("--max-iter", sopt.max_iter, "sinkhorn sweep limit");
        cmd->add_option("--out", out_path, "write output here instead of stdout");
    };
    CLI::App* c_ot = compute->add_subcommand("ot", "entropic transport value OT_eps");
    c_ot->add_option("--space", space_path)->required();
    c_ot->add_option("--mu", mu_path)->required();
    c_ot->add_option("--nu", nu_path)->required();
    add_solver_opts(c_ot);
    CLI::App* c_sdiv = compute->add_subcommand("sdiv", "sinkhorn divergence S_eps");
    c_sdiv->add_option("--space", space_path)->required();
    c_sdiv->add_option("--mu", mu_path)->required();
    c_sdiv->add_option("--nu", nu_path)->required();
    add_solver_opts(c_sdiv);
    CLI::App* c_tensor = compute->add_subcommand("tensor", "metric tensor of a tangent direction");
    c_tensor->add_option("--space", space_path)->required();
    c_tensor->add_option("--mu", mu_path)->required();
    c_tensor->add_option("--tangent", tangent_path)->required();
    add_solver_opts(c_tensor);
    CLI::App* c_bounds = compute->add_subcommand("bounds", "two-sided geodesic distance bounds");
    c_bounds->add_option("--space", space_path)->required();
    c_bounds->add_option("--mu0", mu_path)->required();
    c_bounds->add_option("--mu1", nu_path)->required();
    add_solver_opts(c_bounds);

    CLI::App* geod = app.add_subcommand("geodesic", "discrete geodesic between two measures");
    int steps = 16;
    sinkgeo::GeodesicOptions gopt;
    geod->add_option("--space", space_path)->required();
    geod->add_option("--mu0", mu_path)->required();
    geod->add_option("--mu1", nu_path)->required();
    geod->add_option("--steps", steps, "number of chain segments");
    geod->add_option("--max-iterations", gopt.max_iterations, "sweep limit");
    geod->add_option("--rel-tol", gopt.rel_tol, "relative decrease convergence threshold");
    geod->add_option("--tol", gopt.sinkhorn.tol, "sinkhorn tolerance inside the chain");
    geod->add_flag("--arc-init", gopt.arc_init, "initialize along the sphere arc instead of linearly");
    geod->add_option("--out", out_path, "write output here instead of stdout");

    CLI::App* bridge = app.add_subcommand("bridge", "entropic interpolation density on a 1-d grid");
    double bridge_t = 0.5;
    std::string grid_text;
    bridge->add_option("--space", space_path)->required();
    bridge->add_option("--mu0", mu_path)->required();
    bridge->add_option("--mu1", nu_path)->required();
    bridge->add_option("--t", bridge_t, "interpolation time in (0,1)")->required();
    bridge->add_option("--grid", grid_text, "query grid lo:hi:count")->required();
    bridge->add_option("--tol", sopt.tol, "sinkhorn fixed-point tolerance");
    bridge->add_option("--out", out_path, "write output here instead of stdout");

    CLI::App* figures = app.add_subcommand("figures", "CSV data behind the standard plots");
    figures->require_subcommand(1);
    double fig_eps = 1.0;
    std::string fig_dir = "figures";
    for (const char* name : {"gaussians", "triangle", "nonconvexity", "twopoint"}) {
        CLI::App* f = figures->add_subcommand(name);
        f->add_option("--eps", fig_eps, "regularization strength");
        f->add_option("--out", fig_dir, "output directory");
    }

    CLI::App* validate = app.add_subcommand("validate", "run a named invariant suite");
    std::string suite = "all";
    std::uint64_t seed = 42;
    validate->add_option("--suite", suite, "core|sinkhorn|tensor|geodesics|closed_forms|all");
    validate->add_option("--seed", seed, "seed for randomized instances");
    validate->add_option("--out", out_path, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 4;
    }
    if (json_only) g_quiet = true;

    try {
        if (compute->parsed()) {
            if (c_ot->parsed()) return run_ot_or_sdiv(false, space_path, mu_path, nu_path, sopt, out_path);
            if (c_sdiv->parsed()) return run_ot_or_sdiv(true, space_path, mu_path, nu_path, sopt, out_path);
            if (c_tensor->parsed()) return run_tensor(space_path, mu_path, tangent_path, sopt, out_path);
            return run_bounds(space_path, mu_path, nu_path, sopt, out_path);
        }
        if (geod->parsed())
            return run_geodesic(space_path, mu_path, nu_path, steps, gopt, out_path);
        if (bridge->parsed())
            return run_bridge(space_path, mu_path, nu_path, bridge_t, grid_text, sopt, out_path);
        if (figures->parsed()) {
            for (CLI::App* f : figures->get_subcommands())
                if (f->parsed()) return run_figures(f->get_name(), fig_eps, fig_dir);
        }
        if (validate->parsed()) return run_validate(suite, seed, out_path);
    } catch (const sinkgeo::IOError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const sinkgeo::ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 4;
    } catch (const sinkgeo::InvalidInput& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 4;
    } catch (const sinkgeo::SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
