#include "phasesep/coupled.hpp"

#include "phasesep/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

namespace phasesep {

void SolveConfig::validate() const {
    require(!betas.empty(), ErrorKind::ConfigError, "beta schedule is empty");
    for (size_t i = 0; i < betas.size(); ++i) {
        require(betas[i] > 1.0, ErrorKind::ConfigError, "beta values must exceed 1");
        if (i > 0) require(betas[i] > betas[i - 1], ErrorKind::ConfigError, "beta schedule must be increasing");
    }
    require(tol > 0.0, ErrorKind::ConfigError, "Newton tolerance must be positive");
    require(max_iterations > 0 && max_halvings >= 0, ErrorKind::ConfigError, "invalid iteration limits");
    require(K > 0.0, ErrorKind::ConfigError, "K must be positive");
    require(layer_resolution > 0.0 && layer_width > 0.0 && h_coarse > 0.0, ErrorKind::ConfigError,
            "mesh parameters must be positive");
    require(descent_steps_per_decade >= 0, ErrorKind::ConfigError, "descent steps must be non-negative");
    require(positivity_tol >= 0.0, ErrorKind::ConfigError, "positivity tolerance must be non-negative");
    require(radial_fast_path || n_theta >= 8, ErrorKind::ConfigError, "the 2D path needs n_theta >= 8");
}

int worker_threads() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PHASESEP_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) n = v;
    }
    return std::max(1, n);
}

std::pair<Vec, Vec> coupled_residual(const PolarMesh& mesh, const Nonlinearity& f, double beta, const Vec& u1,
                                     const Vec& u2) {
    Vec F1 = -mesh.laplacian(u1);
    Vec F2 = -mesh.laplacian(u2);
    for (int i = 0; i < mesh.nr(); ++i) {
        for (int j = 0; j < mesh.n_theta(); ++j) {
            const int k = mesh.index(i, j);
            if (mesh.dirichlet_ring(i)) {
                F1(k) = F2(k) = 0.0;
                continue;
            }
            const Point2 x = mesh.node(k);
            F1(k) += -f.f(u1(k), x) + beta * u1(k) * u2(k) * u2(k);
            F2(k) += -f.f(u2(k), x) + beta * u2(k) * u1(k) * u1(k);
        }
    }
    return {F1, F2};
}

CoupledSolution solve_coupled(std::shared_ptr<const PolarMesh> mesh_ptr, const Nonlinearity& f, double beta,
                              const Vec& u1_init, const Vec& u2_init, const CoupledBoundary& boundary,
                              const SolveConfig& cfg) {
    require(mesh_ptr != nullptr, ErrorKind::InvalidInput, "coupled solve needs a mesh");
    const PolarMesh& mesh = *mesh_ptr;
    require(beta > 0.0, ErrorKind::InvalidInput, "beta must be positive");
    require(u1_init.size() == mesh.size() && u2_init.size() == mesh.size(), ErrorKind::InvalidInput,
            "initial guess does not match the mesh");
    Vec u1 = u1_init, u2 = u2_init;
    for (int i = 0; i < mesh.nr(); ++i) {
        if (!mesh.dirichlet_ring(i)) continue;
        for (int j = 0; j < mesh.n_theta(); ++j) {
            const int k = mesh.index(i, j);
            u1(k) = boundary.u1(mesh.node(k));
            u2(k) = boundary.u2(mesh.node(k));
        }
    }
    const BandOperator band(mesh, mesh.kind() == GeometryKind::Disk ? 0 : 1, mesh.nr() - 2);
    const int n = band.size();

    auto residual = [&](const Vec& a, const Vec& b) {
        auto [F1, F2] = coupled_residual(mesh, f, beta, a, b);
        Vec F(2 * n);
        F << band.gather(F1), band.gather(F2);
        return F;
    };

    CoupledSolution sol;
    sol.beta = beta;
    sol.eps = std::pow(beta, -0.25);
    sol.mesh = mesh_ptr;
    Vec F = residual(u1, u2);
    double res = sup_norm(F);
    double floor = 0.0;
    int iter = 0;
    for (; iter < cfg.max_iterations && res > std::max(cfg.tol, floor); ++iter) {
        Vec pot1(mesh.size()), pot2(mesh.size());
        for (int k = 0; k < mesh.size(); ++k) {
            const Point2 x = mesh.node(k);
            pot1(k) = f.fu(u1(k), x) - beta * u2(k) * u2(k);
            pot2(k) = f.fu(u2(k), x) - beta * u1(k) * u1(k);
        }
        const SpMat A1 = band.matrix(pot1);
        const SpMat A2 = band.matrix(pot2);
        Triplets trip;
        trip.reserve(static_cast<size_t>(A1.nonZeros() + A2.nonZeros() + 2 * n));
        double diag_max = 0.0;
        for (int c = 0; c < n; ++c) {
            for (SpMat::InnerIterator it(A1, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
            for (SpMat::InnerIterator it(A2, c); it; ++it) trip.emplace_back(n + it.row(), n + it.col(), it.value());
            diag_max = std::max({diag_max, std::abs(A1.coeff(c, c)), std::abs(A2.coeff(c, c))});
        }
        const Vec b1 = band.gather(u1), b2 = band.gather(u2);
        for (int c = 0; c < n; ++c) {
            const double v = 2.0 * beta * b1(c) * b2(c);
            trip.emplace_back(c, n + c, v);
            trip.emplace_back(n + c, c, v);
        }
        SpMat J(2 * n, 2 * n);
        J.setFromTriplets(trip.begin(), trip.end());
        floor = 64.0 * std::numeric_limits<double>::epsilon() * diag_max *
                std::max({1.0, sup_norm(u1), sup_norm(u2)});
        SparseFactor lu(J);
        const Vec delta = lu.solve(-F);

        // Natural monotonicity test: the trial residual is measured through the frozen Jacobian.
        const bool scaled = cfg.damping_merit == DampingMerit::NewtonScaled;
        const double merit0 = scaled ? delta.squaredNorm() : F.squaredNorm();
        double lambda = 1.0;
        bool accepted = false;
        Vec t1, t2, Ft;
        for (int h = 0; h <= cfg.max_halvings; ++h) {
            t1 = u1;
            t2 = u2;
            band.scatter(b1 + lambda * delta.head(n), t1);
            band.scatter(b2 + lambda * delta.tail(n), t2);
            Ft = residual(t1, t2);
            if (Ft.allFinite()) {
                double merit = 0.0;
                double bound = merit0;
                if (scaled) {
                    const Vec simplified = lu.solve(-Ft);
                    merit = simplified.squaredNorm();
                    bound *= (1.0 - 0.25 * lambda) * (1.0 - 0.25 * lambda);
                } else {
                    merit = Ft.squaredNorm();
                }
                if (merit < bound || (scaled && std::sqrt(merit) <= cfg.tol)) {
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            std::ostringstream msg;
            msg << "line search failed at beta = " << beta << " after " << iter << " iterations (residual " << res
                << ", damping history:";
            for (double d : sol.damping) msg << ' ' << d;
            msg << ')';
            fail(ErrorKind::NonConvergence, msg.str());
        }
        u1 = std::move(t1);
        u2 = std::move(t2);
        F = std::move(Ft);
        res = sup_norm(F);
        sol.damping.push_back(lambda);
        if (std::max(sup_norm(u1), sup_norm(u2)) > cfg.blowup)
            fail(ErrorKind::Blowup, "iterate norm exceeded " + std::to_string(cfg.blowup) + " at beta = " +
                                        std::to_string(beta));
    }
    if (res > std::max(cfg.tol, floor)) {
        std::ostringstream msg;
        msg << "coupled Newton did not converge at beta = " << beta << ": residual " << res << " after " << iter
            << " iterations (damping history:";
        for (double d : sol.damping) msg << ' ' << d;
        msg << ')';
        fail(ErrorKind::NonConvergence, msg.str());
    }
    sol.u1 = std::move(u1);
    sol.u2 = std::move(u2);
    sol.residual_sup = res;
    sol.newton_iterations = iter;
    sol.positivity_min = std::min(sol.u1.minCoeff(), sol.u2.minCoeff());
    if (sol.positivity_min < -cfg.positivity_tol) {
        std::ostringstream msg;
        msg << "coupled Newton converged to a sign-changing solution at beta = " << beta << " (min component "
            << sol.positivity_min << ')';
        fail(ErrorKind::WrongBranch, msg.str());
    }
    return sol;
}

std::shared_ptr<const PolarMesh> coupled_mesh(const LimitSolution& ls, double eps, const SolveConfig& cfg) {
    require(ls.gamma_ring > 0, ErrorKind::InvalidInput, "coupled meshes are graded around a fitted interface");
    const PolarMesh& m = *ls.mesh;
    const CutoffFamily c = CutoffFamily::make(cfg.K, eps);
    RadialGrading g;
    g.focus = m.r(ls.gamma_ring);
    g.h_fine = std::min(eps / cfg.layer_resolution, cfg.h_coarse);
    g.band = cfg.layer_width * c.eta;
    g.h_coarse = cfg.h_coarse;
    const int nt = cfg.radial_fast_path ? 1 : cfg.n_theta;
    return std::make_shared<const PolarMesh>(PolarMesh::make(m.kind(), m.r_inner(), m.r_outer(), nt, g));
}

namespace {

Vec transfer(const PolarMesh& from, const Vec& field, const PolarMesh& to) {
    Vec out(to.size());
    for (int k = 0; k < to.size(); ++k) out(k) = from.interpolate(field, to.node(k));
    return out;
}

ContinuationEntry solve_entry(const SolveConfig& cfg, const PipelineInputs& in, double beta,
                              const ContinuationEntry* previous, const ApproxPair* previous_ansatz,
                              ApproxPair* ansatz_out) {
    ContinuationEntry entry;
    entry.beta = beta;
    const LimitSolution& ls = *in.limit;
    const double eps = std::pow(beta, -0.25);
    try {
        auto mesh = coupled_mesh(ls, eps, cfg);
        ApproxPair ap = assemble(ls, *in.matching, *in.profile, beta, cfg.K, mesh);
        Vec u1 = ap.U1, u2 = ap.U2;
        if (previous && previous->ok && previous_ansatz) {
            const PolarMesh& old = *previous->solution.mesh;
            u1 += transfer(old, previous->solution.u1 - previous_ansatz->U1, *mesh);
            u2 += transfer(old, previous->solution.u2 - previous_ansatz->U2, *mesh);
        }
        const CoupledBoundary bc{ls.boundary};
        entry.solution = solve_coupled(mesh, *in.f, beta, u1, u2, bc, cfg);
        const Vec w_init = transfer(*ls.mesh, ls.w, *mesh);
        entry.w_reference = solve_limit(mesh, *in.f, w_init, ls.boundary, 1e-10).w;
        entry.ok = true;
        entry.total_iterations = entry.solution.newton_iterations;
        if (ansatz_out) *ansatz_out = std::move(ap);
    } catch (const std::exception& e) {
        entry.ok = false;
        entry.error = e.what();
    }
    return entry;
}

void descend(const SolveConfig& cfg, const PipelineInputs& in, const ContinuationEntry& from,
             ContinuationEntry& entry) {
    const LimitSolution& ls = *in.limit;
    const double beta = entry.beta;
    try {
        auto mesh = coupled_mesh(ls, std::pow(beta, -0.25), cfg);
        const CoupledBoundary bc{ls.boundary};
        Vec u1 = transfer(*from.solution.mesh, from.solution.u1, *mesh);
        Vec u2 = transfer(*from.solution.mesh, from.solution.u2, *mesh);
        double log_beta = std::log10(from.beta);
        double step = 1.0 / cfg.descent_steps_per_decade;
        const double target = std::log10(beta);
        int steps = 0, iterations = 0;
        CoupledSolution sol;
        while (true) {
            const double next = std::max(target, log_beta - step);
            try {
                sol = solve_coupled(mesh, *in.f, std::pow(10.0, next), u1, u2, bc, cfg);
            } catch (const Error&) {
                step *= 0.5;
                require(step > 1e-3, ErrorKind::NonConvergence,
                        "beta descent stalled at beta = " + std::to_string(std::pow(10.0, log_beta)));
                continue;
            }
            ++steps;
            iterations += sol.newton_iterations;
            u1 = sol.u1;
            u2 = sol.u2;
            log_beta = next;
            if (next <= target) break;
        }
        sol.beta = beta;
        entry.solution = std::move(sol);
        const Vec w_init = transfer(*ls.mesh, ls.w, *mesh);
        entry.w_reference = solve_limit(mesh, *in.f, w_init, ls.boundary, 1e-10).w;
        entry.descent_steps = steps;
        entry.total_iterations = iterations;
        entry.error = "recovered by beta descent from " + std::to_string(from.beta) + " after: " + entry.error;
        entry.ok = true;
    } catch (const std::exception& e) {
        entry.error += std::string("; beta descent failed: ") + e.what();
    }
}

}  // namespace

std::vector<ContinuationEntry> continuation_run(const SolveConfig& cfg, const PipelineInputs& in) {
    cfg.validate();
    require(in.limit && in.matching && in.profile && in.f, ErrorKind::InvalidInput, "continuation inputs missing");
    const size_t n = cfg.betas.size();
    std::vector<ContinuationEntry> out(n);
    if (cfg.warm_start) {
        ApproxPair previous_ansatz;
        for (size_t i = 0; i < n; ++i) {
            const ContinuationEntry* prev = i > 0 ? &out[i - 1] : nullptr;
            ApproxPair ap;
            out[i] = solve_entry(cfg, in, cfg.betas[i], prev, prev ? &previous_ansatz : nullptr, &ap);
            if (out[i].ok) previous_ansatz = std::move(ap);
        }
    } else {
        std::atomic<size_t> next{0};
        auto work = [&]() {
            for (size_t i = next++; i < n; i = next++)
                out[i] = solve_entry(cfg, in, cfg.betas[i], nullptr, nullptr, nullptr);
        };
        const int threads = std::min<int>(worker_threads(), static_cast<int>(n));
        std::vector<std::thread> pool;
        for (int t = 1; t < threads; ++t) pool.emplace_back(work);
        work();
        for (auto& th : pool) th.join();
    }
    if (cfg.descent_steps_per_decade > 0) {
        for (size_t i = n; i-- > 0;) {
            if (out[i].ok) continue;
            for (size_t j = i + 1; j < n; ++j) {
                if (!out[j].ok) continue;
                descend(cfg, in, out[j], out[i]);
                break;
            }
        }
    }
    return out;
}

}  // namespace phasesep
