#pragma once

#include "phasesep/assembler.hpp"
#include "phasesep/dtn.hpp"
#include "phasesep/profile1d.hpp"
#include "phasesep/scalar_limit.hpp"

#include <memory>
#include <string>
#include <vector>

namespace phasesep {

/// Quantity whose decrease accepts a damped Newton step.
enum class DampingMerit {
    /// ||F(u)||_2.
    Residual,
    /// ||J(u_k)^{-1} F(u)||_2 with the Jacobian frozen at the current iterate.
    NewtonScaled,
};

struct SolveConfig {
    std::vector<double> betas{1e3, 1e4, 1e5, 1e6, 1e7};
    double tol = 1e-8;
    int max_iterations = 50;
    int max_halvings = 30;
    double blowup = 1e6;
    DampingMerit damping_merit = DampingMerit::NewtonScaled;
    /// Converged iterates with a component below -positivity_tol raise WrongBranch.
    double positivity_tol = 1e-10;
    /// Entries that fail from the assembled guess are retried by descending in beta from the
    /// nearest larger converged entry, at most this many log10 steps per decade.
    int descent_steps_per_decade = 4;
    bool radial_fast_path = true;
    /// Angular resolution of the 2D path.
    int n_theta = 32;
    double K = 0.3;
    /// Interface-layer spacing eps / layer_resolution inside |t| <= layer_width * eta.
    double layer_resolution = 16.0;
    double layer_width = 4.0;
    /// Bulk radial spacing of the coupled meshes.
    double h_coarse = 1.0 / 256.0;
    bool warm_start = true;

    /// Throws ConfigError unless the schedule is increasing, beta > 1 and tol > 0.
    void validate() const;
};

struct CoupledSolution {
    double beta = 0.0;
    double eps = 0.0;
    std::shared_ptr<const PolarMesh> mesh;
    Vec u1, u2;
    double residual_sup = 0.0;
    int newton_iterations = 0;
    /// min over both components (negativity is reported, never clipped in the iteration).
    double positivity_min = 0.0;
    /// Step lengths accepted by the line search, one per iteration.
    std::vector<double> damping;
};

/// Dirichlet data of the two components: (max(g, 0), max(-g, 0)) for the limit boundary data g.
struct CoupledBoundary {
    BoundaryFn g;
    double u1(const Point2& x) const { return g ? std::max(g(x), 0.0) : 0.0; }
    double u2(const Point2& x) const { return g ? std::max(-g(x), 0.0) : 0.0; }
};

/// Damped Newton for -Delta u_i = f(u_i) - beta u_i u_j^2 on the mesh with Dirichlet rings.
CoupledSolution solve_coupled(std::shared_ptr<const PolarMesh> mesh, const Nonlinearity& f, double beta,
                              const Vec& u1_init, const Vec& u2_init, const CoupledBoundary& boundary,
                              const SolveConfig& cfg);

/// Residual fields (-Delta u1 - f(u1) + beta u1 u2^2, ...) at the unknown nodes (zero elsewhere).
std::pair<Vec, Vec> coupled_residual(const PolarMesh& mesh, const Nonlinearity& f, double beta, const Vec& u1,
                                     const Vec& u2);

/// Everything the continuation needs from the upstream stages.
struct PipelineInputs {
    const LimitSolution* limit = nullptr;
    const MatchingCoefficients* matching = nullptr;
    const ProfileSampler* profile = nullptr;
    const Nonlinearity* f = nullptr;
};

/// Coupled mesh for one beta: layer spacing eps / layer_resolution on |t| <= layer_width * eta.
std::shared_ptr<const PolarMesh> coupled_mesh(const LimitSolution& ls, double eps, const SolveConfig& cfg);

struct ContinuationEntry {
    double beta = 0.0;
    bool ok = false;
    std::string error;
    CoupledSolution solution;
    /// Limit solution re-solved on the same mesh (reference for the error metrics).
    Vec w_reference;
    /// Number of intermediate beta solves when the entry was recovered by descent (0 otherwise).
    int descent_steps = 0;
    /// Newton iterations summed over the descent path, including the final solve.
    int total_iterations = 0;
};

/// Solves every beta of the schedule, warm-starting from the previous converged solution
/// through u_init = assemble(beta_new) + (u_old - assemble(beta_old)). A failed entry is
/// recorded and the next one starts from fresh assembly. Without warm start the entries are
/// independent and run on up to PHASESEP_THREADS threads. A failed entry below a converged one
/// is then retried by descending in beta on its own mesh, starting from the converged solution.
std::vector<ContinuationEntry> continuation_run(const SolveConfig& cfg, const PipelineInputs& in);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// 95% half-width from the residual standard error (Student t).
    double half_width = 0.0;
};

/// Least-squares fit of log y against log x.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct RateRow {
    double beta = 0.0;
    double eps = 0.0;
    double sup_err = 0.0;
    double calpha_err = 0.0;
    double c2_compact_err = 0.0;
    double overlap = 0.0;
    int newton_iterations = 0;
};

struct RateReport {
    double alpha = 0.5;
    double delta0 = 0.2;
    std::vector<RateRow> rows;
    SlopeFit sup_slope, calpha_slope, c2_slope;
    bool overlap_decreasing = false;
};

/// sup_i max |u_i - w0_i|.
double sup_error(const PolarMesh& mesh, const Vec& u1, const Vec& u2, const Vec& w);
/// Discrete C^alpha norm sup|e| + [e]_alpha with the seminorm sampled over `pairs` node pairs at
/// log-uniform separations in [2 h_min, diam / 10] (seeded, stratified by separation decade).
double holder_error(const PolarMesh& mesh, const Vec& e, double alpha, int pairs = 100000, unsigned seed = 42);
/// Sup of the polar second differences of e over nodes with |t| >= delta0.
double c2_compact_error(const PolarMesh& mesh, const Vec& e, const Vec& t, double delta0);
double overlap_integral(const PolarMesh& mesh, const Vec& u1, const Vec& u2);

/// Needs at least four converged entries; delta0 must exceed 2 eta at the largest eps.
RateReport error_report(const std::vector<ContinuationEntry>& entries, const LimitSolution& ls, double alpha,
                        double delta0, double K, unsigned seed = 42);

/// Worker count from PHASESEP_THREADS (default: hardware concurrency, at least 1).
int worker_threads();

}  // namespace phasesep
