#include "phasesep/pipeline.hpp"

#include "phasesep/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace phasesep {

bool RunReport::ok() const { return failure() == nullptr; }

const StageStatus* RunReport::failure() const {
    for (const auto& s : stages)
        if (s.status == "failed") return &s;
    return nullptr;
}

void RunReport::throw_if_failed() const {
    if (const StageStatus* s = failure()) {
        ErrorKind cause = ErrorKind::StageFailure;
        for (int k = 0; k <= static_cast<int>(ErrorKind::StageFailure); ++k)
            if (to_string(static_cast<ErrorKind>(k)) == s->error_kind) cause = static_cast<ErrorKind>(k);
        throw StageError(s->stage, cause, s->message);
    }
}

namespace {

const std::vector<std::string> kStageOrder{"profile", "limit", "match", "assemble", "solve", "rates"};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> dependencies(const std::string& stage) {
    if (stage == "match") return {"profile", "limit"};
    if (stage == "assemble") return {"match"};
    if (stage == "solve") return {"assemble"};
    if (stage == "rates") return {"solve"};
    return {};
}

Nonlinearity make_nonlinearity(const NonlinearitySpec& s) {
    if (s.kind == "zero") return Nonlinearity::zero();
    if (s.kind == "cubic") return Nonlinearity::cubic(s.lambda);
    if (s.kind == "linear") return Nonlinearity::linear(s.lambda);
    return Nonlinearity::table(s.table_u, s.table_f);
}

BoundaryFn make_boundary(const BoundarySpec& s) {
    if (s.kind == "log") {
        const double a = s.a, c = s.c;
        return [a, c](const Point2& p) { return a * std::log(std::hypot(p.x, p.y)) + c; };
    }
    return [](const Point2&) { return 0.0; };
}

double mean(const Vec& v) { return v.size() ? v.mean() : 0.0; }

/// Everything produced so far; later stages read from it.
struct State {
    const RunConfig& cfg;
    OutputDir& out;
    RunReport& report;
    Nonlinearity f;
    std::optional<ProfileSolution> profile;
    std::optional<ProfileW> W;
    std::optional<ProfileSampler> sampler;
    std::optional<LimitSolution> limit;
    Margins margins;
    std::optional<MatchingCoefficients> matching;
    std::vector<ContinuationEntry> entries;
};

void stage_profile(State& st) {
    const RunConfig& cfg = st.cfg;
    st.profile = solve_profile(cfg.profile_T, cfg.profile_n, cfg.profile_tol);
    st.W = solve_W(*st.profile, cfg.W_tol);
    st.sampler.emplace(*st.profile, *st.W);
    const ProfileSolution& p = *st.profile;
    ProfileSummary s;
    s.A = p.A;
    s.B = p.B;
    s.V1p0 = p.V1p0();
    s.phi_xi0 = phi_xi_weight(p)(p.grid.center());
    s.first_integral_drift = p.first_integral_drift();
    s.identity_gap = std::abs(p.A * p.A - (2.0 * s.V1p0 * s.V1p0 - 1.0));
    s.W_constant = st.W->C;
    s.sup_residual = p.sup_residual;
    s.newton_iterations = p.newton_iterations;
    st.report.profile = s;

    const Vec x = p.grid.nodes();
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<size_t>(x.size()));
    for (int j = 0; j < x.size(); ++j)
        rows.push_back({x(j), p.V1(j), p.V2(j), p.dV1(j), p.dV2(j), st.W->W1(j), st.W->W2(j)});
    st.out.write_csv("profile.csv", {"x", "V1", "V2", "dV1", "dV2", "W1", "W2"}, rows);
}

void stage_limit(State& st) {
    const RunConfig& cfg = st.cfg;
    const GeometrySpec& g = cfg.geometry;
    RadialGrading coarse;
    coarse.h_coarse = g.h_coarse;
    auto mesh = std::make_shared<const PolarMesh>(PolarMesh::make(g.kind, g.r_inner, g.r_outer, g.n_theta, coarse));
    const BoundaryFn bc = make_boundary(cfg.boundary);
    const Vec w_init = radial_initial_guess(*mesh, cfg.initial_amplitude, bc);
    const LimitSolution first = solve_limit(mesh, st.f, w_init, bc, cfg.limit_tol);
    RadialGrading fine = coarse;
    fine.h_fine = g.h_fine;
    fine.band = g.band;
    st.limit = fit_interface_mesh(first, st.f, fine, g.n_theta, cfg.limit_tol);
    const LimitSolution& ls = *st.limit;

    LimitSummary s;
    s.synthetic_potential = kNaN;
    if (cfg.synthetic_degenerate) {
        const auto [lo, hi] = ls.omega_rings(0);
        const BandOperator band(*ls.mesh, lo, hi);
        const double lambda1 = smallest_eigenvalue(band, Vec::Zero(ls.mesh->size()));
        s.synthetic_potential = lambda1;
        st.margins = nondegeneracy_margins(ls, Nonlinearity::linear(lambda1));
    } else {
        st.margins = nondegeneracy_margins(ls, st.f);
    }
    s.margins = st.margins;
    s.residual_sup = ls.residual_sup;
    s.newton_iterations = ls.newton_iterations;
    s.nodal_domains = nodal_domain_count(*ls.mesh, ls.w);
    const auto [rmean, rspread] = ls.gamma.radius_about({0.0, 0.0});
    s.radius_mean = rmean;
    s.radius_spread = rspread;
    s.omega_mean = mean(ls.omega);
    s.omega_spread = (ls.omega.maxCoeff() - ls.omega.minCoeff()) / s.omega_mean;
    s.radius_rel_error = cfg.oracle_radius > 0.0 ? std::abs(rmean / cfg.oracle_radius - 1.0) : kNaN;
    s.omega_rel_error = cfg.oracle_omega > 0.0 ? (ls.omega.array() / cfg.oracle_omega - 1.0).abs().maxCoeff() : kNaN;
    st.report.limit = s;

    const PolarMesh& m = *ls.mesh;
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<size_t>(m.size()));
    for (int k = 0; k < m.size(); ++k) {
        const Point2 p = m.node(k);
        rows.push_back({p.x, p.y, ls.w(k)});
    }
    st.out.write_csv("limit_field.csv", {"x", "y", "w"}, rows);
    const ClosedCurve& c = ls.gamma;
    rows.clear();
    for (int j = 0; j < c.size(); ++j) rows.push_back({c.s()(j), c.x()(j), c.y()(j), c.kappa()(j), ls.omega(j)});
    st.out.write_csv("interface.csv", {"s", "x", "y", "kappa", "omega"}, rows);
}

void stage_match(State& st) {
    const RunConfig& cfg = st.cfg;
    const LimitSolution& ls = *st.limit;
    MatchingContext ctx = make_matching_context(ls, st.f, st.margins, st.sampler->A(), st.sampler->B());
    MatchingOptions opt;
    opt.gmres_tol = cfg.gmres_tol;
    const MatchingOrder1 o1 = solve_matching_order1(ctx, opt);
    const MatchingOrder2 o2 = solve_matching_order2(ctx, o1, st.f, opt);
    st.matching = collect(ctx, o1, o2);
    const MatchingCoefficients& mc = *st.matching;

    MatchingSummary s;
    s.kappa = mc.kappa;
    s.b0_mean = mean(mc.b0);
    s.b1_mean = mean(mc.b1);
    s.b2_mean = mean(mc.b2);
    s.zeta1_mean = mean(mc.zeta1);
    s.zeta2_mean = mean(mc.zeta2);
    s.radial_spread = mc.radial_spread();
    s.gmres_iterations_order1 = o1.gmres_iterations;
    s.gmres_iterations_order2 = o2.gmres_iterations;
    s.dtn_symmetry_defect = std::max(dtn_symmetry_defect(*ctx.D[0], 8, cfg.seed),
                                     dtn_symmetry_defect(*ctx.D[1], 8, cfg.seed));

    const int nt = static_cast<int>(mc.b0.size());
    const int modes = nt == 1 ? cfg.spectral_modes : std::min(cfg.spectral_modes, nt / 8);
    if (modes > 0) {
        const Vec b = nt == 1 ? Vec::Constant(8 * modes, mc.b0(0)) : ring_to_curve(ls, mc.b0);
        const ModeBasis basis = eigenbasis(b, ls.gamma.length(), modes);
        std::vector<std::vector<double>> rows;
        for (int k = -modes; k <= modes; ++k) {
            s.mode_omegas.push_back(basis.omega(k));
            rows.push_back({static_cast<double>(k), basis.omega(k), k == 0 ? kNaN : basis.weyl_ratio(k)});
        }
        st.out.write_csv("interface_modes.csv", {"k", "omega", "weyl_ratio"}, rows);
    }
    st.report.matching = s;

    const PolarMesh& m = *ls.mesh;
    std::vector<std::vector<double>> rows;
    for (int j = 0; j < nt; ++j)
        rows.push_back({m.theta(j), mc.b0(j), mc.zeta1(j), mc.b1(j), mc.zeta2(j), mc.b2(j)});
    st.out.write_csv("matching.csv", {"theta", "b0", "zeta1", "b1", "zeta2", "b2"}, rows);
}

void stage_assemble(State& st) {
    const RunConfig& cfg = st.cfg;
    const double beta = cfg.assemble_beta;
    const double eps = std::pow(beta, -0.25);
    auto mesh = coupled_mesh(*st.limit, eps, cfg.solve);
    const ApproxPair ap = assemble(*st.limit, *st.matching, *st.sampler, beta, cfg.solve.K, mesh);
    const ResidualReport rr = residual(ap, st.f);
    AssembleSummary s;
    s.beta = beta;
    s.eps = eps;
    s.eta = ap.cutoff.eta;
    s.residual_inner = std::max(rr.sup[0][0], rr.sup[0][1]);
    s.residual_overlap = std::max(rr.sup[1][0], rr.sup[1][1]);
    s.residual_outer = std::max(rr.sup[2][0], rr.sup[2][1]);
    s.min_component = std::min(ap.U1.minCoeff(), ap.U2.minCoeff());
    st.report.assemble = s;

    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<size_t>(mesh->size()));
    for (int k = 0; k < mesh->size(); ++k) {
        const Point2 p = mesh->node(k);
        rows.push_back({p.x, p.y, ap.t(k), ap.U1(k), ap.U2(k), rr.E1(k), rr.E2(k)});
    }
    st.out.write_csv("ansatz.csv", {"x", "y", "t", "U1", "U2", "E1", "E2"}, rows);
}

void stage_solve(State& st) {
    const RunConfig& cfg = st.cfg;
    const LimitSolution& ls = *st.limit;
    const PipelineInputs in{&ls, &*st.matching, &*st.sampler, &st.f};
    st.entries = continuation_run(cfg.solve, in);
    const double r_gamma = ls.mesh->r(ls.gamma_ring);
    int converged = 0;
    std::string first_error;
    for (size_t e = 0; e < st.entries.size(); ++e) {
        const ContinuationEntry& entry = st.entries[e];
        SolveSummary s;
        s.beta = entry.beta;
        s.ok = entry.ok;
        s.error = entry.error;
        if (!entry.ok) {
            if (first_error.empty()) first_error = entry.error;
            st.report.solves.push_back(s);
            continue;
        }
        ++converged;
        const CoupledSolution& sol = entry.solution;
        const PolarMesh& m = *sol.mesh;
        s.newton_iterations = sol.newton_iterations;
        s.descent_steps = entry.descent_steps;
        s.residual_sup = sol.residual_sup;
        s.positivity_min = sol.positivity_min;
        s.overlap = overlap_integral(m, sol.u1, sol.u2);
        const double eta = CutoffFamily::make(cfg.solve.K, sol.eps).eta;
        std::vector<std::vector<double>> rows;
        rows.reserve(static_cast<size_t>(m.size()));
        for (int k = 0; k < m.size(); ++k) {
            const Point2 p = m.node(k);
            const double t = ls.positive_side * (std::hypot(p.x, p.y) - r_gamma);
            if (std::abs(t) > 4.0 * eta) s.segregation_sup = std::max(s.segregation_sup, sol.u1(k) * sol.u2(k));
            rows.push_back({p.x, p.y, sol.u1(k), sol.u2(k), entry.w_reference(k)});
        }
        st.out.write_csv("solution_" + std::to_string(e) + ".csv", {"x", "y", "u1", "u2", "w"}, rows);
        st.report.solves.push_back(s);
    }
    require(converged > 0, ErrorKind::NonConvergence, "no beta of the schedule converged: " + first_error);
}

void stage_rates(State& st) {
    const RunConfig& cfg = st.cfg;
    RateReport rep = error_report(st.entries, *st.limit, cfg.alpha, cfg.delta0, cfg.solve.K, cfg.seed);
    std::string label = format_double(cfg.alpha);
    label.erase(std::remove(label.begin(), label.end(), '.'), label.end());
    std::vector<std::vector<double>> rows;
    for (const auto& r : rep.rows)
        rows.push_back({r.beta, r.eps, r.sup_err, r.calpha_err, r.c2_compact_err, r.overlap,
                        static_cast<double>(r.newton_iterations)});
    st.out.write_csv("rates.csv",
                     {"beta", "eps", "sup_err", "calpha_" + label + "_err", "c2_compact_err", "overlap", "newton_iters"},
                     rows);
    st.report.rates = std::move(rep);
}

using nlohmann::ordered_json;

ordered_json margins_json(const Margins& m) {
    return {{"sigma1", m.sigma1},
            {"sigma2", m.sigma2},
            {"sigma_omega", m.sigma_omega},
            {"scale", m.scale},
            {"min_margin", m.min_margin()},
            {"degenerate", m.degenerate}};
}

ordered_json slope_json(const SlopeFit& f) {
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"half_width", f.half_width}};
}

}  // namespace

RunReport run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    std::vector<bool> wanted(kStageOrder.size(), false);
    auto want = [&](auto&& self, const std::string& stage) -> void {
        const auto pos = std::find(kStageOrder.begin(), kStageOrder.end(), stage) - kStageOrder.begin();
        if (wanted[static_cast<size_t>(pos)]) return;
        wanted[static_cast<size_t>(pos)] = true;
        for (const auto& d : dependencies(stage)) self(self, d);
    };
    for (const auto& s : cfg.stages) want(want, s);

    RunReport report;
    report.name = cfg.name;
    report.config_text = to_text(cfg);
    OutputDir out(cfg.output_dir);
    out.write_text("config.cfg", report.config_text);
    State st{cfg, out, report, make_nonlinearity(cfg.nonlinearity), {}, {}, {}, {}, {}, {}, {}};

    const std::vector<void (*)(State&)> runners{stage_profile, stage_limit,  stage_match,
                                                stage_assemble, stage_solve, stage_rates};
    for (size_t i = 0; i < kStageOrder.size(); ++i) {
        if (!wanted[i]) continue;
        StageStatus status;
        status.stage = kStageOrder[i];
        for (const auto& d : dependencies(status.stage)) {
            const auto it = std::find_if(report.stages.begin(), report.stages.end(),
                                         [&](const StageStatus& s) { return s.stage == d; });
            if (it == report.stages.end() || it->status != "ok") {
                status.status = "skipped";
                status.message = "dependency '" + d + "' did not complete";
            }
        }
        if (status.status.empty()) {
            const auto t0 = std::chrono::steady_clock::now();
            try {
                runners[i](st);
                status.status = "ok";
            } catch (const Error& e) {
                status.status = "failed";
                status.error_kind = std::string(to_string(e.kind()));
                status.message = e.what();
            } catch (const std::exception& e) {
                status.status = "failed";
                status.error_kind = std::string(to_string(ErrorKind::StageFailure));
                status.message = e.what();
            }
            status.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        report.stages.push_back(status);
    }
    report.manifest = out.manifest();
    std::ofstream(out.root() / "report.json") << to_json(report) << '\n';
    return report;
}

std::string to_json(const RunReport& r) {
    ordered_json j;
    j["name"] = r.name;
    j["ok"] = r.ok();
    ordered_json stages = ordered_json::array();
    for (const auto& s : r.stages)
        stages.push_back({{"stage", s.stage},
                          {"status", s.status},
                          {"error_kind", s.error_kind},
                          {"message", s.message},
                          {"seconds", s.seconds}});
    j["stages"] = stages;
    if (r.profile) {
        const auto& p = *r.profile;
        j["constants"] = {{"A", p.A},
                          {"A2", p.A * p.A},
                          {"B", p.B},
                          {"V1p0", p.V1p0},
                          {"V1p0_2", p.V1p0 * p.V1p0},
                          {"phi_xi0", p.phi_xi0},
                          {"first_integral_drift", p.first_integral_drift},
                          {"identity_gap", p.identity_gap},
                          {"W_constant", p.W_constant},
                          {"sup_residual", p.sup_residual},
                          {"newton_iterations", p.newton_iterations}};
    }
    if (r.limit) {
        const auto& l = *r.limit;
        j["limit"] = {{"residual_sup", l.residual_sup},
                      {"newton_iterations", l.newton_iterations},
                      {"nodal_domains", l.nodal_domains},
                      {"radius_mean", l.radius_mean},
                      {"radius_spread", l.radius_spread},
                      {"radius_rel_error", l.radius_rel_error},
                      {"omega_mean", l.omega_mean},
                      {"omega_spread", l.omega_spread},
                      {"omega_rel_error", l.omega_rel_error},
                      {"synthetic_potential", l.synthetic_potential}};
        j["margins"] = margins_json(l.margins);
    }
    if (r.matching) {
        const auto& m = *r.matching;
        j["matching"] = {{"kappa", m.kappa},
                         {"b0", m.b0_mean},
                         {"zeta1", m.zeta1_mean},
                         {"b1", m.b1_mean},
                         {"zeta2", m.zeta2_mean},
                         {"b2", m.b2_mean},
                         {"radial_spread", m.radial_spread},
                         {"gmres_iterations_order1", m.gmres_iterations_order1},
                         {"gmres_iterations_order2", m.gmres_iterations_order2},
                         {"dtn_symmetry_defect", m.dtn_symmetry_defect},
                         {"mode_omegas", m.mode_omegas}};
    }
    if (r.assemble) {
        const auto& a = *r.assemble;
        j["assemble"] = {{"beta", a.beta},
                         {"eps", a.eps},
                         {"eta", a.eta},
                         {"residual_inner", a.residual_inner},
                         {"residual_overlap", a.residual_overlap},
                         {"residual_outer", a.residual_outer},
                         {"min_component", a.min_component}};
    }
    if (!r.solves.empty()) {
        ordered_json solves = ordered_json::array();
        for (const auto& s : r.solves)
            solves.push_back({{"beta", s.beta},
                              {"ok", s.ok},
                              {"error", s.error},
                              {"newton_iterations", s.newton_iterations},
                              {"descent_steps", s.descent_steps},
                              {"residual_sup", s.residual_sup},
                              {"positivity_min", s.positivity_min},
                              {"overlap", s.overlap},
                              {"segregation_sup", s.segregation_sup}});
        j["solves"] = solves;
    }
    if (r.rates) {
        const auto& rr = *r.rates;
        j["rates"] = {{"alpha", rr.alpha},
                      {"delta0", rr.delta0},
                      {"sup_slope", slope_json(rr.sup_slope)},
                      {"calpha_slope", slope_json(rr.calpha_slope)},
                      {"c2_slope", slope_json(rr.c2_slope)},
                      {"overlap_decreasing", rr.overlap_decreasing}};
    }
    ordered_json files = ordered_json::array();
    for (const auto& e : r.manifest) files.push_back({{"path", e.path}, {"bytes", e.bytes}, {"sha256", e.sha256}});
    j["manifest"] = files;
    return j.dump(2);
}

Vec parse_weight_spec(const std::string& spec, double L, int samples) {
    require(samples > 0 && L > 0.0, ErrorKind::InvalidInput, "weight needs positive length and samples");
    const auto colon = spec.find(':');
    require(colon != std::string::npos, ErrorKind::ConfigError, "weight spec '" + spec + "' has no ':'");
    const std::string kind = spec.substr(0, colon);
    std::vector<double> args;
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            args.push_back(std::stod(item, &used));
            require(used == item.size(), ErrorKind::ConfigError, "bad number '" + item + "' in weight spec");
        } catch (const std::logic_error&) {
            fail(ErrorKind::ConfigError, "bad number '" + item + "' in weight spec");
        }
    }
    Vec b(samples);
    if (kind == "const") {
        require(args.size() == 1, ErrorKind::ConfigError, "const weight takes one value");
        b.setConstant(args[0]);
    } else if (kind == "cos") {
        require(args.size() == 3, ErrorKind::ConfigError, "cos weight takes c,a,m");
        for (int j = 0; j < samples; ++j)
            b(j) = args[0] + args[1] * std::cos(2.0 * std::numbers::pi * args[2] * j / samples);
    } else {
        fail(ErrorKind::ConfigError, "unknown weight kind '" + kind + "'");
    }
    return b;
}

ModeBasis run_spectrum(const std::string& weight_spec, double L, int K, int samples, OutputDir& out) {
    const Vec b = parse_weight_spec(weight_spec, L, samples);
    ModeBasis basis = eigenbasis(b, L, K);
    std::vector<std::vector<double>> rows;
    for (int k = -K; k <= K; ++k)
        rows.push_back({static_cast<double>(k), basis.omega(k), k == 0 ? kNaN : basis.weyl_ratio(k)});
    out.write_csv("spectrum.csv", {"k", "omega", "weyl_ratio"}, rows);
    return basis;
}

}  // namespace phasesep
