#pragma once

#include "phasesep/config.hpp"
#include "phasesep/io.hpp"
#include "phasesep/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace phasesep {

struct StageStatus {
    std::string stage;
    /// "ok", "failed" or "skipped".
    std::string status;
    std::string error_kind;
    std::string message;
    double seconds = 0.0;
};

struct ProfileSummary {
    double A = 0.0, B = 0.0;
    double V1p0 = 0.0;
    double phi_xi0 = 0.0;
    double first_integral_drift = 0.0;
    /// |A^2 - (2 V1'(0)^2 - 1)|.
    double identity_gap = 0.0;
    double W_constant = 0.0;
    double sup_residual = 0.0;
    int newton_iterations = 0;
};

struct LimitSummary {
    double residual_sup = 0.0;
    int newton_iterations = 0;
    int nodal_domains = 0;
    double radius_mean = 0.0;
    /// max - min distance of the curve samples from the origin.
    double radius_spread = 0.0;
    double omega_mean = 0.0;
    /// (max - min) / mean of omega along the curve.
    double omega_spread = 0.0;
    /// Relative errors against the config oracles (NaN when no oracle is set).
    double radius_rel_error = 0.0;
    double omega_rel_error = 0.0;
    Margins margins;
    /// Constant potential used for the margins in the synthetic degenerate case (NaN otherwise).
    double synthetic_potential = 0.0;
};

struct MatchingSummary {
    double kappa = 0.0;
    double b0_mean = 0.0, b1_mean = 0.0, b2_mean = 0.0;
    double zeta1_mean = 0.0, zeta2_mean = 0.0;
    double radial_spread = 0.0;
    int gmres_iterations_order1 = 0;
    int gmres_iterations_order2 = 0;
    double dtn_symmetry_defect = 0.0;
    /// Spectral data of b0 along the interface (empty when the stage was not run).
    std::vector<double> mode_omegas;
};

struct AssembleSummary {
    double beta = 0.0, eps = 0.0, eta = 0.0;
    double residual_inner = 0.0, residual_overlap = 0.0, residual_outer = 0.0;
    double min_component = 0.0;
};

struct SolveSummary {
    double beta = 0.0;
    bool ok = false;
    std::string error;
    int newton_iterations = 0;
    int descent_steps = 0;
    double residual_sup = 0.0;
    double positivity_min = 0.0;
    double overlap = 0.0;
    /// sup u1 u2 over {|t| > 4 eta}.
    double segregation_sup = 0.0;
};

struct RunReport {
    std::string name;
    std::string config_text;
    std::vector<StageStatus> stages;
    std::optional<ProfileSummary> profile;
    std::optional<LimitSummary> limit;
    std::optional<MatchingSummary> matching;
    std::optional<AssembleSummary> assemble;
    std::vector<SolveSummary> solves;
    std::optional<RateReport> rates;
    /// Files written to the output directory other than report.json itself.
    std::vector<ManifestEntry> manifest;

    bool ok() const;
    /// The first failed stage, if any.
    const StageStatus* failure() const;
    /// Throws StageError for the first failed stage.
    void throw_if_failed() const;
};

/// Runs the configured stages plus everything they depend on, in pipeline order, writing the
/// artifacts and report.json into cfg.output_dir. A failed stage marks its dependents as
/// skipped; the partial report is still written. Throws ConfigError for an invalid config.
RunReport run_pipeline(const RunConfig& cfg);

/// JSON text of a report (stable key order).
std::string to_json(const RunReport& report);

/// Weight spec for the spectrum command: `const:c` or `cos:c,a,m` (c + a cos(2 pi m s / L)).
Vec parse_weight_spec(const std::string& spec, double L, int samples);

/// Writes spectrum.csv (k, omega_k, weyl_ratio) for the weight on a curve of length L and
/// returns the basis.
ModeBasis run_spectrum(const std::string& weight_spec, double L, int K, int samples, OutputDir& out);

}  // namespace phasesep
