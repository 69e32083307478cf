#pragma once

#include "phasesep/coupled.hpp"

#include <map>
#include <string>
#include <vector>

namespace phasesep {

/// Flat key/value table read from `key = value` lines with dotted namespaces.
using KeyValues = std::map<std::string, std::string>;

/// Parses the config text. Blank lines and `#` comments are ignored; a repeated key keeps the
/// last value. Throws ConfigError on a line without `=`.
KeyValues parse_key_values(const std::string& text);

/// Text of a bundled config, or throws ConfigError for an unknown name.
const std::string& bundled_config(const std::string& name);
std::vector<std::string> bundled_config_names();

struct GeometrySpec {
    GeometryKind kind = GeometryKind::Disk;
    double r_inner = 0.0;
    double r_outer = 1.0;
    int n_theta = 1;
    /// Radial spacing of the limit mesh and, around the interface, of the fitted mesh.
    double h_coarse = 1.0 / 256.0;
    double h_fine = 1.0 / 2048.0;
    double band = 0.05;
};

struct BoundarySpec {
    /// "zero" or "log" (w = a ln r + c on the boundary rings).
    std::string kind = "zero";
    double a = 0.0;
    double c = 0.0;
};

struct NonlinearitySpec {
    /// "zero", "cubic", "linear" or "table".
    std::string kind = "cubic";
    double lambda = 40.0;
    std::vector<double> table_u, table_f;
};

/// Parsed and validated run configuration.
struct RunConfig {
    std::string name = "custom";
    /// Stages to run, in pipeline order: profile, limit, match, assemble, solve, rates.
    std::vector<std::string> stages{"profile", "limit", "match", "assemble", "solve", "rates"};
    GeometrySpec geometry;
    BoundarySpec boundary;
    NonlinearitySpec nonlinearity;
    double initial_amplitude = 0.8;
    double limit_tol = 1e-10;
    /// Replaces f_u by the first Dirichlet eigenvalue of {w > 0} in the margin computation.
    bool synthetic_degenerate = false;
    /// Closed-form interface radius for the omega comparison (<= 0: none).
    double oracle_radius = 0.0;
    /// Closed-form omega on the interface (<= 0: none).
    double oracle_omega = 0.0;

    double profile_T = 12.0;
    int profile_n = 2401;
    double profile_tol = 1e-10;
    double W_tol = 1e-8;

    double gmres_tol = 1e-12;
    int spectral_modes = 8;

    /// beta used by the standalone assemble stage.
    double assemble_beta = 1e4;
    SolveConfig solve;
    double alpha = 0.5;
    double delta0 = 0.2;

    std::string output_dir = "phasesep_out";
    unsigned seed = 42;

    /// Throws ConfigError on any invalid field.
    void validate() const;
};

/// Builds a config from key/values on top of the defaults. Unknown keys and unparsable
/// values throw ConfigError.
RunConfig make_run_config(const KeyValues& kv);

/// Reads `source` as a bundled config name or a file path, then applies `overrides`
/// (each `key=value`) in order.
RunConfig load_run_config(const std::string& source, const std::vector<std::string>& overrides);

/// Canonical `key = value` text of a config (parses back to the same config).
std::string to_text(const RunConfig& cfg);

}  // namespace phasesep
