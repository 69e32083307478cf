#include "phasesep/config.hpp"

#include "phasesep/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace phasesep {

namespace detail {
/// Generated at configure time from configs/*.cfg.
extern const std::map<std::string, std::string>& bundled_configs();
}  // namespace detail

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    require(ec == std::errc() && ptr == v.data() + v.size(), ErrorKind::ConfigError,
            "key '" + key + "': '" + v + "' is not a number");
    return out;
}

int parse_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    require(ec == std::errc() && ptr == v.data() + v.size(), ErrorKind::ConfigError,
            "key '" + key + "': '" + v + "' is not an integer");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(ErrorKind::ConfigError, "key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

struct Field {
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define PHASESEP_DOUBLE(KEY, MEMBER)                                                         \
    Field {                                                                                  \
        KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_double(KEY, v); },     \
            [](const RunConfig& c) { return fmt(c.MEMBER); }                                 \
    }
#define PHASESEP_INT(KEY, MEMBER)                                                            \
    Field {                                                                                  \
        KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_int(KEY, v); },        \
            [](const RunConfig& c) { return std::to_string(c.MEMBER); }                      \
    }
#define PHASESEP_BOOL(KEY, MEMBER)                                                           \
    Field {                                                                                  \
        KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_bool(KEY, v); },       \
            [](const RunConfig& c) { return std::string(c.MEMBER ? "true" : "false"); }      \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"name", [](RunConfig& c, const std::string& v) { c.name = v; }, [](const RunConfig& c) { return c.name; }},
        {"stages",
         [](RunConfig& c, const std::string& v) {
             c.stages.clear();
             std::stringstream ss(v);
             std::string item;
             while (std::getline(ss, item, ',')) {
                 item = trim(item);
                 if (!item.empty()) c.stages.push_back(item);
             }
         },
         [](const RunConfig& c) {
             std::string out;
             for (size_t i = 0; i < c.stages.size(); ++i) out += (i ? ", " : "") + c.stages[i];
             return out;
         }},
        {"geometry.kind",
         [](RunConfig& c, const std::string& v) {
             if (v == "disk")
                 c.geometry.kind = GeometryKind::Disk;
             else if (v == "annulus")
                 c.geometry.kind = GeometryKind::Annulus;
             else
                 fail(ErrorKind::ConfigError, "geometry.kind must be disk or annulus, got '" + v + "'");
         },
         [](const RunConfig& c) {
             return std::string(c.geometry.kind == GeometryKind::Disk ? "disk" : "annulus");
         }},
        PHASESEP_DOUBLE("geometry.r_inner", geometry.r_inner),
        PHASESEP_DOUBLE("geometry.r_outer", geometry.r_outer),
        PHASESEP_INT("geometry.n_theta", geometry.n_theta),
        PHASESEP_DOUBLE("geometry.h_coarse", geometry.h_coarse),
        PHASESEP_DOUBLE("geometry.h_fine", geometry.h_fine),
        PHASESEP_DOUBLE("geometry.band", geometry.band),
        {"boundary.kind", [](RunConfig& c, const std::string& v) { c.boundary.kind = v; },
         [](const RunConfig& c) { return c.boundary.kind; }},
        PHASESEP_DOUBLE("boundary.a", boundary.a),
        PHASESEP_DOUBLE("boundary.c", boundary.c),
        {"nonlinearity.kind", [](RunConfig& c, const std::string& v) { c.nonlinearity.kind = v; },
         [](const RunConfig& c) { return c.nonlinearity.kind; }},
        PHASESEP_DOUBLE("nonlinearity.lambda", nonlinearity.lambda),
        {"nonlinearity.table_u",
         [](RunConfig& c, const std::string& v) { c.nonlinearity.table_u = parse_list("nonlinearity.table_u", v); },
         [](const RunConfig& c) { return fmt_list(c.nonlinearity.table_u); }},
        {"nonlinearity.table_f",
         [](RunConfig& c, const std::string& v) { c.nonlinearity.table_f = parse_list("nonlinearity.table_f", v); },
         [](const RunConfig& c) { return fmt_list(c.nonlinearity.table_f); }},
        PHASESEP_DOUBLE("limit.initial_amplitude", initial_amplitude),
        PHASESEP_DOUBLE("limit.tol", limit_tol),
        PHASESEP_BOOL("limit.synthetic_degenerate", synthetic_degenerate),
        PHASESEP_DOUBLE("oracle.radius", oracle_radius),
        PHASESEP_DOUBLE("oracle.omega", oracle_omega),
        PHASESEP_DOUBLE("profile.T", profile_T),
        PHASESEP_INT("profile.n", profile_n),
        PHASESEP_DOUBLE("profile.tol", profile_tol),
        PHASESEP_DOUBLE("profile.W_tol", W_tol),
        PHASESEP_DOUBLE("matching.gmres_tol", gmres_tol),
        PHASESEP_INT("matching.spectral_modes", spectral_modes),
        PHASESEP_DOUBLE("assemble.beta", assemble_beta),
        {"solve.betas", [](RunConfig& c, const std::string& v) { c.solve.betas = parse_list("solve.betas", v); },
         [](const RunConfig& c) { return fmt_list(c.solve.betas); }},
        PHASESEP_DOUBLE("solve.tol", solve.tol),
        PHASESEP_INT("solve.max_iterations", solve.max_iterations),
        PHASESEP_INT("solve.max_halvings", solve.max_halvings),
        PHASESEP_BOOL("solve.radial", solve.radial_fast_path),
        PHASESEP_INT("solve.n_theta", solve.n_theta),
        PHASESEP_DOUBLE("solve.K", solve.K),
        PHASESEP_DOUBLE("solve.layer_resolution", solve.layer_resolution),
        PHASESEP_DOUBLE("solve.layer_width", solve.layer_width),
        PHASESEP_DOUBLE("solve.h_coarse", solve.h_coarse),
        PHASESEP_BOOL("solve.warm_start", solve.warm_start),
        PHASESEP_INT("solve.descent_steps_per_decade", solve.descent_steps_per_decade),
        {"solve.damping",
         [](RunConfig& c, const std::string& v) {
             if (v == "residual")
                 c.solve.damping_merit = DampingMerit::Residual;
             else if (v == "newton_scaled")
                 c.solve.damping_merit = DampingMerit::NewtonScaled;
             else
                 fail(ErrorKind::ConfigError, "solve.damping must be residual or newton_scaled, got '" + v + "'");
         },
         [](const RunConfig& c) {
             return std::string(c.solve.damping_merit == DampingMerit::Residual ? "residual" : "newton_scaled");
         }},
        PHASESEP_DOUBLE("rates.alpha", alpha),
        PHASESEP_DOUBLE("rates.delta0", delta0),
        {"output.dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
         [](const RunConfig& c) { return c.output_dir; }},
        {"seed",
         [](RunConfig& c, const std::string& v) {
             const int s = parse_int("seed", v);
             require(s >= 0, ErrorKind::ConfigError, "seed must be non-negative");
             c.seed = static_cast<unsigned>(s);
         },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
    };
    return table;
}

#undef PHASESEP_DOUBLE
#undef PHASESEP_INT
#undef PHASESEP_BOOL

const Field& field(const std::string& key) {
    for (const auto& f : fields())
        if (f.key == key) return f;
    fail(ErrorKind::ConfigError, "unknown config key '" + key + "'");
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorKind::ConfigError,
                "line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        require(!key.empty(), ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

const std::string& bundled_config(const std::string& name) {
    const auto& all = detail::bundled_configs();
    const auto it = all.find(name);
    require(it != all.end(), ErrorKind::ConfigError, "no bundled config named '" + name + "'");
    return it->second;
}

std::vector<std::string> bundled_config_names() {
    std::vector<std::string> out;
    for (const auto& [name, text] : detail::bundled_configs()) out.push_back(name);
    return out;
}

void RunConfig::validate() const {
    const auto& g = geometry;
    if (g.kind == GeometryKind::Disk) {
        require(g.r_inner == 0.0, ErrorKind::ConfigError, "a disk has geometry.r_inner = 0");
    } else {
        require(g.r_inner > 0.0, ErrorKind::ConfigError, "an annulus needs geometry.r_inner > 0");
    }
    require(g.r_outer > g.r_inner, ErrorKind::ConfigError, "geometry.r_outer must exceed geometry.r_inner");
    require(g.n_theta >= 1, ErrorKind::ConfigError, "geometry.n_theta must be at least 1");
    require(g.h_coarse > 0.0 && g.h_fine > 0.0 && g.band > 0.0, ErrorKind::ConfigError,
            "geometry spacings must be positive");
    require(boundary.kind == "zero" || boundary.kind == "log", ErrorKind::ConfigError,
            "boundary.kind must be zero or log");
    const auto& nl = nonlinearity;
    if (nl.kind == "cubic") {
        require(nl.lambda > 0.0, ErrorKind::ConfigError, "nonlinearity.lambda must be positive");
    } else if (nl.kind == "table") {
        require(nl.table_u.size() >= 2 && nl.table_u.size() == nl.table_f.size(), ErrorKind::ConfigError,
                "nonlinearity table needs matching lists of at least two values");
    } else {
        require(nl.kind == "zero" || nl.kind == "linear", ErrorKind::ConfigError,
                "nonlinearity.kind must be zero, cubic, linear or table");
    }
    require(initial_amplitude > 0.0 && limit_tol > 0.0, ErrorKind::ConfigError,
            "limit.initial_amplitude and limit.tol must be positive");
    require(profile_T > 0.0 && profile_n >= 101 && profile_n % 2 == 1, ErrorKind::ConfigError,
            "profile.T must be positive and profile.n odd and at least 101");
    require(profile_tol > 0.0 && W_tol > 0.0 && gmres_tol > 0.0, ErrorKind::ConfigError,
            "tolerances must be positive");
    require(spectral_modes >= 0, ErrorKind::ConfigError, "matching.spectral_modes must be non-negative");
    require(assemble_beta > 1.0, ErrorKind::ConfigError, "assemble.beta must exceed 1");
    require(alpha >= 0.0 && alpha < 1.0, ErrorKind::ConfigError, "rates.alpha must lie in [0, 1)");
    require(delta0 > 0.0, ErrorKind::ConfigError, "rates.delta0 must be positive");
    static const std::vector<std::string> known{"profile", "limit", "match", "assemble", "solve", "rates"};
    require(!stages.empty(), ErrorKind::ConfigError, "stages must not be empty");
    for (const auto& s : stages)
        require(std::find(known.begin(), known.end(), s) != known.end(), ErrorKind::ConfigError,
                "unknown stage '" + s + "'");
    require(!output_dir.empty(), ErrorKind::ConfigError, "output.dir must not be empty");
    solve.validate();
}

RunConfig make_run_config(const KeyValues& kv) {
    RunConfig cfg;
    for (const auto& [key, value] : kv) field(key).set(cfg, value);
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& source, const std::vector<std::string>& overrides) {
    std::string text;
    const auto& all = detail::bundled_configs();
    if (const auto it = all.find(source); it != all.end()) {
        text = it->second;
    } else {
        std::ifstream in(source);
        require(in.good(), ErrorKind::ConfigError, "cannot read config '" + source + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    KeyValues kv = parse_key_values(text);
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        require(eq != std::string::npos, ErrorKind::ConfigError, "override '" + o + "' is not key=value");
        kv[trim(o.substr(0, eq))] = trim(o.substr(eq + 1));
    }
    return make_run_config(kv);
}

std::string to_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) {
        const std::string v = f.get(cfg);
        if (v.empty()) continue;
        out += f.key + " = " + v + "\n";
    }
    return out;
}

}  // namespace phasesep
