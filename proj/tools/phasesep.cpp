#include "phasesep/error.hpp"
#include "phasesep/pipeline.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numbers>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct CommonOptions {
    std::string config = "disk_cubic_rates";
    std::vector<std::string> sets;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "Bundled config name or path to a key = value file")
        ->capture_default_str();
    cmd->add_option("--set", o.sets, "Override a config entry (key=value), repeatable");
    cmd->add_option("--out", o.out, "Output directory (overrides output.dir)");
}

int run_stages(const CommonOptions& o, std::vector<std::string> extra_sets, const std::string& stages) {
    std::vector<std::string> sets = o.sets;
    sets.insert(sets.end(), extra_sets.begin(), extra_sets.end());
    if (!stages.empty()) sets.push_back("stages=" + stages);
    if (!o.out.empty()) sets.push_back("output.dir=" + o.out);
    const phasesep::RunConfig cfg = phasesep::load_run_config(o.config, sets);
    const phasesep::RunReport report = phasesep::run_pipeline(cfg);
    std::cout << phasesep::to_json(report) << '\n';
    if (const auto* f = report.failure()) {
        std::cerr << "stage '" << f->stage << "' failed (" << f->error_kind << "): " << f->message << '\n';
        return kExitStage;
    }
    return kExitOk;
}

std::string fmt(double v) { return phasesep::format_double(v); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Segregated-limit pipeline for two-component elliptic systems with strong repulsion"};
    app.require_subcommand(1);

    CommonOptions common;
    double profile_T = 12.0;
    int profile_n = 2401;
    auto* profile = app.add_subcommand("profile", "Solve the 1D profile system and report its constants");
    add_common(profile, common);
    profile->add_option("--T", profile_T, "Half-length of the truncated line")->capture_default_str();
    profile->add_option("--n", profile_n, "Number of grid nodes (odd)")->capture_default_str();

    std::string weight = "const:1";
    double length = 2.0 * std::numbers::pi;
    int modes = 32;
    int samples = 0;
    std::string spectrum_out = "phasesep_out";
    auto* spectrum = app.add_subcommand("spectrum", "Eigenpairs of -psi'' = omega^2 b^2 psi on a closed curve");
    spectrum->add_option("--b", weight, "Weight: const:c or cos:c,a,m")->capture_default_str();
    spectrum->add_option("--L", length, "Curve length")->capture_default_str();
    spectrum->add_option("--K", modes, "Largest mode index")->capture_default_str();
    spectrum->add_option("--N", samples, "Samples along the curve (default max(8K, 256))");
    spectrum->add_option("--out", spectrum_out, "Output directory")->capture_default_str();

    const std::map<std::string, std::string> staged{
        {"limit", "Solve the segregated limit problem and its nondegeneracy margins"},
        {"match", "Solve the interface matching conditions"},
        {"assemble", "Assemble the approximate solution at assemble.beta"},
        {"solve", "Solve the coupled system along the beta schedule"},
        {"rates", "Solve the schedule and fit the convergence rates"},
        {"run", "Run the stages listed in the config"},
    };
    std::map<std::string, CLI::App*> staged_cmds;
    for (const auto& [name, help] : staged) {
        staged_cmds[name] = app.add_subcommand(name, help);
        add_common(staged_cmds[name], common);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*profile) {
            return run_stages(common, {"profile.T=" + fmt(profile_T), "profile.n=" + std::to_string(profile_n)},
                              "profile");
        }
        if (*spectrum) {
            const int n = samples > 0 ? samples : std::max(8 * modes, 256);
            phasesep::OutputDir out(spectrum_out);
            const phasesep::ModeBasis basis = phasesep::run_spectrum(weight, length, modes, n, out);
            std::cout << "k,omega,weyl_ratio\n";
            for (int k = -modes; k <= modes; ++k)
                std::cout << k << ',' << fmt(basis.omega(k)) << ',' << (k == 0 ? "nan" : fmt(basis.weyl_ratio(k)))
                          << '\n';
            return kExitOk;
        }
        for (const auto& [name, cmd] : staged_cmds)
            if (*cmd) return run_stages(common, {}, name == "run" ? "" : name);
    } catch (const phasesep::Error& e) {
        std::cerr << e.what() << '\n';
        return e.kind() == phasesep::ErrorKind::ConfigError ? kExitConfig : kExitStage;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kExitStage;
    }
    return kExitOk;
}
