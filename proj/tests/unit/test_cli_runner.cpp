#include "phasesep/error.hpp"
#include "phasesep/pipeline.hpp"

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace phasesep;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(PHASESEP_TEST_TMP) / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliResult {
    int exit_code;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(PHASESEP_CLI) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

RunConfig config_in(const std::string& name, const fs::path& dir, std::vector<std::string> sets = {}) {
    sets.push_back("output.dir=" + dir.string());
    return load_run_config(name, sets);
}

}  // namespace

TEST_CASE("key = value parsing", "[cli_runner]") {
    const KeyValues kv = parse_key_values("# comment\n\n a.b = 1 \nname=x # trailing\na.b = 2\n");
    CHECK(kv.size() == 2);
    CHECK(kv.at("a.b") == "2");
    CHECK(kv.at("name") == "x");
    try {
        parse_key_values("valid = 1\nno equals sign\n");
        FAIL("line without '=' accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
    }
}

TEST_CASE("bundled configs load and round-trip", "[cli_runner]") {
    const auto names = bundled_config_names();
    for (const char* n : {"annulus_harmonic", "annulus_degenerate", "disk_cubic_rates", "disk_cubic_2d"})
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
    for (const auto& n : names) {
        INFO(n);
        const RunConfig cfg = load_run_config(n, {});
        CHECK_NOTHROW(cfg.validate());
        CHECK(cfg.seed == 42u);
        CHECK(to_text(make_run_config(parse_key_values(to_text(cfg)))) == to_text(cfg));
    }
    const RunConfig rates = load_run_config("disk_cubic_rates", {"solve.K=0.25", "rates.alpha=0.25"});
    CHECK(rates.solve.K == 0.25);
    CHECK(rates.alpha == 0.25);
    CHECK(rates.solve.betas.size() == 5);
    CHECK_THROWS_AS(load_run_config("no_such_config", {}), Error);
}

TEST_CASE("invalid configs are rejected before any compute", "[cli_runner]") {
    const fs::path dir = scratch("invalid");
    for (const char* bad : {"solve.betas=-1000", "solve.betas=1e4, 1e3", "geometry.r_outer=-1", "profile.n=800",
                            "nonlinearity.kind=quartic", "no.such.key=1", "solve.tol=abc"}) {
        INFO(bad);
        try {
            run_pipeline(config_in("disk_cubic_rates", dir, {bad}));
            FAIL("invalid config accepted");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ConfigError);
        }
    }
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("annulus pipeline reports the closed-form comparison", "[cli_runner]") {
    const fs::path dir = scratch("annulus");
    const RunReport r = run_pipeline(config_in("annulus_harmonic", dir));
    REQUIRE(r.ok());
    REQUIRE(r.limit);
    CHECK(r.limit->omega_rel_error <= 1e-4);
    CHECK(r.limit->radius_rel_error <= 1e-4);
    CHECK(r.limit->margins.sigma1 > 0.1);
    CHECK(r.limit->margins.sigma2 > 0.1);
    REQUIRE(r.solves.size() == 1);
    CHECK(r.solves[0].segregation_sup <= 1e-3);
    CHECK_FALSE(r.rates.has_value());
}

TEST_CASE("manifest lists every emitted file with its checksum", "[cli_runner]") {
    const fs::path dir = scratch("manifest");
    const RunReport r = run_pipeline(config_in("disk_cubic_rates", dir));
    REQUIRE(r.ok());
    std::set<std::string> listed;
    for (const auto& m : r.manifest) {
        INFO(m.path);
        listed.insert(m.path);
        const fs::path p = dir / m.path;
        REQUIRE(fs::exists(p));
        CHECK(fs::file_size(p) == m.bytes);
        CHECK(sha256_file(p) == m.sha256);
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name != "report.json") CHECK(listed.count(name) == 1);
    }
    const auto json = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(json["manifest"].size() == r.manifest.size());
    CHECK(json["name"] == "disk_cubic_rates");

    REQUIRE(r.rates);
    CHECK_THAT(r.rates->sup_slope.slope, WithinAbs(-0.25, 0.05));
    CHECK(r.rates->overlap_decreasing);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("rate CSV is byte-identical across runs", "[cli_runner]") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const RunReport ra = run_pipeline(config_in("disk_cubic_rates", a));
    const RunReport rb = run_pipeline(config_in("disk_cubic_rates", b));
    REQUIRE(ra.ok());
    REQUIRE(ra.manifest.size() == rb.manifest.size());
    // config.cfg records the output directory and so differs between the two runs.
    for (size_t i = 0; i < ra.manifest.size(); ++i) {
        INFO(ra.manifest[i].path);
        if (ra.manifest[i].path == "config.cfg") continue;
        CHECK(ra.manifest[i].sha256 == rb.manifest[i].sha256);
    }
    CHECK(slurp(a / "rates.csv") == slurp(b / "rates.csv"));
}

TEST_CASE("a failed stage skips its dependents and keeps a partial report", "[cli_runner]") {
    const fs::path dir = scratch("degenerate");
    const RunReport r = run_pipeline(config_in("annulus_degenerate", dir, {"stages=profile, limit, match, solve"}));
    CHECK_FALSE(r.ok());
    REQUIRE(r.failure() != nullptr);
    CHECK(r.failure()->stage == "match");
    CHECK(r.failure()->error_kind == "SingularOperator");
    for (const auto& s : r.stages) {
        if (s.stage == "profile" || s.stage == "limit") CHECK(s.status == "ok");
        if (s.stage == "assemble" || s.stage == "solve") CHECK(s.status == "skipped");
    }
    CHECK(fs::exists(dir / "report.json"));
    try {
        r.throw_if_failed();
        FAIL("failed report did not throw");
    } catch (const StageError& e) {
        CHECK(e.kind() == ErrorKind::StageFailure);
        CHECK(e.stage() == "match");
        CHECK(e.cause() == ErrorKind::SingularOperator);
    }
}

TEST_CASE("weight specs", "[cli_runner]") {
    const Vec c = parse_weight_spec("const:2.5", 1.0, 16);
    CHECK((c.array() - 2.5).abs().maxCoeff() == 0.0);
    const Vec w = parse_weight_spec("cos:1,0.25,2", 4.0, 8);
    CHECK_THAT(w(0), WithinAbs(1.25, 1e-15));
    CHECK_THAT(w(2), WithinAbs(0.75, 1e-15));
    CHECK_THROWS_AS(parse_weight_spec("sawtooth:1", 1.0, 8), Error);
}

TEST_CASE("command line exit codes and outputs", "[cli_runner]") {
    const fs::path root = scratch("cli");
    fs::create_directories(root);

    const CliResult prof = run_cli("profile --T 12 --n 2401 --out " + (root / "profile").string());
    CHECK(prof.exit_code == 0);
    const auto pj = nlohmann::json::parse(prof.out);
    CHECK_THAT(pj["constants"]["A"].get<double>(), WithinRel(1.8868343035153018, 1e-6));

    const CliResult modes = run_cli("spectrum --b const:1 --L 6.283185307179586 --K 32 --out " +
                                   (root / "spectrum").string());
    CHECK(modes.exit_code == 0);
    std::istringstream lines(modes.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "k,omega,weyl_ratio");
    int rows = 0;
    while (std::getline(lines, line)) {
        const int k = std::stoi(line.substr(0, line.find(',')));
        const double omega = std::stod(line.substr(line.find(',') + 1));
        REQUIRE_THAT(omega, WithinAbs(std::abs(k), 1e-6));
        ++rows;
    }
    CHECK(rows == 65);
    CHECK(fs::exists(root / "spectrum" / "spectrum.csv"));

    CHECK(run_cli("solve --config disk_cubic_rates --set solve.betas=-5 --out " + (root / "bad").string())
              .exit_code == 2);
    CHECK(run_cli("limit --config missing_config_name").exit_code == 2);
    CHECK(run_cli("profile --T").exit_code == 2);
    CHECK(run_cli("match --config annulus_degenerate --out " + (root / "degenerate").string()).exit_code == 3);
    CHECK(run_cli("limit --config annulus_harmonic --out " + (root / "limit").string()).exit_code == 0);
}
