#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kolmo/checks.hpp"
#include "kolmo/config.hpp"

using namespace kolmo;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return load_config(in, "test.toml");
}

std::string error_of(const std::string& text) {
    try {
        parse(text).validate();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config subset parsing") {
    const auto c = parse(R"(# experiment
seed = 42
threads = 2
checks = ["heat-decay", "constants",]
output = "out dir"   # trailing comment

[model]
preset = "custom"
psi = [0, 0, 0.5]
phi = [0.0, 1.0, 0.0, -1.0]

[grid]
N = 8
M = 64

[noise]
alpha = [1, 0.25, 0.1111, 0.0625, 0.04, 0.0277, 0.0204, 0.015625]

[lyapunov]
p = 4
kappa_fraction = 0.25

[mc]
paths = 1_000
dt = 1e-3
t = 0.2
every = 5
start = [0.5, -0.25]
)");
    CHECK(c.seed == 42);
    CHECK(c.threads == 2);
    CHECK(c.checks == std::vector<std::string>{"heat-decay", "constants"});
    CHECK(c.output == "out dir");
    CHECK(c.model == "custom");
    CHECK(c.psi == std::vector<double>{0.0, 0.0, 0.5});
    CHECK(c.n == 8);
    CHECK(c.m == 64);
    CHECK(c.alpha.size() == 8);
    CHECK(c.p == 4.0);
    CHECK(c.kappa_fraction == 0.25);
    CHECK(c.paths == 1000);
    CHECK(c.dt == 1e-3);
    CHECK(c.every == 5);
    CHECK(c.start == std::vector<double>{0.5, -0.25});
    CHECK_NOTHROW(c.validate());
    CHECK(c.noise().alpha(2) == 0.25);
    CHECK(c.nonlinearity().phi.degree() == 3);

    const auto d = parse("");
    CHECK(d.model == "ou");
    CHECK(d.n == 16);
    CHECK(d.dt == 5e-4);
    CHECK_NOTHROW(d.validate());
}

TEST_CASE("config diagnostics name the line and field") {
    CHECK(error_of("seed = 1\n[mc]\ndt = \"fast\"\n") == "test.toml:3: field 'mc.dt': expected a number");
    CHECK(error_of("[grid]\nN = 8\nsize = 3\n") == "test.toml:3: field 'grid.size': unknown field");
    CHECK(error_of("[mc]\npaths = 10\npaths = 20\n") == "test.toml:3: duplicate field 'mc.paths'");
    CHECK(error_of("[mc\n") == "test.toml:1: malformed section header");
    CHECK(error_of("seed\n") == "test.toml:1: expected key = value");
    CHECK(error_of("output = \"open\n") == "test.toml:1: unterminated string");
    CHECK(error_of("checks = [1, 2\n") == "test.toml:1: expected ',' or ']' in array");
    CHECK(error_of("[model]\npreset = \"heat\"\n") == "test.toml:2: field 'model.preset': unknown preset 'heat'");
    CHECK(error_of("[grid]\nN = 0\n") == "test.toml:2: field 'grid.N': must be >= 1");
    CHECK(error_of("seed = -4\n") == "test.toml:1: field 'seed': expected a non-negative 64-bit integer");
    CHECK(error_of("[lyapunov]\nkappa_fraction = 1.0\n") == "kappa must be < kappa0");
    CHECK(error_of("[lyapunov]\nkappa_fraction = 1.5\n") == "kappa must be < kappa0");
    CHECK(error_of("[mc]\nt = 0.2001\n") == "field 'mc.t': dt * every must divide t");
    CHECK(error_of("[grid]\nN = 8\nM = 16\n") == "field 'grid.M': must be >= 4N");
}

TEST_CASE("seed override from the environment") {
    RunConfig c = parse("seed = 3\n");
    ::unsetenv("KOLMO_SEED");
    apply_environment(c);
    CHECK(c.seed == 3);
    CHECK_FALSE(c.seed_from_env);
    ::setenv("KOLMO_SEED", "18446744073709551615", 1);
    apply_environment(c);
    CHECK(c.seed == 18446744073709551615ULL);
    CHECK(c.seed_from_env);
    ::setenv("KOLMO_SEED", "12x", 1);
    CHECK_THROWS_AS(apply_environment(c), ConfigError);
    ::unsetenv("KOLMO_SEED");
}

TEST_CASE("record rules") {
    CHECK(record_passes(Rule::Residual, 0.3, 0.1, 0.0));
    CHECK_FALSE(record_passes(Rule::Residual, -0.31, 0.1, 0.0));
    CHECK(record_passes(Rule::Residual, -0.31, 0.1, 0.02));
    CHECK(record_passes(Rule::Upper, -5.0, 0.0, 0.0));
    CHECK_FALSE(record_passes(Rule::Upper, 1e-9, 0.0, 0.0));
    CHECK(record_passes(Rule::Lower, -1e-9, 0.0, 1e-8));
    CHECK_FALSE(record_passes(Rule::Lower, -2e-8, 0.0, 1e-8));
    CHECK(record_passes(Rule::Finite, 1e300, 0.0, 0.0));
    CHECK_FALSE(record_passes(Rule::Finite, std::nan(""), 0.0, 0.0));
    CHECK_FALSE(record_passes(Rule::Residual, std::nan(""), 0.0, 1.0));
    const auto r = make_record("c", "i", 0.5, 0.1, 0.3, Rule::Residual);
    CHECK(r.pass);
}

TEST_CASE("minimal run writes a report and CSV") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "kolmo-test-config-run";
    fs::remove_all(dir);
    RunConfig c = parse("checks = [\"heat-decay\"]\n[model]\npreset = \"ou\"\n");
    c.output = dir.string();
    const Report rep = run_checks(c);
    REQUIRE(rep.records.size() == 1);
    CHECK(rep.records[0].pass);
    CHECK(rep.all_pass());
    const std::string file = write_report(rep, c);
    std::ifstream in(file);
    const auto j = nlohmann::json::parse(in);
    REQUIRE(j.is_array());
    CHECK(j[0]["check"] == "heat-decay");
    CHECK(j[0]["pass"] == true);
    CHECK(j[0]["params"]["seed"] == 1);
    CHECK(j[0]["params"]["seed_source"] == "config");
    for (const char* key : {"value", "se", "tolerance"}) CHECK(j[0].contains(key));

    std::ifstream csv(dir / "heat-decay.csv");
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(header == "check,item,value,se,tolerance,rule,pass");
    CHECK(row.rfind("heat-decay,relative-error,", 0) == 0);

    std::ostringstream os;
    write_check_csv({make_record("x", "a,b", 0.1, 0.0, 1.0 / 3.0, Rule::Upper)}, os);
    CHECK(os.str().find("x,\"a,b\",0.10000000000000001,0,0.33333333333333331,upper,true") != std::string::npos);

    c.checks = {"nope"};
    CHECK_THROWS_AS(run_checks(c), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("constants table") {
    RunConfig c;
    c.model = "burgers";
    const auto t = constants_table(c);
    const double pi2 = M_PI * M_PI;
    CHECK(t.a0 == doctest::Approx(1.0 / pi2).epsilon(1e-14));
    CHECK(t.a0 == doctest::Approx(0.101321).epsilon(1e-6));
    CHECK(t.trace_truncated == doctest::Approx(1.584347).epsilon(1e-6));
    CHECK(t.c.kappa0 == doctest::Approx(pi2 / 4.0).epsilon(1e-14));
    c.model = "ginzburg-landau";
    CHECK(constants_table(c).c.kappa0 == doctest::Approx(pi2 / 4.0).epsilon(1e-14));
    c.model = "burgers";
    c.n = 4;
    c.alpha = {1, 1, 1, 1};
    CHECK(constants_table(c).a0 == doctest::Approx(1.0 / pi2).epsilon(1e-14));
    std::ostringstream os;
    print_constants(constants_table(c), c, os);
    CHECK(os.str().find("kappa0") != std::string::npos);
}
