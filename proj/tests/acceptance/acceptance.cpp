// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kolmo/checks.hpp"
#include "kolmo/config.hpp"

using namespace kolmo;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

RunConfig base_config(const std::string& model) {
    RunConfig c;
    c.model = model;
    c.n = 16;
    c.m = 128;
    c.dt = 5e-4;
    c.seed = 20240611;
    return c;
}

std::string show(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// All records pass; the detail lists the worst record relative to its slack.
Outcome all_records(const std::vector<CheckRecord>& recs, Outcome o = {}) {
    const CheckRecord* worst = nullptr;
    double worst_ratio = -1.0;
    for (const auto& r : recs) {
        if (!r.pass) {
            o.pass = false;
            o.detail += " failed[" + r.check + ": " + r.item + " value=" + show(r.value) + " se=" + show(r.se) +
                        " tol=" + show(r.tolerance) + "]";
        }
        const double slack = 3.0 * r.se + r.tolerance;
        // how much of the allowed slack the record uses
        double used = 0.0;
        if (r.rule == Rule::Residual) used = std::abs(r.value);
        if (r.rule == Rule::Upper) used = std::max(0.0, r.value);
        if (r.rule == Rule::Lower) used = std::max(0.0, -r.value);
        const double ratio = r.rule == Rule::Finite ? -1.0 : slack > 0.0 ? used / slack : (used == 0.0 ? 0.0 : 1e300);
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst = &r;
        }
    }
    if (worst && o.pass) {
        o.detail += " records=" + std::to_string(recs.size()) + " tightest[" + worst->item +
                    " value=" + show(worst->value) + " se=" + show(worst->se) + " tol=" + show(worst->tolerance) + "]";
    }
    return o;
}

std::vector<CheckRecord> run(const std::string& check, const RunConfig& c) {
    c.validate();
    return run_check(check, c);
}

// ---------------------------------------------------------------------------

Outcome heat_decay() { return all_records(run("heat-decay", base_config("ou"))); }

Outcome ou_statistics() {
    RunConfig c = base_config("ou");
    c.paths = 5000;
    return all_records(run("ou-statistics", c));
}

// Independent evaluation of the constants for alpha_k = k^-2.
Outcome constants() {
    RunConfig c = base_config("burgers");
    const auto t = constants_table(c);
    const std::size_t n = 16;
    double a0 = 0.0;
    for (std::size_t k = 1; k <= n; ++k) a0 = std::max(a0, 1.0 / (static_cast<double>(k * k) * pi * pi * static_cast<double>(k * k)));
    double tr = 0.0;
    const std::size_t K = 1000000;
    for (std::size_t k = K; k >= 1; --k) tr += 1.0 / (static_cast<double>(k) * static_cast<double>(k));
    const double Kd = static_cast<double>(K);
    tr += 1.0 / Kd - 1.0 / (2.0 * Kd * Kd) + 1.0 / (6.0 * Kd * Kd * Kd);
    const double h0 = 0.0, h1 = 0.0;
    const double k0 = (2.0 - h1) / (8.0 * a0);
    const double kappa = 0.5 * k0;
    const double lk = 2.0 * kappa * tr + h0 * h0 * kappa / (4.0 - 2.0 * h1 - 8.0 * kappa * a0);
    const double lambda = 2.0 * lk + 1.0;
    const double m = std::min(lambda / 2.0, 2.0 * kappa - h1 * kappa - h0 * h0 * kappa * kappa / (lambda - 4.0 * kappa * tr) -
                                                4.0 * a0 * kappa * kappa);
    Outcome o;
    const auto cmp = [&](const std::string& name, double got, double want) {
        const double rel = std::abs(got - want) / std::abs(want);
        if (!(rel <= 1e-12)) {
            o.pass = false;
            o.detail += " " + name + " got=" + show(got) + " want=" + show(want);
        }
    };
    cmp("a0", t.a0, 1.0 / (pi * pi));
    cmp("a0(brute)", t.a0, a0);
    cmp("kappa0", t.c.kappa0, pi * pi / 4.0);
    cmp("kappa0(brute)", t.c.kappa0, k0);
    cmp("TrA", t.trace, tr);
    cmp("lambda_kappa", t.c.lambda_kappa, lk);
    cmp("m_kappa_lambda", t.c.m_kappa_lambda, m);
    if (o.pass) {
        std::ostringstream os;
        os.precision(10);
        os << " a0=" << t.a0 << " kappa0=" << t.c.kappa0 << " lambda_kappa=" << t.c.lambda_kappa
           << " m=" << t.c.m_kappa_lambda;
        o.detail = os.str();
    }
    return all_records(run("constants", c), o);
}

Outcome drift_inequality() {
    std::vector<CheckRecord> recs;
    for (const char* model : {"burgers", "ginzburg-landau", "mixed"}) {
        RunConfig c = base_config(model);
        c.p = 4.0;
        c.kappa_fraction = 0.5;
        auto r = run("drift-inequality", c);
        recs.insert(recs.end(), r.begin(), r.end());
    }
    return all_records(recs);
}

Outcome derivative_identities() {
    RunConfig c = base_config("burgers");
    c.p = 4.0;
    return all_records(run("derivative-identities", c));
}

Outcome kolmogorov() {
    std::vector<CheckRecord> recs;
    for (const char* model : {"ginzburg-landau", "burgers"}) {
        RunConfig c = base_config(model);
        c.paths = 20000;
        c.t = 0.5;
        auto r = run("kolmogorov", c);
        recs.insert(recs.end(), r.begin(), r.end());
    }
    return all_records(recs);
}

Outcome martingale() {
    RunConfig c = base_config("ginzburg-landau");
    c.paths = 20000;
    return all_records(run("martingale", c));
}

Outcome resolvent() {
    RunConfig c = base_config("ginzburg-landau");
    c.paths = 5000;
    c.lambda = 10.0;
    c.nconv_paths = 1000;
    return all_records(run("resolvent", c));
}

Outcome oracle() {
    RunConfig c = base_config("ginzburg-landau");
    c.paths = 5000;
    c.oracle_lambda = 5.0;
    c.oracle_x0 = 1.0;
    return all_records(run("oracle1d", c));
}

Outcome invariant_measure() {
    RunConfig c = base_config("ginzburg-landau");
    return all_records(run("invariant-measure", c));
}

Outcome regularization() {
    std::vector<CheckRecord> recs;
    for (const char* model : {"burgers", "ginzburg-landau", "mixed"}) {
        auto r = run("regularization", base_config(model));
        recs.insert(recs.end(), r.begin(), r.end());
    }
    return all_records(recs);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "kolmo-acceptance-determinism";
    fs::remove_all(root);
    RunConfig c = base_config("ginzburg-landau");
    c.paths = 2000;
    c.checks = {"heat-decay", "ou-statistics", "martingale", "invariant-measure"};
    c.threads = 1;
    c.output = (root / "a").string();
    write_report(run_checks(c), c);
    c.output = (root / "b").string();
    write_report(run_checks(c), c);
    c.threads = 8;
    c.output = (root / "c").string();
    write_report(run_checks(c), c);
    Outcome o;
    const std::string a = slurp(root / "a" / "report.json");
    const std::string b = slurp(root / "b" / "report.json");
    const std::string t8 = slurp(root / "c" / "report.json");
    if (a.empty() || a != b) {
        o.pass = false;
        o.detail += " single-threaded reports differ";
    }
    if (a != t8) {
        o.pass = false;
        o.detail += " 1 vs 8 threads differ";
    }
    for (const auto& name : c.checks) {
        if (slurp(root / "a" / (name + ".csv")) != slurp(root / "c" / (name + ".csv"))) {
            o.pass = false;
            o.detail += " csv " + name + " differs";
        }
    }
    if (o.pass) o.detail = " report.json bytes=" + std::to_string(a.size()) + " identical across runs and thread counts";
    fs::remove_all(root);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"heat-decay exactness", heat_decay},
        {"OU statistics", ou_statistics},
        {"constants", constants},
        {"Lyapunov drift inequality", drift_inequality},
        {"derivative identities", derivative_identities},
        {"Kolmogorov identity", kolmogorov},
        {"martingale and quadratic variation", martingale},
        {"resolvent", resolvent},
        {"1-D oracle", oracle},
        {"invariant measure", invariant_measure},
        {"regularization pipeline", regularization},
        {"determinism", determinism},
    };
    int failed = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto s = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string(" error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - s).count();
        if (!o.pass) ++failed;
        std::printf("%s [%2zu] %s (%.1fs)%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d/%zu criteria pass in %.1fs\n", static_cast<int>(criteria.size()) - failed, criteria.size(), total);
    return failed ? 1 : 0;
}
