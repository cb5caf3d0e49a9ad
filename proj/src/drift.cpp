#include "kolmo/drift.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <boost/math/special_functions/legendre.hpp>
#include <boost/math/tools/minima.hpp>

#include "kolmo/probes.hpp"

namespace kolmo {

double smoothstep(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double smoothstep_d1(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double t = s * (1.0 - s);
    return 30.0 * t * t;
}

namespace {
double smoothstep_d2(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
}
}  // namespace

double cutoff_profile(double t) {
    const double a = std::abs(t);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    return std::max(0.0, 1.0 - smoothstep(2.0 * a - 1.0));
}

double cutoff_profile_d1(double t) {
    const double a = std::abs(t);
    if (a <= 0.5 || a >= 1.0) return 0.0;
    const double d = -2.0 * smoothstep_d1(2.0 * a - 1.0);
    return t < 0.0 ? -d : d;
}

double cutoff_profile_d2(double t) {
    const double a = std::abs(t);
    if (a <= 0.5 || a >= 1.0) return 0.0;
    return -4.0 * smoothstep_d2(2.0 * a - 1.0);
}

double truncation_profile(double y) {
    const double a = std::abs(y);
    if (a <= 1.0) return y;
    double v = 1.5;
    if (a < 2.0) {
        const double u = a - 1.0;
        // antiderivative of the smoothstep, so theta' = 1 - smoothstep
        v = a - u * u * u * u * (2.5 + u * (-3.0 + u));
    }
    return y < 0.0 ? -v : v;
}

double truncation_profile_d1(double y) {
    const double a = std::abs(y);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    return std::max(0.0, 1.0 - smoothstep(a - 1.0));
}

namespace {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    const std::vector<double> pos = boost::math::legendre_p_zeros<double>(n);
    x.clear();
    w.clear();
    auto weight = [n](double z) {
        const double p = boost::math::legendre_p_prime(n, z);
        return 2.0 / ((1.0 - z * z) * p * p);
    };
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) {
        if (*it == 0.0) continue;
        x.push_back(-*it);
        w.push_back(weight(*it));
    }
    for (double z : pos) {
        x.push_back(z);
        w.push_back(weight(z));
    }
}

double bump(double y) { return std::abs(y) < 1.0 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0; }

Mollifier make_mollifier() {
    Mollifier m;
    std::vector<double> x64, w64;
    gauss_legendre(64, x64, w64);
    double mass = 0.0, second = 0.0;
    for (std::size_t i = 0; i < x64.size(); ++i) {
        mass += w64[i] * bump(x64[i]);
        second += w64[i] * x64[i] * x64[i] * bump(x64[i]);
    }
    m.mass = mass;
    m.m2 = second / mass;

    std::vector<double> w32;
    gauss_legendre(32, m.nodes, w32);
    double total = 0.0;
    m.weights.resize(m.nodes.size());
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        m.weights[i] = w32[i] * bump(m.nodes[i]);
        total += m.weights[i];
    }
    for (double& v : m.weights) v /= total;

    m.moments.assign(65, 0.0);
    for (std::size_t l = 0; l < m.moments.size(); ++l) {
        if (l % 2 == 1) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < m.nodes.size(); ++i) s += m.weights[i] * std::pow(m.nodes[i], l);
        m.moments[l] = s;
    }
    m.moments[0] = 1.0;
    return m;
}

}  // namespace

const Mollifier& Mollifier::standard() {
    static const Mollifier m = make_mollifier();
    return m;
}

PsiMap::PsiMap(Polynomial psi, double level)
    : psi_(std::move(psi)), dpsi_(psi_.derivative()), ddpsi_(dpsi_.derivative()), level_(level) {
    if (!(level_ > 0.0)) throw ParameterError("cutoff level must be positive");
}

double PsiMap::value(double x) const {
    if (level_ == kNoLevel) return psi_(x);
    const double t = x / level_;
    if (std::abs(t) >= 1.0) return 0.0;
    return psi_(x) * cutoff_profile(t);
}

double PsiMap::d1(double x) const {
    if (level_ == kNoLevel) return dpsi_(x);
    const double t = x / level_;
    const double a = std::abs(t);
    if (a >= 1.0) return 0.0;
    if (a <= 0.5) return dpsi_(x);
    return dpsi_(x) * cutoff_profile(t) + psi_(x) * cutoff_profile_d1(t) / level_;
}

double PsiMap::d2(double x) const {
    if (level_ == kNoLevel) return ddpsi_(x);
    const double t = x / level_;
    const double a = std::abs(t);
    if (a >= 1.0) return 0.0;
    if (a <= 0.5) return ddpsi_(x);
    return ddpsi_(x) * cutoff_profile(t) + 2.0 * dpsi_(x) * cutoff_profile_d1(t) / level_ +
           psi_(x) * cutoff_profile_d2(t) / (level_ * level_);
}

ReactionMap::ReactionMap(Polynomial phi, double level, double beta)
    : phi_(std::move(phi)), level_(level), beta_(beta) {
    if (!(level_ > 0.0)) throw ParameterError("truncation level must be positive");
    if (!(beta_ >= 0.0 && beta_ < 1.0)) throw ParameterError("mollifier width must lie in [0,1)");
    if (phi_.degree() + 1 > Mollifier::standard().moments.size()) {
        throw ParameterError("reaction polynomial degree too high");
    }
    Polynomial d = phi_;
    double fact = 1.0;
    for (std::size_t l = 0; l <= phi_.degree(); ++l) {
        if (l > 0) {
            d = d.derivative();
            fact *= static_cast<double>(l);
        }
        std::vector<double> c = d.coefficients();
        for (double& v : c) v /= fact;
        taylor_.emplace_back(std::move(c));
    }
}

double ReactionMap::width(double r) const {
    if (beta_ == 0.0 || r <= 0.0 || r >= 1.0) return 0.0;
    return beta_ * std::sqrt(r * (1.0 - r));
}

double ReactionMap::mollified(double x, double s) const {
    const Mollifier& mol = Mollifier::standard();
    if (level_ == kNoLevel || phi_.abs_bound(std::abs(x) + s) <= level_) {
        // truncation inactive on [x-s, x+s]: exact moment expansion of the rule
        double acc = 0.0;
        double sp = 1.0;
        for (std::size_t l = 0; l < taylor_.size(); ++l) {
            if (l % 2 == 0) acc += sp * mol.moments[l] * taylor_[l](x);
            sp *= s;
        }
        return acc;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < mol.nodes.size(); ++i) {
        acc += mol.weights[i] * truncate_level(phi_(x - s * mol.nodes[i]), level_);
    }
    return acc;
}

double ReactionMap::value(double r, double x) const {
    if (phi_.is_zero()) return 0.0;
    const double s = width(r);
    if (s < 1e-8) return base(x);
    return mollified(x, s);
}

// ---------------------------------------------------------------------------

NonlinearityModel NonlinearityModel::preset(const std::string& name) {
    const double h0_gl = 2.0 / (3.0 * std::sqrt(3.0));
    NonlinearityModel m;
    m.name = name;
    if (name == "burgers") {
        m.psi = Polynomial{0.0, 0.0, 0.5};
        m.constants.C = 1.0;
    } else if (name == "ginzburg-landau") {
        m.phi = Polynomial{0.0, 1.0, 0.0, -1.0};
        m.constants.g = 1.0;
        m.constants.q2 = 3.0;
        m.constants.h0 = h0_gl;
        m.constants.g0 = 1.0;
    } else if (name == "mixed") {
        m.psi = Polynomial{0.0, 0.0, 0.5};
        m.phi = Polynomial{0.0, 1.0, 0.0, -1.0};
        m.constants.C = 1.0;
        m.constants.g = 1.0;
        m.constants.q2 = 3.0;
        m.constants.h0 = h0_gl;
        m.constants.g0 = 1.0;
    } else if (name != "ou") {
        throw ParameterError("unknown model preset '" + name + "'");
    }
    return m;
}

std::vector<std::string> preset_names() { return {"burgers", "ginzburg-landau", "mixed"}; }

NonlinearityModel NonlinearityModel::custom(std::string name, Polynomial psi, Polynomial phi) {
    NonlinearityModel m;
    m.name = std::move(name);
    m.psi = std::move(psi);
    m.phi = std::move(phi);
    const AuditReport rep = audit_conditions(m);
    ConditionConstants& c = m.constants;
    const ConditionAudit& a_psi = rep.get("Psi");
    c.C = a_psi.holds ? a_psi.constant("C") : kNoLevel;
    const ConditionAudit& a1 = rep.get("Phi1");
    c.g = a1.constant("g");
    c.q2 = a1.constant("q2");
    const ConditionAudit& a2 = rep.get("Phi2");
    c.h0 = a2.holds ? a2.constant("h0") : kNoLevel;
    c.h1 = a2.holds ? a2.constant("h1") : kNoLevel;
    const ConditionAudit& a3 = rep.get("Phi3");
    c.g0 = a3.holds ? a3.constant("g0") : kNoLevel;
    c.g1 = a3.holds ? a3.constant("g1") : kNoLevel;
    return m;
}

void NonlinearityModel::validate() const {
    const ConditionConstants& c = constants;
    for (double v : {c.C, c.g, c.q2, c.h0, c.h1, c.rho0, c.g0, c.g1}) {
        if (!(v >= 0.0)) throw ParameterError("model '" + name + "': condition constants must be >= 0");
    }
    if (!(c.h1 < 2.0)) throw ParameterError("model '" + name + "': condition (Phi2) needs |h1|_1 < 2");
}

// ---------------------------------------------------------------------------

namespace {

void evaluate_grid(const Basis& basis, const PsiMap* psi, const ReactionMap* phi,
                   std::span<const double> a, std::span<double> out) {
    const std::size_t m = basis.grid_size();
    thread_local std::vector<double> buf;
    if (buf.size() < 3 * m) buf.resize(3 * m);
    std::span<double> v(buf.data(), m);
    std::span<double> d(buf.data() + m, m);
    std::span<double> g(buf.data() + 2 * m, m);
    basis.synthesize_into(a, v);
    std::fill(g.begin(), g.end(), 0.0);
    if (psi != nullptr && !psi->is_zero()) {
        basis.derivative_into(a, d);
        for (std::size_t j = 0; j < m; ++j) g[j] = d[j] * psi->d1(v[j]);
    }
    if (phi != nullptr && !phi->is_zero()) {
        const auto r = basis.nodes();
        for (std::size_t j = 0; j < m; ++j) g[j] += phi->value(r[j], v[j]);
    }
    basis.analyze_into(g, out);
}

SpectralVector evaluate(const Basis& basis, const PsiMap* psi, const ReactionMap* phi,
                        const SpectralVector& x, std::size_t n) {
    if (x.size() > basis.modes()) throw DimensionError("state has more modes than the basis");
    if (n > basis.modes()) throw DimensionError("output has more modes than the basis");
    SpectralVector out(n);
    evaluate_grid(basis, psi, phi, x.span(), out.span());
    return out;
}

}  // namespace

DriftEvaluator::DriftEvaluator(std::shared_ptr<const Basis> basis, PsiMap psi, ReactionMap phi)
    : basis_(std::move(basis)), psi_(std::move(psi)), phi_(std::move(phi)) {
    if (!basis_) throw ParameterError("drift evaluator needs a basis");
}

void DriftEvaluator::apply(std::span<const double> a, std::span<double> out) const {
    if (is_zero()) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    evaluate_grid(*basis_, &psi_, &phi_, a, out);
}

SpectralVector DriftEvaluator::operator()(const SpectralVector& x) const {
    return (*this)(x, basis_->modes());
}

SpectralVector DriftEvaluator::operator()(const SpectralVector& x, std::size_t n) const {
    return evaluate(*basis_, &psi_, &phi_, x, n);
}

SpectralVector eval_GPsi(const Basis& basis, const SpectralVector& x, const PsiMap& psi) {
    return evaluate(basis, &psi, nullptr, x, x.size());
}

SpectralVector eval_GPsi(const SpectralVector& x, const Polynomial& psi) {
    return eval_GPsi(Basis(std::max<std::size_t>(x.size(), 1)), x, PsiMap(psi));
}

SpectralVector eval_FPhi(const Basis& basis, const SpectralVector& x, const ReactionMap& phi) {
    return evaluate(basis, nullptr, &phi, x, x.size());
}

SpectralVector eval_FPhi(const SpectralVector& x, const Polynomial& phi) {
    return eval_FPhi(Basis(std::max<std::size_t>(x.size(), 1)), x, ReactionMap(phi));
}

SpectralVector eval_F(const Basis& basis, const SpectralVector& x, const NonlinearityModel& model) {
    const PsiMap psi(model.psi);
    const ReactionMap phi(model.phi);
    return evaluate(basis, &psi, &phi, x, x.size());
}

SpectralVector eval_F(const SpectralVector& x, const NonlinearityModel& model) {
    return eval_F(Basis(std::max<std::size_t>(x.size(), 1)), x, model);
}

PsiMap cutoff_psi(const Polynomial& psi, double level) { return PsiMap(psi, level); }
ReactionMap truncate_phi(const Polynomial& phi, double level) { return ReactionMap(phi, level); }
ReactionMap mollify_phi(const ReactionMap& phi, double beta) { return phi.with_beta(beta); }

// ---------------------------------------------------------------------------

BetaSelection select_beta(const ReactionMap& phiN, std::size_t n, double radius, std::uint64_t seed) {
    BetaSelection sel;
    sel.probes = kBetaProbes;
    if (phiN.is_zero()) {
        sel.beta = 0.5;
        sel.ladder_index = 1;
        return sel;
    }
    const Basis basis(n);
    const std::size_t m = basis.grid_size();
    const auto probes = probe_ball(n, kBetaProbes, radius, seed);
    std::vector<double> v(m * probes.size());
    std::vector<double> base(v.size());
    for (std::size_t p = 0; p < probes.size(); ++p) {
        std::span<double> vp(v.data() + p * m, m);
        basis.synthesize_into(probes[p].span(), vp);
        for (std::size_t j = 0; j < m; ++j) base[p * m + j] = phiN.base(vp[j]);
    }
    const double tol = 1.0 / static_cast<double>(n);
    const auto r = basis.nodes();
    double best = kNoLevel;
    for (int l = 1; l <= kBetaLadderMax; ++l) {
        const ReactionMap mol = phiN.with_beta(std::ldexp(1.0, -l));
        double worst = 0.0;
        for (std::size_t p = 0; p < probes.size() && worst <= tol; ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double d = base[p * m + j] - mol.value(r[j], v[p * m + j]);
                s += d * d;
            }
            worst = std::max(worst, std::sqrt(s * basis.weight()));
        }
        best = std::min(best, worst);
        if (worst <= tol) {
            sel.beta = mol.beta();
            sel.ladder_index = l;
            sel.sup_error = worst;
            return sel;
        }
    }
    throw SelectionError("no mollifier width in 2^-1..2^-20 meets 1/N = " + std::to_string(tol) +
                         " at N=" + std::to_string(n) + "; best sampled error " + std::to_string(best));
}

BetaSchedule beta_schedule(const NonlinearityModel& model, const std::vector<std::size_t>& levels) {
    BetaSchedule s;
    s.levels = levels;
    double running = kNoLevel;
    for (std::size_t n : levels) {
        const double nd = static_cast<double>(n);
        const double b = select_beta(ReactionMap(model.phi, nd), n, nd).beta;
        if (!s.raw.empty() && b > s.raw.back()) s.raw_monotone = false;
        s.raw.push_back(b);
        running = std::min(running, b);
        s.beta.push_back(running);
    }
    return s;
}

RegularizedDrift build_FN(const NonlinearityModel& model, const NoiseSpec& noise,
                          std::shared_ptr<const Basis> basis, double beta_override) {
    (void)noise;
    RegularizedDrift d;
    d.n = basis->modes();
    const double nd = static_cast<double>(d.n);
    d.psi_level = nd;
    d.phi_level = nd;
    const ReactionMap phiN(model.phi, nd);
    if (beta_override > 0.0) {
        d.selection.beta = beta_override;
    } else {
        d.selection = select_beta(phiN, d.n, nd);
    }
    d.beta = model.phi.is_zero() ? 0.0 : d.selection.beta;
    d.eval = std::make_shared<DriftEvaluator>(std::move(basis), PsiMap(model.psi, nd), phiN.with_beta(d.beta));
    return d;
}

RegularizedDrift build_FN(const NonlinearityModel& model, const NoiseSpec& noise, std::size_t n,
                          double beta_override) {
    return build_FN(model, noise, std::make_shared<Basis>(n), beta_override);
}

ConvergenceReport convergence_report(const NonlinearityModel& model, const NoiseSpec& noise,
                                     const std::vector<std::size_t>& levels,
                                     const std::vector<SpectralVector>& probes) {
    std::size_t nf = 1;
    for (const auto& p : probes) nf = std::max(nf, p.size());
    for (std::size_t n : levels) nf = std::max(nf, n);
    const Basis fine(nf);
    std::vector<SpectralVector> full;
    full.reserve(probes.size());
    for (const auto& p : probes) full.push_back(eval_F(fine, project(p, nf), model));

    ConvergenceReport rep;
    for (std::size_t n : levels) {
        const RegularizedDrift fn = build_FN(model, noise, n);
        ConvergenceRow row;
        row.n = n;
        for (std::size_t i = 0; i < probes.size(); ++i) {
            const SpectralVector diff = project(full[i], n) - fn(project(probes[i], n));
            const double e = l2_norm(diff);
            row.sup = std::max(row.sup, e);
            row.mean += e / static_cast<double>(probes.size());
        }
        if (!rep.rows.empty() && row.sup > 1.1 * rep.rows.back().sup + 1e-12) rep.decreasing = false;
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------

double ConditionAudit::constant(const std::string& key) const {
    for (const auto& [k, v] : constants) {
        if (k == key) return v;
    }
    throw std::out_of_range("audit constant '" + key + "' not reported");
}

const ConditionAudit& AuditReport::get(const std::string& condition) const {
    for (const auto& c : conditions) {
        if (c.condition == condition) return c;
    }
    throw std::out_of_range("condition '" + condition + "' not audited");
}

bool AuditReport::all_hold() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const ConditionAudit& c) { return c.holds; });
}

std::vector<AuditBox> default_audit_boxes() {
    AuditBox core;
    AuditBox wide;
    wide.x0 = -1000.0;
    wide.x1 = 1000.0;
    wide.nx = 401;
    wide.nr = 5;
    return {core, wide};
}

namespace {

struct Sample {
    double r;
    double x;
};

std::vector<Sample> expand(const std::vector<AuditBox>& boxes) {
    std::vector<Sample> out;
    for (const auto& b : boxes) {
        for (std::size_t i = 0; i < b.nr; ++i) {
            const double r = b.nr == 1 ? 0.5 * (b.r0 + b.r1)
                                       : b.r0 + (b.r1 - b.r0) * static_cast<double>(i) / static_cast<double>(b.nr - 1);
            for (std::size_t j = 0; j < b.nx; ++j) {
                const double x = b.nx == 1 ? 0.5 * (b.x0 + b.x1)
                                           : b.x0 + (b.x1 - b.x0) * static_cast<double>(j) / static_cast<double>(b.nx - 1);
                out.push_back({r, x});
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Sample& a, const Sample& b) {
        return std::abs(a.x) < std::abs(b.x);
    });
    return out;
}

// Envelope by dyadic bins of the scale variable; "vanishing" means the last
// populated bin is at most half of the peak.
struct Envelope {
    std::map<int, std::pair<double, SamplePoint>> bins;

    void add(double scale, double ratio, const SamplePoint& p) {
        if (!(scale >= 1.0)) return;
        const int b = static_cast<int>(std::floor(std::log2(scale)));
        auto it = bins.find(b);
        if (it == bins.end() || ratio > it->second.first) bins[b] = {ratio, p};
    }
    double peak() const {
        double m = 0.0;
        for (const auto& [b, v] : bins) m = std::max(m, v.first);
        return m;
    }
    bool vanishing() const {
        if (bins.empty()) return true;
        const double pk = peak();
        return pk <= 0.0 || bins.rbegin()->second.first <= 0.5 * pk;
    }
    const SamplePoint& tail_point() const { return bins.rbegin()->second.second; }
    double tail() const { return bins.empty() ? 0.0 : bins.rbegin()->second.first; }
};

double sigma(double r, double x) { return std::abs(x) / std::sqrt(r * (1.0 - r)); }

ConditionAudit audit_psi(const NonlinearityModel& model, const std::vector<Sample>& samples) {
    ConditionAudit a;
    a.condition = "Psi";
    const Polynomial d2 = model.psi.derivative().derivative();
    double c = 0.0;
    for (int i = -200; i <= 200; ++i) c = std::max(c, std::abs(d2(i / 200.0)));
    Envelope env;
    for (const auto& s : samples) {
        const double ax = std::abs(s.x);
        const double v = std::abs(d2(s.x));
        if (ax <= 1.0) c = std::max(c, v);
    }
    for (const auto& s : samples) {
        const double ax = std::abs(s.x);
        if (ax < 1.0) continue;
        const double ratio = std::max(0.0, std::abs(d2(s.x)) - c) / std::sqrt(ax);
        env.add(ax, ratio, {s.r, s.x, std::abs(d2(s.x))});
    }
    a.holds = env.vanishing();
    a.constants = {{"C", c}, {"omega_tail", env.tail()}};
    if (!a.holds) {
        a.counterexample = env.tail_point();
        a.note = "|Psi''| - C grows at least like sqrt|x|";
    }
    return a;
}

ConditionAudit audit_phi1(const NonlinearityModel& model, const std::vector<Sample>& samples) {
    ConditionAudit a;
    a.condition = "Phi1";
    const double q2 = std::max<double>(1.0, static_cast<double>(model.phi.degree()));
    double g = 0.0;
    SamplePoint at;
    for (const auto& s : samples) {
        const double v = std::abs(model.phi(s.x)) / (1.0 + std::pow(std::abs(s.x), q2));
        if (v > g) {
            g = v;
            at = {s.r, s.x, v};
        }
    }
    a.constants = {{"g", g}, {"q1", kNoLevel}, {"q2", q2}};
    return a;
}

ConditionAudit audit_phi2(const NonlinearityModel& model, const std::vector<Sample>& samples) {
    ConditionAudit a;
    a.condition = "Phi2";
    double xmax = 0.0;
    for (const auto& s : samples) xmax = std::max(xmax, std::abs(s.x));
    auto sgn = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
    SamplePoint last;
    for (int k = 0; k < 16; ++k) {
        const double h1 = k / 8.0;
        auto h = [&](double x) { return model.phi(x) * sgn(x) - h1 * std::abs(x); };
        double best = -kNoLevel;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double v = h(samples[i].x);
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        const Sample s = samples[arg];
        last = {s.r, s.x, best};
        if (std::abs(s.x) >= 0.95 * xmax && best > 0.0) continue;
        // refine an interior maximum with Brent on the neighbouring interval
        double step = xmax;
        for (const auto& t : samples) {
            if (t.x != s.x && std::abs(t.x - s.x) < step) step = std::abs(t.x - s.x);
        }
        if (s.x != 0.0 && step < xmax) {
            double lo = s.x - step, hi = s.x + step;
            if (s.x > 0.0) lo = std::max(lo, 0.0);
            else hi = std::min(hi, 0.0);
            const auto res = boost::math::tools::brent_find_minima([&](double x) { return -h(x); }, lo, hi, 52);
            best = std::max(best, -res.second);
        }
        a.constants = {{"h0", std::max(0.0, best)}, {"h1", h1}};
        a.holds = true;
        return a;
    }
    a.holds = false;
    a.constants = {{"h0", kNoLevel}, {"h1", 15.0 / 8.0}};
    a.counterexample = last;
    a.note = "Phi sign x - h1|x| still increasing at the sample edge for every h1 < 2";
    return a;
}

ConditionAudit audit_phi3(const NonlinearityModel& model, const std::vector<Sample>& samples) {
    ConditionAudit a;
    a.condition = "Phi3";
    const Polynomial d1 = model.phi.derivative();
    const double steps[] = {0.0, 1e-3, 0.1, 0.5, 1.0};
    auto quotient = [&](double x, double dx) {
        return dx == 0.0 ? d1(x) : (model.phi(x + dx) - model.phi(x)) / dx;
    };
    constexpr double core = 2.0;
    double g0 = 0.0;
    for (const auto& s : samples) {
        if (sigma(s.r, s.x) > core) continue;
        for (double dx : steps) g0 = std::max(g0, quotient(s.x, dx));
    }
    // one envelope per r slice: sigma mixes x and r, so pooling slices would
    // let small-r samples mask a non-vanishing excess at fixed r
    std::map<double, Envelope> slices;
    for (const auto& s : samples) {
        const double sg = sigma(s.r, s.x);
        if (sg <= core) continue;
        for (double dx : steps) {
            const double q = quotient(s.x, dx);
            slices[s.r].add(sg, std::max(0.0, q - g0) / (sg * sg), {s.r, s.x, q});
        }
    }
    Envelope env;
    double g1 = 0.0;
    for (const auto& [r, e] : slices) {
        g1 = std::max(g1, e.peak());
        if (!e.vanishing() && (env.bins.empty() || e.tail() > env.tail())) env = e;
    }
    if (env.bins.empty() && !slices.empty()) env = slices.begin()->second;
    a.holds = env.vanishing();
    a.constants = {{"rho0", 1.0}, {"g0", g0}, {"g1", g1}, {"p1", kNoLevel}};
    if (!a.holds) {
        a.counterexample = env.tail_point();
        a.note = "difference quotient excess does not vanish relative to sigma^2";
    }
    return a;
}

}  // namespace

AuditReport audit_conditions(const NonlinearityModel& model, const std::vector<AuditBox>& boxes) {
    const std::vector<Sample> samples = expand(boxes);
    AuditReport rep;
    rep.conditions.push_back(audit_psi(model, samples));
    rep.conditions.push_back(audit_phi1(model, samples));
    rep.conditions.push_back(audit_phi2(model, samples));
    rep.conditions.push_back(audit_phi3(model, samples));
    rep.odd_negative_polynomial = model.phi.degree() % 2 == 1 && model.phi.leading() < 0.0;
    return rep;
}

AuditReport audit_conditions(const NonlinearityModel& model) {
    return audit_conditions(model, default_audit_boxes());
}

}  // namespace kolmo
