#include "kolmo/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "kolmo/lyapunov.hpp"

namespace kolmo {

namespace {

std::string at_line(const std::string& source, int line) { return source + ":" + std::to_string(line) + ": "; }

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    }
    return true;
}

class ValueParser {
public:
    ValueParser(const std::string& text, int line, const std::string& source)
        : s_(text), line_(line), source_(source) {}

    ConfigValue parse() {
        ConfigValue v = value();
        skip();
        if (i_ != s_.size()) fail("unexpected trailing characters");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(at_line(source_, line_) + what); }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    ConfigValue value() {
        skip();
        if (i_ >= s_.size()) fail("missing value");
        const char c = s_[i_];
        ConfigValue out;
        out.line = line_;
        if (c == '"') {
            std::string str;
            ++i_;
            while (i_ < s_.size() && s_[i_] != '"') {
                if (s_[i_] == '\\') {
                    if (++i_ >= s_.size()) break;
                    switch (s_[i_]) {
                        case 'n': str += '\n'; break;
                        case 't': str += '\t'; break;
                        case '"': str += '"'; break;
                        case '\\': str += '\\'; break;
                        default: fail("unsupported escape in string");
                    }
                } else {
                    str += s_[i_];
                }
                ++i_;
            }
            if (i_ >= s_.size()) fail("unterminated string");
            ++i_;
            out.v = str;
        } else if (c == '[') {
            ++i_;
            ConfigArray arr;
            skip();
            if (i_ < s_.size() && s_[i_] == ']') {
                ++i_;
            } else {
                while (true) {
                    arr.push_back(value());
                    skip();
                    if (i_ < s_.size() && s_[i_] == ',') {
                        ++i_;
                        skip();
                        if (i_ < s_.size() && s_[i_] == ']') {
                            ++i_;
                            break;
                        }
                        continue;
                    }
                    if (i_ < s_.size() && s_[i_] == ']') {
                        ++i_;
                        break;
                    }
                    fail("expected ',' or ']' in array");
                }
            }
            out.v = std::move(arr);
        } else if (s_.compare(i_, 4, "true") == 0) {
            i_ += 4;
            out.v = true;
        } else if (s_.compare(i_, 5, "false") == 0) {
            i_ += 5;
            out.v = false;
        } else {
            std::size_t j = i_;
            while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '+' || s_[j] == '-' ||
                                     s_[j] == '.' || s_[j] == '_')) {
                ++j;
            }
            std::string tok = s_.substr(i_, j - i_);
            tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
            if (tok.empty()) fail("invalid value");
            i_ = j;
            const bool is_float = tok.find_first_of(".eEn") != std::string::npos;
            if (!is_float) {
                std::int64_t iv = 0;
                const char* b = tok.data() + (tok[0] == '+' ? 1 : 0);
                auto [p, ec] = std::from_chars(b, tok.data() + tok.size(), iv);
                if (ec != std::errc() || p != tok.data() + tok.size()) fail("invalid integer '" + tok + "'");
                out.v = iv;
            } else {
                char* end = nullptr;
                const double d = std::strtod(tok.c_str(), &end);
                if (end != tok.c_str() + tok.size()) fail("invalid number '" + tok + "'");
                out.v = d;
            }
        }
        return out;
    }

    const std::string& s_;
    std::size_t i_ = 0;
    int line_;
    const std::string& source_;
};

// Strip a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

class Reader {
public:
    Reader(const ConfigDocument& doc, const std::string& source) : doc_(doc), source_(source) {}

    const ConfigValue* find(const std::string& key) {
        used_.insert(key);
        auto it = doc_.values.find(key);
        return it == doc_.values.end() ? nullptr : &it->second;
    }

    [[noreturn]] void fail(const ConfigValue& v, const std::string& key, const std::string& what) const {
        throw ConfigError(at_line(source_, v.line) + "field '" + key + "': " + what);
    }

    void number(const std::string& key, double& out) {
        if (const auto* v = find(key)) out = as_number(*v, key);
    }

    void count(const std::string& key, std::size_t& out, std::size_t min = 0) {
        if (const auto* v = find(key)) {
            const auto* i = std::get_if<std::int64_t>(&v->v);
            if (!i) fail(*v, key, "expected an integer");
            if (*i < static_cast<std::int64_t>(min)) fail(*v, key, "must be >= " + std::to_string(min));
            out = static_cast<std::size_t>(*i);
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const auto* v = find(key)) {
            const auto* s = std::get_if<std::string>(&v->v);
            if (!s) fail(*v, key, "expected a string");
            out = *s;
        }
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (const auto* v = find(key)) {
            const auto* a = std::get_if<ConfigArray>(&v->v);
            if (!a) fail(*v, key, "expected an array of numbers");
            out.clear();
            for (const auto& e : *a) out.push_back(as_number(e, key));
        }
    }

    void strings(const std::string& key, std::vector<std::string>& out) {
        if (const auto* v = find(key)) {
            const auto* a = std::get_if<ConfigArray>(&v->v);
            if (!a) fail(*v, key, "expected an array of strings");
            out.clear();
            for (const auto& e : *a) {
                const auto* s = std::get_if<std::string>(&e.v);
                if (!s) fail(e, key, "expected an array of strings");
                out.push_back(*s);
            }
        }
    }

    void unsigned64(const std::string& key, std::uint64_t& out) {
        if (const auto* v = find(key)) {
            const auto* i = std::get_if<std::int64_t>(&v->v);
            if (!i || *i < 0) fail(*v, key, "expected a non-negative 64-bit integer");
            out = static_cast<std::uint64_t>(*i);
        }
    }

    void reject_unknown() const {
        for (const auto& key : doc_.order) {
            if (!used_.count(key)) fail(doc_.values.at(key), key, "unknown field");
        }
    }

private:
    double as_number(const ConfigValue& v, const std::string& key) const {
        if (const auto* i = std::get_if<std::int64_t>(&v.v)) return static_cast<double>(*i);
        if (const auto* d = std::get_if<double>(&v.v)) return *d;
        fail(v, key, "expected a number");
    }

    const ConfigDocument& doc_;
    const std::string& source_;
    std::set<std::string> used_;
};

bool on_grid(double t, double dt) {
    const double s = std::round(t / dt);
    return s >= 1.0 && std::abs(t - s * dt) <= 1e-9 * dt * std::max(1.0, s);
}

}  // namespace

ConfigDocument parse_config_text(std::istream& in, const std::string& source) {
    ConfigDocument doc;
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(strip_comment(raw));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(at_line(source, line) + "malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            if (!valid_key(section)) throw ConfigError(at_line(source, line) + "invalid section name");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(at_line(source, line) + "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (!valid_key(key)) throw ConfigError(at_line(source, line) + "invalid key '" + key + "'");
        const std::string full = section.empty() ? key : section + "." + key;
        if (doc.values.count(full)) throw ConfigError(at_line(source, line) + "duplicate field '" + full + "'");
        doc.values[full] = ValueParser(s.substr(eq + 1), line, source).parse();
        doc.order.push_back(full);
    }
    return doc;
}

NonlinearityModel RunConfig::nonlinearity() const {
    if (model == "custom") {
        return NonlinearityModel::custom("custom", Polynomial(psi), Polynomial(phi));
    }
    return NonlinearityModel::preset(model);
}

NoiseSpec RunConfig::noise(std::size_t modes) const {
    if (!alpha.empty()) {
        std::vector<double> a(modes, 0.0);
        for (std::size_t k = 0; k < modes && k < alpha.size(); ++k) a[k] = alpha[k];
        return NoiseSpec(a);
    }
    return NoiseSpec::power_law(modes, amplitude, exponent);
}

double RunConfig::kappa() const {
    const auto model_ = nonlinearity();
    return kappa_fraction * kappa0(model_.constants.h1, noise().a0());
}

void RunConfig::validate() const {
    if (!(kappa_fraction < 1.0)) throw ConfigError("kappa must be < kappa0");
    if (!(kappa_fraction > 0.0)) throw ConfigError("kappa must be > 0");
    if (n < 1) throw ConfigError("field 'grid.N': must be >= 1");
    if (m != 0 && m < 4 * n) throw ConfigError("field 'grid.M': must be >= 4N");
    if (!(p >= 2.0)) throw ConfigError("field 'lyapunov.p': must be >= 2");
    if (!(dt > 0.0)) throw ConfigError("field 'mc.dt': must be positive");
    if (every == 0) throw ConfigError("field 'mc.every': must be positive");
    if (paths == 0) throw ConfigError("field 'mc.paths': must be positive");
    const double step = dt * static_cast<double>(every);
    if (!on_grid(t, step)) throw ConfigError("field 'mc.t': dt * every must divide t");
    if (!(lambda > 0.0)) throw ConfigError("field 'resolvent.lambda': must be positive");
    if (!(oracle_lambda > 0.0)) throw ConfigError("field 'oracle1d.lambda': must be positive");
    if (oracle_nodes < 2000) throw ConfigError("field 'oracle1d.nodes': must be >= 2000");
    if (!alpha.empty() && alpha.size() < n) throw ConfigError("field 'noise.alpha': needs at least N entries");
    for (double a : alpha) {
        if (!(a >= 0.0)) throw ConfigError("field 'noise.alpha': eigenvalues must be >= 0");
    }
    if (start.size() > n) throw ConfigError("field 'mc.start': more coefficients than modes");
    if (threads == 0) throw ConfigError("field 'threads': must be positive");
    nonlinearity().validate();
}

RunConfig load_config(std::istream& in, const std::string& source) {
    const ConfigDocument doc = parse_config_text(in, source);
    Reader r(doc, source);
    RunConfig c;
    r.unsigned64("seed", c.seed);
    std::size_t threads = c.threads;
    r.count("threads", threads, 1);
    c.threads = static_cast<unsigned>(threads);
    r.strings("checks", c.checks);
    r.text("output", c.output);
    r.text("model.preset", c.model);
    r.numbers("model.psi", c.psi);
    r.numbers("model.phi", c.phi);
    r.count("grid.N", c.n, 1);
    r.count("grid.M", c.m);
    r.number("noise.amplitude", c.amplitude);
    r.number("noise.exponent", c.exponent);
    r.numbers("noise.alpha", c.alpha);
    r.number("lyapunov.p", c.p);
    r.number("lyapunov.kappa_fraction", c.kappa_fraction);
    r.count("mc.paths", c.paths, 1);
    r.number("mc.dt", c.dt);
    r.number("mc.t", c.t);
    r.count("mc.every", c.every, 1);
    r.numbers("mc.start", c.start);
    r.number("resolvent.lambda", c.lambda);
    r.number("resolvent.x0", c.x0);
    r.count("resolvent.nconv_paths", c.nconv_paths, 1);
    r.number("ergodic.burn_in", c.ergodic.burn_in);
    r.number("ergodic.horizon", c.ergodic.horizon);
    r.count("ergodic.thinning", c.ergodic.thinning, 1);
    r.count("ergodic.batches", c.ergodic.batches, 20);
    r.count("oracle1d.nodes", c.oracle_nodes);
    r.number("oracle1d.lambda", c.oracle_lambda);
    r.number("oracle1d.x0", c.oracle_x0);
    r.reject_unknown();
    if (c.model == "custom" && c.psi.empty() && c.phi.empty()) {
        const auto* v = doc.values.count("model.preset") ? &doc.values.at("model.preset") : nullptr;
        throw ConfigError(at_line(source, v ? v->line : 0) + "field 'model.preset': custom model needs psi or phi");
    }
    if (c.model != "custom") {
        try {
            NonlinearityModel::preset(c.model);
        } catch (const ParameterError&) {
            throw ConfigError(at_line(source, doc.values.at("model.preset").line) + "field 'model.preset': unknown preset '" +
                              c.model + "'");
        }
    }
    c.ergodic.seed = c.seed;
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    return load_config(in, path);
}

void apply_environment(RunConfig& config) {
    const char* env = std::getenv("KOLMO_SEED");
    if (!env || !*env) return;
    std::uint64_t s = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [p, ec] = std::from_chars(env, end, s);
    if (ec != std::errc() || p != end) throw ConfigError("KOLMO_SEED is not a 64-bit unsigned integer");
    config.seed = s;
    config.ergodic.seed = s;
    config.seed_from_env = true;
}

}  // namespace kolmo
