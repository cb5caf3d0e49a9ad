#pragma once

// Experiment configuration: a TOML subset ([section] headers, key = value with
// strings, numbers, booleans and flat arrays) mapped onto RunConfig.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "kolmo/drift.hpp"
#include "kolmo/ergodic.hpp"
#include "kolmo/noise.hpp"

namespace kolmo {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigValue;
using ConfigArray = std::vector<ConfigValue>;
struct ConfigValue {
    std::variant<bool, std::int64_t, double, std::string, ConfigArray> v;
    int line = 0;
};

/// Keys are "section.key" (top-level keys have no prefix), in file order.
struct ConfigDocument {
    std::vector<std::string> order;
    std::map<std::string, ConfigValue> values;
};

ConfigDocument parse_config_text(std::istream& in, const std::string& source = "<config>");

struct RunConfig {
    std::string model = "ou";
    std::vector<double> psi, phi;  // custom polynomial coefficients
    std::size_t n = 16;
    std::size_t m = 0;  // 0 selects 8N
    double amplitude = 1.0;
    double exponent = 2.0;
    std::vector<double> alpha;     // explicit eigenvalues override the law
    double p = 2.0;
    double kappa_fraction = 0.5;
    std::size_t paths = 5000;
    double dt = 5e-4;
    double t = 0.5;
    std::size_t every = 10;
    std::vector<double> start{0.5};  // coefficients of x_0
    double lambda = 10.0;
    double x0 = 0.5;
    std::size_t nconv_paths = 1000;
    ErgodicConfig ergodic;
    std::size_t oracle_nodes = 2001;
    double oracle_lambda = 5.0;
    double oracle_x0 = 1.0;
    std::uint64_t seed = 1;
    bool seed_from_env = false;
    unsigned threads = 1;
    std::vector<std::string> checks;
    std::string output = "kolmo-out";

    NonlinearityModel nonlinearity() const;
    NoiseSpec noise(std::size_t modes) const;
    NoiseSpec noise() const { return noise(n); }
    /// kappa_fraction * kappa0.
    double kappa() const;
    void validate() const;
};

RunConfig load_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config_file(const std::string& path);
/// KOLMO_SEED replaces the seed when set.
void apply_environment(RunConfig& config);

}  // namespace kolmo
