#pragma once

#include "aggdiff/errors.hpp"
#include "aggdiff/evolve.hpp"
#include "aggdiff/extremal.hpp"
#include "aggdiff/params.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace aggdiff {

/// Everything a CLI command needs, read from a flat key=value file.
struct RunConfig {
    ModelParams params;
    std::size_t grid_n = 2048;
    double grid_r_max = 1.0;
    ExtremalOptions extremal;
    SimConfig sim;

    std::vector<double> kappas{0.8, 1.2};
    std::size_t dichotomy_n = 512;
    double dichotomy_pad = 8.0;
    double dichotomy_tol_res = 1e-2;
    double dichotomy_tol_j = 1e-7;

    double classify_tol = 1e-3;
    double kappa = 1.0;        ///< amplitude applied to the threshold profile when no input file is given
    std::string input;         ///< optional field CSV for classify/evolve

    std::uint64_t seed = 20240611;
    std::size_t selftest_fields = 100;
    double corrupt_kernel = 1.0;  ///< test hook: multiplies every kernel weight

    std::string experiment;
    std::string out_dir = ".";
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    if (!v.empty() && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last)
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
    return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_double(key, trim(item)));
    if (out.empty())
        throw ConfigError(key + ": empty list");
    return out;
}

} // namespace detail

/// Parses `key = value` lines; '#' starts a comment. Unknown keys are errors.
inline RunConfig parse_config(std::istream& is, const std::string& origin = "<config>") {
    using namespace detail;
    RunConfig c;
    std::string line;
    std::size_t lineno = 0;
    std::set<std::string> seen;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string where = origin + ":" + std::to_string(lineno) + ": " + key;
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second)
            throw ConfigError(where + " given twice");

        auto num = [&] { return parse_double(where, val); };
        auto count = [&] { return static_cast<std::size_t>(parse_uint(where, val)); };

        if (key == "params.d") {
            const auto d = parse_uint(where, val);
            c.params.d = static_cast<int>(d);
        } else if (key == "params.s") c.params.s = num();
        else if (key == "params.m") c.params.m = num();
        else if (key == "params.eps") c.params.eps = num();
        else if (key == "grid.n") c.grid_n = count();
        else if (key == "grid.r_max") c.grid_r_max = num();
        else if (key == "extremal.tol_j") c.extremal.tol_j = num();
        else if (key == "extremal.tol_res") c.extremal.tol_res = num();
        else if (key == "extremal.max_iter") c.extremal.max_iter = count();
        else if (key == "extremal.damping") c.extremal.damping = num();
        else if (key == "extremal.init_width") c.extremal.init_width = num();
        else if (key == "extremal.init") {
            if (val == "bump")
                c.extremal.init = ExtremalInit::Bump;
            else if (val == "gaussian")
                c.extremal.init = ExtremalInit::Gaussian;
            else
                throw ConfigError(where + ": expected bump or gaussian");
        } else if (key == "sim.t_end") c.sim.t_end = num();
        else if (key == "sim.cfl") c.sim.cfl = num();
        else if (key == "sim.dt_min") c.sim.dt_min = num();
        else if (key == "sim.blowup_factor") c.sim.blowup_factor = num();
        else if (key == "sim.record_every") c.sim.record_every = count();
        else if (key == "sim.max_steps") c.sim.max_steps = count();
        else if (key == "dichotomy.kappas") c.kappas = parse_list(where, val);
        else if (key == "dichotomy.n") c.dichotomy_n = count();
        else if (key == "dichotomy.pad") c.dichotomy_pad = num();
        else if (key == "dichotomy.tol_res") c.dichotomy_tol_res = num();
        else if (key == "dichotomy.tol_j") c.dichotomy_tol_j = num();
        else if (key == "classify.tol") c.classify_tol = num();
        else if (key == "input.kappa") c.kappa = num();
        else if (key == "input.file") c.input = val;
        else if (key == "selftest.seed") c.seed = parse_uint(where, val);
        else if (key == "selftest.fields") c.selftest_fields = count();
        else if (key == "selftest.corrupt_kernel") c.corrupt_kernel = num();
        else if (key == "experiment") c.experiment = val;
        else if (key == "output.dir") c.out_dir = val;
        else
            throw ConfigError(where + ": unknown key");
    }
    c.sim.eps = c.params.eps;
    if (c.grid_n < 8)
        throw ConfigError("grid.n must be at least 8");
    if (!(c.grid_r_max > 0.0))
        throw ConfigError("grid.r_max must be > 0");
    if (!(c.extremal.damping > 0.0 && c.extremal.damping <= 1.0))
        throw ConfigError("extremal.damping must lie in (0, 1]");
    if (!(c.extremal.init_width > 0.0 && c.extremal.init_width <= 1.0))
        throw ConfigError("extremal.init_width must lie in (0, 1]");
    if (c.extremal.max_iter == 0)
        throw ConfigError("extremal.max_iter must be >= 1");
    if (c.dichotomy_n < 8)
        throw ConfigError("dichotomy.n must be at least 8");
    if (!(c.dichotomy_pad >= 1.0))
        throw ConfigError("dichotomy.pad must be >= 1");
    for (double k : c.kappas)
        if (!(k > 0.0))
            throw ConfigError("dichotomy.kappas must be positive");
    if (!(c.kappa > 0.0))
        throw ConfigError("input.kappa must be > 0");
    if (!(c.classify_tol >= 0.0))
        throw ConfigError("classify.tol must be >= 0");
    c.sim.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open config file " + path);
    return parse_config(is, path);
}

} // namespace aggdiff
