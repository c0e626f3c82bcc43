#include "parastep/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "parastep/error.hpp"

namespace parastep {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool valid_key(const std::string& k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    for (char c : k) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
    }
    return k.find("..") == std::string::npos;
}

// Split "[a, b, [c]]" at top-level commas.
std::vector<std::string> split_brackets(const std::string& text) {
    const std::string t = trim(text);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') throw Error("expected a bracketed list, got '" + t + "'");
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        const char c = t[i];
        if (c == '[') ++depth;
        if (c == ']' && --depth < 0) throw Error("unbalanced brackets in '" + t + "'");
        if (c == ',' && depth == 0) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (depth != 0) throw Error("unbalanced brackets in '" + t + "'");
    if (!trim(cur).empty() || !parts.empty()) parts.push_back(trim(cur));
    for (const auto& p : parts) {
        if (p.empty()) throw Error("empty list element in '" + t + "'");
    }
    return parts;
}

}  // namespace

double parse_number(const std::string& text) {
    const std::string t = trim(text);
    const auto slash = t.find('/');
    if (slash != std::string::npos) {
        const double num = parse_number(t.substr(0, slash));
        const double den = parse_number(t.substr(slash + 1));
        if (den == 0.0) throw Error("division by zero in '" + t + "'");
        return num / den;
    }
    if (t.empty()) throw Error("expected a number, got nothing");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v)) throw Error("expected a number, got '" + t + "'");
    return v;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& p : split_brackets(text)) out.push_back(parse_number(p));
    return out;
}

Matrix parse_matrix(const std::string& text) {
    const auto rows = split_brackets(text);
    if (rows.empty()) throw Error("empty matrix");
    std::vector<std::vector<double>> vals;
    for (const auto& r : rows) vals.push_back(parse_list(r));
    const std::size_t cols = vals.front().size();
    Matrix M(static_cast<Eigen::Index>(vals.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i].size() != cols) throw Error("matrix rows have different lengths");
        for (std::size_t j = 0; j < cols; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[i][j];
    }
    return M;
}

// --- ConfigFile --------------------------------------------------------------------

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
    ConfigFile cf;
    cf.source_ = source;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw Error(source + ":" + std::to_string(line) + ": expected key = value");
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (!valid_key(key)) throw Error(source + ":" + std::to_string(line) + ": bad key '" + key + "'");
        if (value.empty()) throw Error(source + ":" + std::to_string(line) + ": missing value for '" + key + "'");
        if (cf.entries_.count(key)) {
            throw Error(source + ":" + std::to_string(line) + ": duplicate key '" + key + "' (first on line " +
                        std::to_string(cf.entries_[key].line) + ")");
        }
        cf.entries_[key] = {value, line};
    }
    return cf;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    return parse(in, path);
}

void ConfigFile::fail(const std::string& key, const std::string& message) const {
    const auto it = entries_.find(key);
    const std::string where = it == entries_.end() ? source_ : source_ + ":" + std::to_string(it->second.line);
    throw Error(where + ": " + key + ": " + message);
}

std::string ConfigFile::get_string(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(source_ + ": missing key '" + key + "'");
    return it->second.value;
}

double ConfigFile::get_double(const std::string& key) const {
    try {
        return parse_number(get_string(key));
    } catch (const Error& e) {
        if (!has(key)) throw;
        fail(key, e.what());
    }
}

long ConfigFile::get_int(const std::string& key) const {
    const double v = get_double(key);
    if (v != std::floor(v) || std::abs(v) > 1e15) fail(key, "expected an integer");
    return static_cast<long>(v);
}

bool ConfigFile::get_bool(const std::string& key) const {
    const std::string v = get_string(key);
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    fail(key, "expected true or false, got '" + v + "'");
}

std::vector<double> ConfigFile::get_list(const std::string& key) const {
    try {
        return parse_list(get_string(key));
    } catch (const Error& e) {
        if (!has(key)) throw;
        fail(key, e.what());
    }
}

Matrix ConfigFile::get_matrix(const std::string& key) const {
    try {
        return parse_matrix(get_string(key));
    } catch (const Error& e) {
        if (!has(key)) throw;
        fail(key, e.what());
    }
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}
double ConfigFile::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}
long ConfigFile::get_int(const std::string& key, long fallback) const { return has(key) ? get_int(key) : fallback; }
bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

void ConfigFile::set(const std::string& key, const std::string& value) {
    if (!valid_key(key)) throw Error("bad key '" + key + "'");
    entries_[key] = {value, 0};
}

void ConfigFile::require_known(const std::vector<std::string>& known) const {
    for (const auto& [k, e] : entries_) {
        if (std::find(known.begin(), known.end(), k) == known.end()) fail(k, "unknown key");
    }
}

// --- ProblemConfig -----------------------------------------------------------------

NonlinearityDescriptor ProblemConfig::make_nonlinearity() const {
    const std::size_t n = dim();
    if (nonlinearity == "heat") return NonlinearityDescriptor::heat(n);
    if (nonlinearity == "pucci_plus") return NonlinearityDescriptor::pucci_plus(n, lambda, Lambda);
    if (nonlinearity == "pucci_minus") return NonlinearityDescriptor::pucci_minus(n, lambda, Lambda);
    if (nonlinearity == "linear") {
        if (!A) throw Error("nonlinearity.A is required for a linear operator");
        return NonlinearityDescriptor::linear(*A);
    }
    throw Error("unknown nonlinearity '" + nonlinearity + "'");
}

void ProblemConfig::validate() const {
    if (lower.empty() || lower.size() != upper.size()) throw Error("domain.lower and domain.upper must match in length");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(upper[i] > lower[i])) throw Error("domain.upper must exceed domain.lower");
    }
    if (!(T > 0.0)) throw Error("domain.T must be positive");
    if (h_list.empty()) throw Error("mesh.h_list is empty");
    for (std::size_t k = 0; k < h_list.size(); ++k) {
        const double h = h_list[k];
        if (!(h > 0.0)) throw Error("mesh.h_list entries must be positive");
        if (k > 0 && !(h < h_list[k - 1])) throw Error("mesh.h_list must be strictly decreasing");
        for (std::size_t i = 0; i < lower.size(); ++i) {
            const double cells = (upper[i] - lower[i]) / h;
            if (std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells)) {
                throw Error("h = " + std::to_string(h) + " does not divide the domain side");
            }
        }
    }
    if (stencil_N < 2) throw Error("scheme.N must be at least 2");
    if (scheme != "lattice" && scheme != "axes") throw Error("scheme.kind must be lattice or axes");
    if (exact.empty() == boundary_file.empty()) throw Error("give exactly one of boundary.exact and boundary.file");
    if (A && static_cast<std::size_t>(A->rows()) != dim()) throw Error("nonlinearity.A does not match the domain dimension");
}

ProblemConfig problem_config_from(const ConfigFile& f) {
    f.require_known({"nonlinearity.kind", "nonlinearity.lambda", "nonlinearity.Lambda", "nonlinearity.A",
                     "domain.lower", "domain.upper", "domain.T", "boundary.exact", "boundary.file", "mesh.h_list",
                     "scheme.kind", "scheme.N", "solver.tolerance", "solver.max_iterations", "solver.damping",
                     "solver.method", "diagnostics.falsifier", "diagnostics.delta_multiple",
                     "diagnostics.falsifier_samples", "diagnostics.tolerance_factor", "diagnostics.convolution",
                     "diagnostics.theta", "diagnostics.good_set", "diagnostics.M", "diagnostics.good_set_r",
                     "diagnostics.good_set_level", "diagnostics.abp", "seed"});
    ProblemConfig c;
    c.source = f.source();
    c.nonlinearity = f.get_string("nonlinearity.kind", c.nonlinearity);
    c.lambda = f.get_double("nonlinearity.lambda", c.lambda);
    c.Lambda = f.get_double("nonlinearity.Lambda", c.Lambda);
    if (f.has("nonlinearity.A")) c.A = f.get_matrix("nonlinearity.A");
    if (f.has("domain.lower")) c.lower = f.get_list("domain.lower");
    if (f.has("domain.upper")) c.upper = f.get_list("domain.upper");
    c.T = f.get_double("domain.T", c.T);
    if (f.has("boundary.file")) {
        c.boundary_file = f.get_string("boundary.file");
        c.exact = f.get_string("boundary.exact", "");
    } else {
        c.exact = f.get_string("boundary.exact", c.exact);
    }
    if (f.has("mesh.h_list")) c.h_list = f.get_list("mesh.h_list");
    c.scheme = f.get_string("scheme.kind", c.scheme);
    c.stencil_N = static_cast<int>(f.get_int("scheme.N", c.stencil_N));
    c.solver.tolerance = f.get_double("solver.tolerance", c.solver.tolerance);
    c.solver.max_iterations = static_cast<int>(f.get_int("solver.max_iterations", c.solver.max_iterations));
    c.solver.damping = f.get_double("solver.damping", c.solver.damping);
    if (f.has("solver.method")) {
        try {
            c.solver.method = solve_method_from_string(f.get_string("solver.method"));
        } catch (const Error& e) {
            f.fail("solver.method", e.what());
        }
    }
    auto& d = c.diagnostics;
    d.falsifier = f.get_bool("diagnostics.falsifier", d.falsifier);
    d.delta_multiple = f.get_double("diagnostics.delta_multiple", d.delta_multiple);
    d.falsifier_samples = static_cast<int>(f.get_int("diagnostics.falsifier_samples", d.falsifier_samples));
    d.tolerance_factor = f.get_double("diagnostics.tolerance_factor", d.tolerance_factor);
    d.convolution = f.get_bool("diagnostics.convolution", d.convolution);
    d.theta = f.get_double("diagnostics.theta", d.theta);
    d.good_set = f.get_bool("diagnostics.good_set", d.good_set);
    if (f.has("diagnostics.M")) d.M = f.get_list("diagnostics.M");
    d.good_set_r = f.get_double("diagnostics.good_set_r", d.good_set_r);
    d.good_set_level = static_cast<int>(f.get_int("diagnostics.good_set_level", d.good_set_level));
    d.abp = f.get_bool("diagnostics.abp", d.abp);
    if (f.has("seed")) {
        const long s = f.get_int("seed");
        if (s < 0) f.fail("seed", "must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    }
    try {
        c.validate();
    } catch (const Error& e) {
        throw Error(f.source() + ": " + e.what());
    }
    return c;
}

ProblemConfig load_problem_config(const std::string& path) { return problem_config_from(ConfigFile::load(path)); }

}  // namespace parastep
