#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parastep/geometry.hpp"
#include "parastep/nonlinearity.hpp"
#include "parastep/solver.hpp"

namespace parastep {

// Flat key=value text. Keys may be dotted ("solver.tolerance"), '#' starts a
// comment, lists are bracketed ("[1/8, 1/16]") and matrices are bracketed row
// lists ("[[2,0],[0,1]]"). Numbers accept a/b fractions.
class ConfigFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static ConfigFile parse(std::istream& in, const std::string& source = "<config>");
    static ConfigFile load(const std::string& path);

    const std::string& source() const { return source_; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const std::map<std::string, Entry>& entries() const { return entries_; }

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    long get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<double> get_list(const std::string& key) const;
    Matrix get_matrix(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value);
    /// Throws with the line of the first key not in `known`.
    void require_known(const std::vector<std::string>& known) const;

    /// "source:line: message"
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    std::string source_;
    std::map<std::string, Entry> entries_;
};

/// Number with optional "a/b" form. Throws on trailing garbage.
double parse_number(const std::string& text);
std::vector<double> parse_list(const std::string& text);
Matrix parse_matrix(const std::string& text);

struct DiagnosticsToggles {
    bool falsifier = true;
    double delta_multiple = 1.0;  ///< delta = multiple * N * h
    int falsifier_samples = 200;
    double tolerance_factor = 10.0;  ///< violation tolerance = factor * K * h
    bool convolution = true;
    double theta = 0.05;
    bool good_set = true;
    std::vector<double> M = {1, 2, 4, 8, 16, 32, 64, 128, 256};
    double good_set_r = 0.45;
    int good_set_level = 20;  ///< t-bar = level * tau
    bool abp = true;

    bool any() const { return falsifier || convolution || good_set || abp; }
};

struct ProblemConfig {
    std::string source = "<defaults>";
    std::string nonlinearity = "heat";  ///< heat | linear | pucci_plus | pucci_minus
    double lambda = 1.0;
    double Lambda = 2.0;
    std::optional<Matrix> A;
    std::vector<double> lower = {0.0};
    std::vector<double> upper = {1.0};
    double T = 0.25;
    std::string exact = "heat_sine";  ///< exact solution id, empty with boundary_file
    std::string boundary_file;
    std::vector<double> h_list = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    std::string scheme = "lattice";  ///< lattice | axes
    int stencil_N = 2;
    SolveConfig solver;
    DiagnosticsToggles diagnostics;
    std::optional<std::uint64_t> seed;

    std::size_t dim() const { return lower.size(); }
    Box domain() const { return {lower, upper}; }
    NonlinearityDescriptor make_nonlinearity() const;
    /// Strictly decreasing h list, each h dividing every side, N >= 1, T > 0.
    void validate() const;
};

ProblemConfig problem_config_from(const ConfigFile& file);
ProblemConfig load_problem_config(const std::string& path);

}  // namespace parastep
