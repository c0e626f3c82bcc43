#include "parastep/mesh_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "parastep/error.hpp"

namespace parastep {

namespace {

constexpr const char* kMagic = "parastep-meshfunction";

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s += ',';
        s += fmt_double(v[k]);
    }
    return s;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error("mesh header: bad number '" + item + "'");
        }
    }
    return out;
}

void write_header(std::ostream& out, const MeshSpec& spec) {
    out << kMagic << " n=" << spec.dim() << " h=" << fmt_double(spec.h())
        << " N=" << spec.stencil_range() << " lower=" << fmt_list(spec.domain().lower)
        << " upper=" << fmt_list(spec.domain().upper) << " T=" << fmt_double(spec.horizon())
        << '\n';
}

void write_index(std::ostream& out, const MeshSpec& spec, std::size_t k) {
    const NodeIndex n = spec.node(k);
    for (int i : n.i) out << i << ' ';
    out << n.j << ' ';
}

}  // namespace

void write_mesh_function(std::ostream& out, const MeshFunction& u) {
    const MeshSpec& spec = u.spec();
    write_header(out, spec);
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        write_index(out, spec, k);
        out << fmt_double(u[k]) << '\n';
    }
}

void write_mesh_mask(std::ostream& out, const MeshSpec& spec, std::span<const char> mask) {
    if (mask.size() != spec.node_count()) throw Error("mask size does not match mesh");
    write_header(out, spec);
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        write_index(out, spec, k);
        out << (mask[k] ? 1 : 0) << '\n';
    }
}

MeshFunction read_mesh_function(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("mesh file: missing header line");
    std::istringstream hs(line);
    std::string tok;
    hs >> tok;
    if (tok != kMagic) throw Error("mesh file: header must start with '" + std::string(kMagic) + "'");

    std::size_t n = 0;
    double h = 0.0, T = 0.0;
    int N = 0;
    std::vector<double> lower, upper;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw Error("mesh header: expected key=value, got '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "n") n = std::stoul(val);
        else if (key == "h") h = std::stod(val);
        else if (key == "N") N = std::stoi(val);
        else if (key == "lower") lower = parse_list(val);
        else if (key == "upper") upper = parse_list(val);
        else if (key == "T") T = std::stod(val);
        else throw Error("mesh header: unknown key '" + key + "'");
    }
    if (lower.size() != n || upper.size() != n) throw Error("mesh header: bounds do not match n");
    // Nudge T up by a fraction of a step so the floor() in MeshSpec lands on the written level count.
    MeshSpec spec(h, Box{lower, upper}, T + 0.25 * h * h, N);

    std::vector<double> values(spec.node_count());
    std::vector<char> seen(spec.node_count(), 0);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        NodeIndex node{std::vector<int>(n), 0};
        double v = 0.0;
        for (std::size_t k = 0; k < n; ++k) ls >> node.i[k];
        ls >> node.j >> v;
        std::string extra;
        if (!ls || (ls >> extra) || !spec.contains(node)) {
            throw Error("mesh file line " + std::to_string(line_no) + ": bad node record");
        }
        const std::size_t lin = spec.linear_index(node);
        if (seen[lin]) throw Error("mesh file line " + std::to_string(line_no) + ": duplicate node");
        seen[lin] = 1;
        values[lin] = v;
    }
    for (char s : seen) {
        if (!s) throw Error("mesh file: not every node of the mesh has a value");
    }
    return MeshFunction(spec, std::move(values));
}

nlohmann::json mesh_spec_to_json(const MeshSpec& spec) {
    return nlohmann::json{{"n", spec.dim()},
                          {"h", spec.h()},
                          {"N", spec.stencil_range()},
                          {"lower", spec.domain().lower},
                          {"upper", spec.domain().upper},
                          {"T", spec.horizon()},
                          {"time_levels", spec.time_levels()},
                          {"requested_T", spec.requested_horizon()}};
}

MeshSpec mesh_spec_from_json(const nlohmann::json& j) {
    const double h = j.at("h").get<double>();
    return MeshSpec(h,
                    Box{j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>()},
                    j.at("T").get<double>() + 0.25 * h * h, j.at("N").get<int>());
}

nlohmann::json mesh_function_to_json(const MeshFunction& u) {
    nlohmann::json j = mesh_spec_to_json(u.spec());
    j["values"] = std::vector<double>(u.values().begin(), u.values().end());
    return j;
}

MeshFunction mesh_function_from_json(const nlohmann::json& j) {
    return MeshFunction(mesh_spec_from_json(j), j.at("values").get<std::vector<double>>());
}

}  // namespace parastep
