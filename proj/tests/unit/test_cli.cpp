#include <vector>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "parastep/cli.hpp"

using namespace parastep;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "parastep");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

const std::string configs = PARASTEP_CONFIG_DIR;

}  // namespace

TEST_CASE("help and usage errors") {
    std::string out;
    CHECK(run({"--help"}, &out) == 0);
    CHECK(out.find("converge") != std::string::npos);
    CHECK(run({}) == 1);
    CHECK(run({"converge", "--bogus"}) == 1);
}

TEST_CASE("malformed config exits 1 with a line number") {
    const fs::path dir = fs::temp_directory_path() / "parastep_cli_bad";
    fs::create_directories(dir);
    std::ofstream(dir / "bad.cfg") << "nonlinearity.kind = heat\nmesh.h_list = [1/8, oops]\n";
    std::string err;
    CHECK(run({"converge", "--config", (dir / "bad.cfg").string()}, nullptr, &err) == 1);
    CHECK(err.find("bad.cfg:2") != std::string::npos);
}

TEST_CASE("converge writes identical CSV for identical seeds") {
    const fs::path a = fs::temp_directory_path() / "parastep_cli_a", b = fs::temp_directory_path() / "parastep_cli_b";
    CHECK(run({"converge", "--config", configs + "/heat.cfg", "--out", a.string(), "--seed", "7"}) == 0);
    CHECK(run({"converge", "--config", configs + "/heat.cfg", "--out", b.string(), "--seed", "7", "--threads", "2"}) == 0);
    const std::string csv = slurp(a / "convergence.csv");
    CHECK(csv == slurp(b / "convergence.csv"));
    CHECK(csv.rfind("# parastep converge seed=7", 0) == 0);
    CHECK(fs::exists(a / "summary.json"));
}

TEST_CASE("flag overrides and other subcommands") {
    const fs::path d = fs::temp_directory_path() / "parastep_cli_misc";
    std::string out;
    CHECK(run({"solve", "--h-list", "1/8,1/16", "--out", d.string()}, &out) == 0);
    CHECK(out.find("seed=101") != std::string::npos);
    CHECK(fs::exists(d / "solution.txt"));
    CHECK(run({"certify", "--config", configs + "/pucci_plus.cfg", "--out", d.string(), "--strict"}, &out) == 0);
    CHECK(out.find("seed=404") != std::string::npos);
    CHECK(run({"converge", "--h-list", "1/8,1/16,1/32", "--scheme", "axes", "--stencil-N", "2", "--out", d.string()}) == 0);
    CHECK(run({"converge", "--scheme", "hexagonal", "--out", d.string()}) == 1);
}

TEST_CASE("diagnose on noisy input is strict-fatal") {
    const fs::path d = fs::temp_directory_path() / "parastep_cli_diag";
    CHECK(run({"solve", "--h-list", "1/16", "--out", d.string()}) == 0);
    // perturb the grid values
    std::ifstream in(d / "solution.txt");
    std::ostringstream noisy;
    std::string line;
    std::getline(in, line);
    noisy << line << "\n";
    int k = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        int i, j;
        double v;
        ls >> i >> j >> v;
        noisy << i << ' ' << j << ' ' << v + ((k++ * 7919) % 13 - 6) * 0.01 << "\n";
    }
    std::ofstream(d / "noisy.txt") << noisy.str();
    std::string out;
    const std::string cfg = d.string() + "/diag.cfg";
    std::ofstream(cfg) << "mesh.h_list = [1/16]\ndiagnostics.good_set = false\ndiagnostics.convolution = false\n";
    CHECK(run({"diagnose", "--config", cfg, "--input", (d / "noisy.txt").string(), "--out", d.string()}, &out) == 0);
    CHECK(run({"diagnose", "--config", cfg, "--input", (d / "noisy.txt").string(), "--out", d.string(), "--strict"}) == 2);
    CHECK(out.find("certificate super") != std::string::npos);
    CHECK(run({"diagnose", "--config", cfg, "--out", d.string(), "--strict"}) == 0);
}
