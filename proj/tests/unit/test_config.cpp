#include <sstream>

#include "doctest.h"
#include "parastep/config.hpp"
#include "parastep/error.hpp"

using namespace parastep;

namespace {

ConfigFile parse(const std::string& text) {
    std::istringstream in(text);
    return ConfigFile::parse(in, "test.cfg");
}

}  // namespace

TEST_CASE("values, lists and matrices") {
    const auto f = parse("# comment\n"
                         "a.b = 1/8   # trailing\n"
                         "list = [1/8, 0.0625, 3e-2]\n"
                         "mat = [[2, 1], [1, 2]]\n"
                         "flag = on\n"
                         "name = heat\n");
    CHECK(f.get_double("a.b") == 0.125);
    CHECK(f.get_list("list") == std::vector<double>{0.125, 0.0625, 0.03});
    const Matrix M = f.get_matrix("mat");
    CHECK(M(0, 1) == 1.0);
    CHECK(M(1, 1) == 2.0);
    CHECK(f.get_bool("flag"));
    CHECK(f.get_string("name") == "heat");
    CHECK(f.get_double("missing", 4.0) == 4.0);
}

TEST_CASE("diagnostics carry line numbers") {
    CHECK_THROWS_WITH_AS(parse("a = 1\nno equals here\n"), doctest::Contains("test.cfg:2"), Error);
    CHECK_THROWS_WITH_AS(parse("a = 1\na = 2\n"), doctest::Contains("test.cfg:2"), Error);
    const auto f = parse("x = 1\ny = [1, 2\nz = abc\n");
    CHECK_THROWS_WITH_AS(f.get_list("y"), doctest::Contains("test.cfg:2"), Error);
    CHECK_THROWS_WITH_AS(f.get_double("z"), doctest::Contains("test.cfg:3"), Error);
    CHECK_THROWS_WITH_AS(problem_config_from(parse("domian.T = 1\n")), doctest::Contains("unknown key"), Error);
}

TEST_CASE("problem config validation") {
    const auto c = problem_config_from(parse("nonlinearity.kind = pucci_minus\nboundary.exact = pucci_minus_concave\n"
                                             "mesh.h_list = [1/4, 1/8]\nseed = 5\n"));
    CHECK(c.nonlinearity == "pucci_minus");
    CHECK(c.h_list.size() == 2);
    CHECK(c.seed == 5u);
    CHECK(c.make_nonlinearity().kind() == NonlinearityKind::pucci_minus);
    CHECK_THROWS_WITH_AS(problem_config_from(parse("mesh.h_list = [1/8, 1/4]\n")), doctest::Contains("decreasing"),
                         Error);
    CHECK_THROWS_WITH_AS(problem_config_from(parse("mesh.h_list = [0.3]\n")), doctest::Contains("divide"), Error);
    CHECK_THROWS_AS(problem_config_from(parse("solver.method = newton\n")), Error);
}
