#include "helpers.hpp"

#include "r0kit/model_io.hpp"

#include <doctest.h>

using namespace r0kit;

namespace {

const char* kAgeModel = R"(# age model
[domain]
x0 = 0
x_max = inf

[rates]
gamma = const:1
mu = const:1      ; constant mortality
beta = powexp:1,2,1

[diffusion]
D = 2

[birth]
multiplicity = 1
)";

}  // namespace

TEST_SUITE("model_io") {
  TEST_CASE("parses every section") {
    const ModelSpec m = parse_model(kAgeModel);
    CHECK(m.x0 == 0.0);
    CHECK(m.infinite_domain());
    CHECK(m.diffusion == 2.0);
    CHECK(m.is_age_model());
    CHECK(std::holds_alternative<PowerExpRate>(m.beta.family()));
    CHECK(!m.birth_sample_point);
  }

  TEST_CASE("rate strings") {
    CHECK(parse_rate("const:2.5").constant_value() == 2.5);
    CHECK(std::get<StepRate>(parse_rate("step:1,2.718").family()).level == doctest::Approx(2.718));
    CHECK(std::get<ProportionalToMuRate>(parse_rate("prop_mu:0.5").family()).factor == 0.5);
    CHECK_THROWS_AS(parse_rate("powexp:1,2"), ParseError);
    CHECK_THROWS_AS(parse_rate("gauss:1"), ParseError);
    CHECK_THROWS_AS(parse_rate("const:abc"), ParseError);
    CHECK_THROWS_AS(parse_rate("2.0"), ParseError);
  }

  TEST_CASE("tables resolve relative to the model file") {
    testing::TempDir dir;
    dir.write("beta.csv", "x,value\n0,0\n1,2\n3,1\n");
    const auto path = dir.write("m.model",
                                "[domain]\nx0 = 0\nx_max = 5\n[rates]\ngamma = const:1\n"
                                "mu = const:1\nbeta = table:beta.csv\n[birth]\nsample_point = 4\n");
    const ModelSpec m = load_model(path);
    CHECK(m.beta_at(0.5) == doctest::Approx(1.0));
    CHECK(m.beta_at(2.0) == doctest::Approx(1.5));
    CHECK(m.birth_sample_point == 4.0);
    CHECK(m.x_max == 5.0);
  }

  TEST_CASE("malformed files are rejected") {
    CHECK_THROWS_WITH_AS(parse_model("[domain]\nx0 = 0\n"), doctest::Contains("missing required"),
                         ParseError);
    CHECK_THROWS_WITH_AS(parse_model("[domain]\nx0 = 0\nx0 = 1\n"),
                         doctest::Contains("duplicate"), ParseError);
    CHECK_THROWS_WITH_AS(parse_model("[domain]\nwidth = 0\n"), doctest::Contains("unknown key"),
                         ParseError);
    CHECK_THROWS_WITH_AS(parse_model("[space]\n"), doctest::Contains("unknown section"),
                         ParseError);
    CHECK_THROWS_WITH_AS(parse_model("x0 = 1\n"), doctest::Contains("outside"), ParseError);
    CHECK_THROWS_WITH_AS(parse_model("[domain]\nx0 1\n"), doctest::Contains("line 2"),
                         ParseError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), ParseError);
  }
}
