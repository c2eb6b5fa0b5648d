#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "ecd/csv.hpp"
#include "ecd/error.hpp"
#include "ecd/model_io.hpp"
#include "ecd/population.hpp"

using namespace ecd;

TEST_CASE("csv helpers") {
  CHECK(csv::split(" a, b ,c\r") == std::vector<std::string>{"a", "b", "c"});
  CHECK(csv::split("") == std::vector<std::string>{""});
  CHECK(csv::num(0.1) == "0.1");
  CHECK(csv::num(-1.377) == "-1.377");
  CHECK(std::stod(csv::num(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK_THROWS_AS(csv::parse_double("x", 4, "size"), LoadError);
  CHECK_THROWS_AS(csv::parse_int("2.5", 4, "size"), LoadError);
  std::ostringstream out;
  csv::write_header_comment(out, "one\ntwo");
  CHECK(out.str() == "# one\n# two\n");
}

TEST_CASE("population file loading") {
  std::istringstream ok("# comment\nhousehold_id,size\nh1,2\n\nh2,4\n");
  const auto pop = load_population(ok);
  REQUIRE(pop.size() == 2);
  CHECK(pop.households[1].id == "h2");
  CHECK(pop.households[1].size == 4);
  CHECK(pop.source == Population::Source::File);
}

TEST_CASE("population errors cite the offending line") {
  auto error_of = [](const std::string& text) -> std::string {
    std::istringstream in(text);
    try {
      load_population(in);
    } catch (const LoadError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(error_of("household_id,size\nh1,2\nh2,0\n").find("line 3") == 0);
  CHECK(error_of("household_id,size\nh1,2\nh1,3\n").find("line 3: duplicate") == 0);
  CHECK(error_of("household_id,size\nh1,two\n").find("line 2") == 0);
  CHECK(error_of("household_id,size\nh1\n").find("line 2") == 0);
  CHECK(error_of("id,size\nh1,2\n").find("line 1") == 0);
  CHECK(!error_of("household_id,size\n").empty());
  CHECK_THROWS_AS(load_population_file("/nonexistent/pop.csv"), LoadError);
}

TEST_CASE("synthetic population is reproducible and matches its profile") {
  const auto spec = default_population_spec();
  CHECK(spec.count == 933);
  CHECK(spec.seed == 7);
  CHECK(spec.sizes.mean() == doctest::Approx(2.43).epsilon(1e-12));
  const auto a = synthetic_population(spec), b = synthetic_population(spec);
  REQUIRE(a.size() == 933);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.households[i].id == b.households[i].id);
    CHECK(a.households[i].size == b.households[i].size);
  }
  CHECK(a.households.front().id == "h001");
  CHECK(a.source == Population::Source::Synthetic);
  double mean = 0.0;
  for (const auto& h : a.households) mean += h.size;
  mean /= 933.0;
  CHECK(std::abs(mean - 2.43) < 0.15);

  auto other = spec;
  other.seed = 8;
  const auto c = synthetic_population(other);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a.households[i].size != c.households[i].size;
  CHECK(differs);

  SizeDistribution bad{{0.5, 0.4}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("population write and reload round trip") {
  SyntheticSpec spec{{{0.5, 0.5}}, 25, 3};
  const auto pop = synthetic_population(spec);
  std::stringstream buf;
  write_population(buf, pop, "ecd test config_hash=0 seed=3");
  CHECK(buf.str().rfind("# ecd test", 0) == 0);
  const auto back = load_population(buf);
  REQUIRE(back.size() == pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CHECK(back.households[i].id == pop.households[i].id);
    CHECK(back.households[i].size == pop.households[i].size);
  }
}

TEST_CASE("parameter JSON round trip and partial overrides") {
  ChoiceModelParams p;
  p.alpha = 9.5;
  p.beta_fee = -2.25;
  CHECK(params_from_json(to_json(p)) == p);
  const auto partial = params_from_json(json{{"alpha", 20.0}});
  CHECK(partial.alpha == 20.0);
  CHECK(partial.beta_fee == ChoiceModelParams{}.beta_fee);
  CHECK(params_from_json(json{{"_meta", {{"header", "x"}}}, {"alpha", 3.0}}).alpha == 3.0);
  CHECK_THROWS_AS(params_from_json(json{{"alhpa", 1.0}}), ConfigError);
  CHECK_THROWS_AS(params_from_json(json{{"alpha", "big"}}), ConfigError);
  CHECK_THROWS_AS(params_from_json(json::array()), ConfigError);
}

TEST_CASE("scenario JSON round trip") {
  for (const auto& name : builtin_scenario_names()) {
    const auto s = builtin_scenario(name);
    const auto back = scenario_from_json(to_json(s));
    CHECK(back.name == s.name);
    REQUIRE(back.options.size() == s.options.size());
    for (std::size_t i = 0; i < s.options.size(); ++i) {
      CHECK(back.options[i].id == s.options[i].id);
      CHECK(back.options[i].speed == s.options[i].speed);
      CHECK(back.options[i].date == s.options[i].date);
      const auto& a = back.options[i].fees.brackets();
      const auto& b = s.options[i].fees.brackets();
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].lower == b[k].lower);
        CHECK(a[k].upper == b[k].upper);
        CHECK(a[k].fee == b[k].fee);
      }
    }
    CHECK(back.ov_grid == s.ov_grid);
    CHECK(back.tv_grid == s.tv_grid);
  }
  Scenario with = builtin_scenario("S1");
  with.overrides = {{"alpha", 8.0}};
  CHECK(scenario_from_json(to_json(with)).overrides == with.overrides);
}

TEST_CASE("scenario JSON schema violations name the field") {
  auto j = to_json(builtin_scenario("S1"));
  auto message = [](const json& bad) -> std::string {
    try {
      scenario_from_json(bad);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  auto no_options = j;
  no_options.erase("options");
  CHECK(message(no_options).find("options") != std::string::npos);
  auto bad_speed = j;
  bad_speed["options"][1]["speed"] = "overnight";
  CHECK(message(bad_speed).find("options[1]") != std::string::npos);
  auto gap = j;
  gap["options"][0]["fees"][1]["lower"] = 30;
  CHECK(message(gap).find("fees") != std::string::npos);
  auto bad_param = j;
  bad_param["params"] = {{"alpha", "x"}};
  CHECK(!message(bad_param).empty());
}

TEST_CASE("JSON files") {
  CHECK_THROWS_AS(read_json_file("/nonexistent/file.json"), LoadError);
}
