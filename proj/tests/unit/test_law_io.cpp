#include <doctest.h>

#include <string>

#include "brw/error.hpp"
#include "brw/law_io.hpp"

using namespace brw;

TEST_CASE("parse finite law") {
  const auto spec = parse_law_json(R"({"type":"finite","atoms":[{"p":0.2,"x":[]},{"p":0.8,"x":[0,1]}]})");
  const auto& f = std::get<FiniteLaw>(spec);
  REQUIRE(f.atoms.size() == 2);
  CHECK(f.atoms[0].probability == 0.2);
  CHECK(f.atoms[0].displacements.empty());
  CHECK(f.atoms[1].displacements == std::vector<double>{0.0, 1.0});
}

TEST_CASE("parse log-divergent law") {
  const auto spec = parse_law_json(R"({"type":"log_divergent","a":1.5,"n_max":1000})");
  const auto& l = std::get<LogDivergentLaw>(spec);
  CHECK(l.tail_exponent == 1.5);
  CHECK(l.n_max == 1000);
}

TEST_CASE("round trip") {
  const std::string text = R"({"type":"finite","atoms":[{"p":0.1,"x":[-0.3,2.5]},{"p":0.9,"x":[1e-7]}]})";
  const auto spec = parse_law_json(text);
  const auto again = parse_law_json(law_to_json(spec));
  const auto& a = std::get<FiniteLaw>(spec);
  const auto& b = std::get<FiniteLaw>(again);
  REQUIRE(a.atoms.size() == b.atoms.size());
  for (std::size_t i = 0; i < a.atoms.size(); ++i) {
    CHECK(a.atoms[i].probability == b.atoms[i].probability);
    CHECK(a.atoms[i].displacements == b.atoms[i].displacements);
  }
}

TEST_CASE("parse errors name the atom") {
  const char* bad[] = {
      R"({"type":"finite","atoms":[{"p":0.2,"x":[]},{"p":"x","x":[0,1]}]})",
      R"({"type":"finite","atoms":[{"p":0.2,"x":[]},{"p":0.8}]})",
      R"({"type":"finite","atoms":[{"p":0.2,"x":[]},{"p":0.8,"x":[0,"a"]}]})",
  };
  for (const char* t : bad) {
    try {
      parse_law_json(t);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse);
      CHECK(std::string(e.what()).find("atom 1") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(parse_law_json("{"), Error);
  CHECK_THROWS_AS(parse_law_json(R"({"type":"weird"})"), Error);
  CHECK_THROWS_AS(parse_law_json(R"({"type":"log_divergent"})"), Error);
  CHECK(std::get<LogDivergentLaw>(parse_law_json(R"({"type":"log_divergent","a":1.5})")).n_max ==
        1'000'000);
}

TEST_CASE("missing file") {
  try {
    load_law_file("/nonexistent/law.json");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
}
