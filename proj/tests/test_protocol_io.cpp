#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>

#include "fluctwork/errors.hpp"
#include "fluctwork/protocol_io.hpp"
#include "oracles.hpp"

using namespace fluctwork;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_protocol(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("parse a protocol") {
    const Protocol p = parse_protocol(R"({
  "beta": 1.0,
  "initial_levels": [0, 1],
  "steps": [
    {"quench": [0, 2]},
    "thermalize",
    {"quasistatic": [0, 0.5]}
  ]
})");
    CHECK(p.beta().value() == 1.0);
    CHECK(p.initial() == Spectrum{0.0, 1.0});
    REQUIRE(p.steps().size() == 3);
    CHECK(std::holds_alternative<Quench>(p.steps()[0]));
    CHECK(std::holds_alternative<Thermalize>(p.steps()[1]));
    CHECK(std::holds_alternative<QuasiStatic>(p.steps()[2]));
    CHECK(p.final_spectrum() == Spectrum{0.0, 0.5});
}

TEST_CASE("errors carry the offending line") {
    const std::string noncanonical = R"({"beta": 1, "initial_levels": [0, 1], "steps": [
  {"quench": [0, 2]},
  {"quench": [0, 3]}
]})";
    CHECK(error_of(noncanonical).rfind("line 3:", 0) == 0);

    const std::string leading = R"({"beta": 1, "initial_levels": [0, 1], "steps": [
  "thermalize"
]})";
    CHECK(error_of(leading).rfind("line 2:", 0) == 0);

    const std::string size = R"({"beta": 1, "initial_levels": [0, 1], "steps": [
  {"quench": [0, 2]},
  "thermalize",

  {"quench": [0, 2, 4]}
]})";
    CHECK(error_of(size).rfind("line 5:", 0) == 0);

    const std::string unknown = R"({"beta": 1, "initial_levels": [0, 1],
  "stepz": []})";
    CHECK(error_of(unknown).rfind("line 2:", 0) == 0);

    const std::string kind = R"({"beta": 1, "initial_levels": [0, 1], "steps": [
  {"teleport": [0, 2]}
]})";
    CHECK(error_of(kind).rfind("line 2:", 0) == 0);

    CHECK_FALSE(error_of(R"({"beta": -1, "initial_levels": [0, 1], "steps": []})").empty());
    CHECK_FALSE(error_of(R"({"initial_levels": [0, 1], "steps": []})").empty());
    CHECK_FALSE(error_of("{not json").empty());
    CHECK_FALSE(error_of("[1, 2]").empty());
    CHECK_THROWS_AS(load_protocol("/nonexistent/protocol.json"), ValidationError);
}

TEST_CASE("write then parse is lossless") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const Protocol p = oracle::random_protocol(rng).build(trial % 2 == 0);
        const std::string text = protocol_to_json(p);
        const Protocol q = parse_protocol(text);
        CHECK(q.beta().value() == p.beta().value());
        CHECK(q.initial() == p.initial());
        REQUIRE(q.steps().size() == p.steps().size());
        CHECK(protocol_to_json(q) == text);
        CHECK(same_atoms(work_distribution(p), work_distribution(q), 0.0));
    }
}

TEST_CASE("written files put one step per line") {
    const Protocol p(InverseTemperature(1.0), Spectrum{0.0, 1.0}, {Quench{Spectrum{0.0, 2.0}}, Thermalize{}});
    const std::string text = protocol_to_json(p);
    CHECK(text.find("{\"quench\": [0.0, 2.0]}") != std::string::npos);
    CHECK(text.find("\"thermalize\"") != std::string::npos);
}
