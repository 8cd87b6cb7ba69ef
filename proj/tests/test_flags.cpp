#include <set>
#include <sstream>

#include "celldev/flags.hpp"
#include "celldev/neat.hpp"
#include "doctest.h"

using namespace celldev;
using namespace celldev::flags;

namespace {

constexpr double kUniformVsBands = 0.7499961553248751;

std::set<int> distinct_levels(const GrayImage& img) {
  return {img.levels().begin(), img.levels().end()};
}

neat::Genome zero_weights(neat::IoShape io) {
  neat::NeatConfig cfg;
  cfg.pop_size = 2;
  neat::InnovationRegistry reg;
  auto rng = stream(0);
  auto g = neat::init_population(cfg, io, neuro::Topology::feedforward, reg, rng)[0];
  for (auto& c : g.conns) c.weight = 0.0;
  return g;
}

}  // namespace

TEST_CASE("targets") {
  const auto two = make_target(TargetKind::two_bands, 32, 32);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) CHECK(two.at(r, c) == (r < 16 ? 0 : 255));
  CHECK(distinct_levels(two) == std::set<int>{0, 255});

  const auto three = make_target(TargetKind::three_bands, 32, 32);
  CHECK(distinct_levels(three) == std::set<int>{0, 128, 255});
  CHECK(three.at(9, 0) == 0);
  CHECK(three.at(10, 0) == 128);
  CHECK(three.at(21, 0) == 128);
  CHECK(three.at(22, 0) == 255);

  const auto disc = make_target(TargetKind::disc, 32, 32);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) CHECK(disc.at(r, c) == disc.at(r, 31 - c));
  CHECK(disc.at(16, 16) == 255);
  CHECK(disc.at(0, 0) == 0);

  const auto halves = make_target(TargetKind::half_discs, 32, 32);
  CHECK(distinct_levels(halves) == std::set<int>{0, 128, 255});
  CHECK(halves.at(0, 16) == 128);
  CHECK(halves.at(31, 16) == 255);
  CHECK(halves.at(16, 0) == 0);

  for (auto kind : {TargetKind::two_bands, TargetKind::three_bands, TargetKind::disc,
                    TargetKind::half_discs}) {
    CHECK(make_target(kind, 17, 11) == make_target(kind, 17, 11));
    CHECK(similarity(make_target(kind, 16, 16), make_target(kind, 16, 16)) == 1.0);
    CHECK(parse_target_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(make_target(TargetKind::disc, 1, 5), std::invalid_argument);
  CHECK_THROWS_AS(parse_target_kind("tricolore"), std::invalid_argument);
}

TEST_CASE("discretize") {
  CHECK(discretize(0.0) == 0);
  CHECK(discretize(1.0) == 255);
  CHECK(discretize(0.5) == 128);
  CHECK(discretize(1.7) == 255);
  CHECK(discretize(-0.2) == 0);
  CHECK(discretize(std::nan("")) == 0);
  CHECK(discretize(127.4 / 255.0) == 127);
}

TEST_CASE("similarity") {
  const GrayImage black(8, 8, 0), white(8, 8, 255);
  CHECK(similarity(black, black) == 1.0);
  CHECK(similarity(black, white) == 0.0);
  const auto bands = make_target(TargetKind::two_bands, 32, 32);
  const GrayImage grey(32, 32, 128);
  CHECK(similarity(grey, bands) == doctest::Approx(kUniformVsBands).epsilon(1e-14));
  CHECK(similarity(bands, grey) == similarity(grey, bands));
  CHECK_THROWS_AS(similarity(black, GrayImage(8, 9)), std::invalid_argument);
}

TEST_CASE("variants") {
  for (std::string name : {"1-ffwd", "1-recurr", "2-ffwd", "2-recurr", "regression"})
    CHECK(parse_variant(name).name() == name);
  CHECK(parse_variant("2-recurr").io().inputs == 8);
  CHECK(parse_variant("2-recurr").io().outputs == 3);
  CHECK(parse_variant("regression").io().inputs == 2);
  CHECK_THROWS_AS(parse_variant("3-ffwd"), std::invalid_argument);
}

TEST_CASE("evaluate") {
  const auto bands = make_target(TargetKind::two_bands, 32, 32);
  const devo::GrowthConfig growth;

  SUBCASE("zero-weight developmental genome") {
    const auto e = evaluate(zero_weights({4, 2}), parse_variant("1-ffwd"), bands, growth);
    CHECK(e.converged);
    CHECK(e.iterations == 9);
    CHECK(e.fitness == doctest::Approx(kUniformVsBands).epsilon(1e-12));
  }
  SUBCASE("constant regression genome") {
    const auto e = evaluate(zero_weights({2, 1}), parse_variant("regression"), bands, growth);
    CHECK(e.fitness == doctest::Approx(kUniformVsBands).epsilon(1e-12));
  }
  SUBCASE("non-converging genome scores zero") {
    // A self-exciting, self-inhibiting oscillator: output flips each step.
    neat::Genome g = zero_weights({4, 2});
    g.kind = neuro::Topology::recurrent;
    g.add_conn({100, 5, 5, -12.0, true});
    g.add_conn({101, 6, 6, -12.0, true});
    g.add_conn({102, 4, 5, 6.0, true});
    g.add_conn({103, 4, 6, 6.0, true});
    devo::GrowthConfig short_growth;
    short_growth.max_iterations = 64;
    const auto e = evaluate(g, parse_variant("1-recurr"), bands, short_growth);
    CHECK_FALSE(e.converged);
    CHECK(e.fitness == 0.0);
  }
  SUBCASE("arity mismatch") {
    CHECK_THROWS_AS(evaluate(zero_weights({4, 2}), parse_variant("2-ffwd"), bands, growth),
                    std::invalid_argument);
  }
  SUBCASE("deterministic") {
    neat::NeatConfig cfg;
    cfg.pop_size = 2;
    neat::InnovationRegistry reg;
    auto rng = stream(3);
    auto g = neat::init_population(cfg, {4, 2}, neuro::Topology::feedforward, reg, rng)[0];
    g = neat::mutate_add_node(std::move(g), reg, rng);
    const auto v = parse_variant("1-ffwd");
    CHECK(evaluate(g, v, bands, growth).fitness == evaluate(g, v, bands, growth).fitness);
  }
}

TEST_CASE("graymap read/write") {
  const auto img = make_target(TargetKind::half_discs, 13, 7);
  for (auto format : {PgmFormat::ascii, PgmFormat::binary}) {
    std::stringstream buf;
    write_pgm(buf, img, format);
    CHECK(read_pgm(buf) == img);
  }
  SUBCASE("ascii layout") {
    std::stringstream buf;
    write_pgm(buf, GrayImage(2, 2, 7), PgmFormat::ascii);
    CHECK(buf.str() == "P2\n2 2\n255\n7 7\n7 7\n");
  }
  SUBCASE("comments and smaller maxval") {
    std::stringstream buf("P2\n# made by hand\n2 1\n15\n0 15\n");
    const auto read = read_pgm(buf);
    CHECK(read.at(0, 0) == 0);
    CHECK(read.at(0, 1) == 255);
  }
  SUBCASE("malformed input") {
    std::stringstream bad_magic("P6\n1 1\n255\n0");
    CHECK_THROWS(read_pgm(bad_magic));
    std::stringstream truncated("P5\n4 4\n255\nab");
    CHECK_THROWS(read_pgm(truncated));
    std::stringstream out_of_range("P2\n1 1\n10\n11\n");
    CHECK_THROWS(read_pgm(out_of_range));
  }
}
