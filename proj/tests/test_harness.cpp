#include <filesystem>
#include <fstream>
#include <sstream>

#include "celldev/harness.hpp"
#include "doctest.h"

using namespace celldev;
using namespace celldev::harness;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("celldev-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.width = cfg.height = 6;
  cfg.neat.pop_size = 4;
  cfg.set_generations(1);
  cfg.threads = 1;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

neat::Genome zero_genome(int chemicals) {
  neat::NeatConfig cfg;
  cfg.pop_size = 2;
  neat::InnovationRegistry reg;
  auto rng = stream(0);
  auto g = neat::init_population(cfg, {4 * chemicals, chemicals + 1},
                                 neuro::Topology::feedforward, reg, rng)[0];
  for (auto& c : g.conns) c.weight = 0.0;
  return g;
}

}  // namespace

TEST_CASE("run_evolution smoke contract") {
  const auto record = run_evolution(tiny_config(), 0);
  CHECK(record.generations.size() == 1);
  CHECK(record.online_curve().size() == 1);
  CHECK(record.evaluations == 4);
  CHECK(neat::from_text(neat::to_text(record.best_genome)) == record.best_genome);
}

TEST_CASE("runs are deterministic and the online curve never drops") {
  auto cfg = tiny_config();
  cfg.neat.pop_size = 20;
  cfg.set_generations(6);
  for (auto name : {"1-ffwd", "2-recurr", "regression"}) {
    cfg.variant = flags::parse_variant(name);
    const auto a = run_evolution(cfg, 2);
    auto threaded = cfg;
    threaded.threads = 3;
    const auto b = run_evolution(threaded, 2);
    CHECK(a.best_genome == b.best_genome);
    CHECK(a.online_curve() == b.online_curve());
    CHECK(a.seed == cfg.seed + 2);
    const auto curve = a.online_curve();
    for (std::size_t g = 1; g < curve.size(); ++g) CHECK(curve[g] >= curve[g - 1]);
    CHECK(a.best_fitness == curve.back());
  }
}

TEST_CASE("five-number summary") {
  const auto one = five_number_summary({0.42});
  CHECK(one.min == 0.42);
  CHECK(one.lower == 0.42);
  CHECK(one.median == 0.42);
  CHECK(one.upper == 0.42);
  CHECK(one.max == 0.42);
  const auto five = five_number_summary({0.5, 0.1, 0.4, 0.2, 0.3});
  CHECK(five.min == 0.1);
  CHECK(five.lower == 0.2);
  CHECK(five.median == 0.3);
  CHECK(five.upper == 0.4);
  CHECK(five.max == 0.5);
  const auto even = five_number_summary({1, 2, 3, 4, 5, 6});
  CHECK(even.lower == 2.0);
  CHECK(even.median == 3.5);
  CHECK(even.upper == 5.0);
  CHECK_THROWS(five_number_summary({}));
}

TEST_CASE("run_batch") {
  auto cfg = tiny_config();
  cfg.runs = 3;
  cfg.set_generations(2);
  const auto batch = run_batch(cfg);
  CHECK(batch.runs.size() == 3);
  CHECK(batch.final_fitness.size() == 3);
  CHECK(batch.mean_online_curve.size() == 2);
  CHECK(batch.summary.min <= batch.summary.median);
  CHECK(batch.summary.median <= batch.summary.max);
  const auto again = run_batch(cfg);
  CHECK(again.final_fitness == batch.final_fitness);

  cfg.runs = 1;
  const auto single = run_batch(cfg);
  CHECK(single.summary.min == single.summary.max);
  CHECK(single.summary.median == single.final_fitness[0]);
}

TEST_CASE("self-healing without perturbation recovers exactly") {
  const auto target = flags::make_target(flags::TargetKind::two_bands, 8, 8);
  const devo::GrowthConfig growth;
  HealingOptions opts;
  opts.trials = 5;
  opts.sigma = 0.0;
  const auto report =
      self_healing_experiment(zero_genome(1), flags::parse_variant("1-ffwd"), target, growth, opts);
  CHECK(report.exact_fraction == 1.0);
  for (const auto& t : report.trials) {
    CHECK(t.outcome == Recovery::exact);
    CHECK(t.iterations <= growth.stability_window);
  }

  SUBCASE("perturbation of a contracting controller heals") {
    opts.sigma = 1.0;
    const auto healed = self_healing_experiment(zero_genome(1), flags::parse_variant("1-ffwd"),
                                                target, growth, opts);
    CHECK(healed.exact_fraction == 1.0);
    opts.random_init = true;
    const auto random = self_healing_experiment(zero_genome(1), flags::parse_variant("1-ffwd"),
                                                target, growth, opts);
    CHECK(random.exact_fraction == 1.0);
  }
  SUBCASE("non-convergent champion is an error") {
    devo::GrowthConfig never;
    never.max_iterations = 3;
    CHECK_THROWS_AS(self_healing_experiment(zero_genome(1), flags::parse_variant("1-ffwd"),
                                            target, never, opts),
                    std::runtime_error);
  }
}

TEST_CASE("snapshot_growth") {
  const auto dir = scratch_dir("snap");
  const devo::GrowthConfig growth;
  const auto result = snapshot_growth(zero_genome(2), flags::parse_variant("2-ffwd"), 5, 4,
                                      growth, {0, 3, 30}, dir.string(), "zero-");
  CHECK(result.files.size() == 9);
  CHECK(result.converged);
  CHECK(result.final_iteration == 9);
  REQUIRE(result.notes.size() == 1);
  CHECK(result.notes[0].find("30") != std::string::npos);
  for (const auto& f : result.files) CHECK_NOTHROW(flags::load_pgm(f));
  CHECK(flags::load_pgm((dir / "zero-iter-00000-phenotype.pgm").string()) ==
        flags::GrayImage(5, 4, 0));
  CHECK(flags::load_pgm((dir / "zero-iter-00003-chem2.pgm").string()) ==
        flags::GrayImage(5, 4, 128));
  CHECK(slurp(dir / "zero-iter-00003-phenotype.pgm") ==
        slurp(dir / "zero-iter-00030-phenotype.pgm"));
  CHECK(std::filesystem::exists(dir / "zero-snapshots.txt"));
}

TEST_CASE("csv export") {
  const auto dir = scratch_dir("csv");
  const auto record = run_evolution(tiny_config(), 0);
  const auto path = (dir / "run.csv").string();
  export_csv(record, path);
  std::ifstream in(path);
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "generation,best_fitness,mean_fitness,species_count,mean_genome_edges");
  CHECK_FALSE(std::getline(in, extra));
  CHECK(row.find(';') == std::string::npos);

  const auto rows = read_run_csv(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].best_fitness == record.generations[0].best_fitness);
  CHECK(rows[0].mean_fitness == record.generations[0].mean_fitness);
  CHECK(rows[0].mean_genome_edges == record.generations[0].mean_genome_edges);

  CHECK_THROWS(export_csv(record, (dir / "missing" / "x.csv").string()));
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.0, 0.1, 1.0 / 3.0, 0.7499961553248751, 1e-300, -2.5})
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("config files") {
  std::istringstream text(
      "# desk run\n[run]\nvariant = 2-recurr\ntarget = disc\ngrid = 12x10\nseed = 9\n"
      "[neat]\npop_size = 50\ngenerations = 7 ; comment\ncompat_threshold = 2.5\n"
      "[growth]\nstability_window = 4\n");
  const auto cfg = apply_config(ConfigFile::parse(text), RunConfig{});
  CHECK(cfg.variant == flags::parse_variant("2-recurr"));
  CHECK(cfg.target == flags::TargetKind::disc);
  CHECK(cfg.width == 12);
  CHECK(cfg.height == 10);
  CHECK(cfg.seed == 9);
  CHECK(cfg.neat.pop_size == 50);
  CHECK(cfg.generations() == 7);
  CHECK(cfg.neat.compat_threshold == 2.5);
  CHECK(cfg.growth.stability_window == 4);

  std::istringstream echo(describe(cfg));
  const auto back = apply_config(ConfigFile::parse(echo), RunConfig{});
  CHECK(describe(back) == describe(cfg));

  // A manifest replays: its [results] section is skipped.
  std::istringstream manifest(describe(cfg) + "\n[results]\nrun-000.best_fitness = 0.9\n");
  CHECK(describe(apply_config(ConfigFile::parse(manifest), RunConfig{})) == describe(cfg));

  std::istringstream unknown("[neat]\npopsize = 3\n");
  CHECK_THROWS_AS(apply_config(ConfigFile::parse(unknown), RunConfig{}), std::invalid_argument);
  std::istringstream garbage("[neat]\npop_size = many\n");
  CHECK_THROWS_AS(apply_config(ConfigFile::parse(garbage), RunConfig{}), std::invalid_argument);
  std::istringstream no_eq("[run]\nvariant\n");
  CHECK_THROWS_AS(ConfigFile::parse(no_eq), std::runtime_error);

  CHECK(parse_grid("16x8") == std::pair{16, 8});
  CHECK(parse_grid("32") == std::pair{32, 32});
  CHECK_THROWS(parse_grid("3by4"));
}

TEST_CASE("presets") {
  const auto paper = paper_preset();
  CHECK(paper.neat.pop_size == 500);
  CHECK(paper.generations() == 500);
  CHECK(paper.width == 32);
  CHECK(paper.runs == 16);
  const auto desk = desk_preset();
  CHECK(desk.width == 16);
  CHECK(desk.neat.pop_size == 150);
  CHECK(desk.generations() == 150);
}
