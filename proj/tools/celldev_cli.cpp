// Command-line driver: evolve, batch, heal, snapshot, target.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "celldev/harness.hpp"

namespace fs = std::filesystem;
using namespace celldev;
using harness::format_double;

namespace {

struct RunOptions {
  std::string preset = "paper";
  std::string config;
  std::optional<std::string> target;
  std::optional<std::string> variant;
  std::optional<std::string> grid;
  std::optional<int> pop;
  std::optional<int> generations;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> runs;
  std::optional<int> threads;
  bool quiet = false;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--preset", o.preset, "Base settings: paper or desk")
      ->check(CLI::IsMember({"paper", "desk"}));
  cmd->add_option("--config", o.config, "key=value config file applied over the preset");
  cmd->add_option("--target", o.target, "2bands, 3bands, disc or halfdiscs");
  cmd->add_option("--variant", o.variant, "1-ffwd, 1-recurr, 2-ffwd, 2-recurr or regression");
  cmd->add_option("--grid", o.grid, "Grid size WxH");
  cmd->add_option("--pop", o.pop, "Population size");
  cmd->add_option("--generations", o.generations, "Number of generations");
  cmd->add_option("--seed", o.seed, "Base seed (run r uses seed + r)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--threads", o.threads, "Evaluation workers (0 = all cores)");
  cmd->add_flag("--quiet", o.quiet, "No per-generation progress");
}

harness::RunConfig build_config(const RunOptions& o) {
  auto cfg = o.preset == "desk" ? harness::desk_preset() : harness::paper_preset();
  if (!o.config.empty()) cfg = harness::apply_config(harness::ConfigFile::load(o.config), cfg);
  if (o.target) cfg.target = flags::parse_target_kind(*o.target);
  if (o.variant) cfg.variant = flags::parse_variant(*o.variant);
  if (o.grid) std::tie(cfg.width, cfg.height) = harness::parse_grid(*o.grid);
  if (o.pop) {
    const int generations = cfg.generations();
    cfg.neat.pop_size = *o.pop;
    cfg.set_generations(generations);
  }
  if (o.generations) cfg.set_generations(*o.generations);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out_dir = *o.out;
  if (o.runs) cfg.runs = *o.runs;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

std::string run_stem(int run_index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "run-%03d", run_index);
  return buf;
}

void print_progress(int run, const harness::GenerationRecord& row) {
  if (row.generation % 10 != 0) return;
  std::cerr << "run " << run << " gen " << row.generation << " best "
            << format_double(row.best_fitness) << " mean " << format_double(row.mean_fitness)
            << " species " << row.species_count << " edges "
            << format_double(row.mean_genome_edges) << "\n";
}

// Champion files: genome, CSV curve, converged phenotype.
std::vector<std::string> save_run(const harness::RunConfig& cfg, const harness::RunRecord& rec) {
  const fs::path dir(cfg.out_dir);
  const auto stem = run_stem(rec.run_index);
  harness::export_csv(rec, (dir / (stem + ".csv")).string());
  neat::save_genome((dir / (stem + ".genome")).string(), rec.best_genome);
  std::vector<std::string> lines{
      stem + ".seed = " + std::to_string(rec.seed),
      stem + ".best_fitness = " + format_double(rec.best_fitness),
      stem + ".iterations_of_best = " + std::to_string(rec.iterations_of_best),
      stem + ".evaluations = " + std::to_string(rec.evaluations)};
  const auto target = flags::make_target(cfg.target, cfg.width, cfg.height);
  if (cfg.variant.family == flags::Family::regression) {
    flags::save_pgm((dir / (stem + "-phenotype.pgm")).string(),
                    flags::regression_image(rec.best_genome, cfg.width, cfg.height));
  } else {
    auto grown = devo::grow(devo::Organism(rec.best_genome, cfg.width, cfg.height,
                                           cfg.variant.chemicals),
                            cfg.growth);
    if (grown.converged)
      flags::save_pgm((dir / (stem + "-phenotype.pgm")).string(), *grown.phenotype);
  }
  return lines;
}

int cmd_evolve(const RunOptions& o, int run_index) {
  const auto cfg = build_config(o);
  fs::create_directories(cfg.out_dir);
  harness::Progress progress;
  if (!o.quiet) progress = [run_index](const auto& row) { print_progress(run_index, row); };
  const auto rec = harness::run_evolution(cfg, run_index, progress);
  const auto lines = save_run(cfg, rec);
  harness::write_manifest((fs::path(cfg.out_dir) / "manifest.txt").string(), cfg, lines);
  std::cout << "best fitness " << format_double(rec.best_fitness) << " (growth iterations "
            << rec.iterations_of_best << ")\n";
  return 0;
}

int cmd_batch(const RunOptions& o) {
  const auto cfg = build_config(o);
  fs::create_directories(cfg.out_dir);
  std::function<void(int, const harness::GenerationRecord&)> progress;
  if (!o.quiet) progress = print_progress;
  const auto batch = harness::run_batch(cfg, progress);

  std::vector<std::string> lines;
  for (const auto& rec : batch.runs) {
    const auto run_lines = save_run(cfg, rec);
    lines.insert(lines.end(), run_lines.begin(), run_lines.end());
  }
  harness::export_csv(batch, (fs::path(cfg.out_dir) / "batch.csv").string());
  {
    std::ofstream curve(fs::path(cfg.out_dir) / "online.csv");
    curve << "generation,mean_best_fitness\n";
    for (std::size_t g = 0; g < batch.mean_online_curve.size(); ++g)
      curve << g << "," << format_double(batch.mean_online_curve[g]) << "\n";
  }
  const auto& s = batch.summary;
  lines.push_back("summary.min = " + format_double(s.min));
  lines.push_back("summary.lower_hinge = " + format_double(s.lower));
  lines.push_back("summary.median = " + format_double(s.median));
  lines.push_back("summary.upper_hinge = " + format_double(s.upper));
  lines.push_back("summary.max = " + format_double(s.max));
  harness::write_manifest((fs::path(cfg.out_dir) / "manifest.txt").string(), cfg, lines);
  std::cout << "min " << format_double(s.min) << " q1 " << format_double(s.lower) << " median "
            << format_double(s.median) << " q3 " << format_double(s.upper) << " max "
            << format_double(s.max) << "\n";
  return 0;
}

struct HealOptions {
  std::string genome;
  std::string variant = "1-ffwd";
  std::string target = "2bands";
  std::string grid = "32x32";
  harness::HealingOptions healing;
  devo::GrowthConfig growth;
};

int cmd_heal(const HealOptions& o) {
  const auto [w, h] = harness::parse_grid(o.grid);
  o.growth.validate();
  const auto genome = neat::load_genome(o.genome);
  const auto target = flags::make_target(flags::parse_target_kind(o.target), w, h);
  const auto report = harness::self_healing_experiment(genome, flags::parse_variant(o.variant),
                                                       target, o.growth, o.healing);
  std::cout << "original: fitness " << format_double(report.original_fitness) << " after "
            << report.original_iterations << " iterations\n";
  for (std::size_t t = 0; t < report.trials.size(); ++t) {
    const auto& trial = report.trials[t];
    std::cout << "trial " << t << ": " << harness::to_string(trial.outcome) << " iterations "
              << trial.iterations << " similarity " << format_double(trial.similarity) << "\n";
  }
  std::cout << "exact " << format_double(report.exact_fraction) << " close "
            << format_double(report.close_fraction) << " diverged "
            << format_double(report.diverged_fraction) << " mean recovery iterations "
            << format_double(report.mean_recovery_iterations) << "\n";
  return 0;
}

struct SnapshotOptions {
  std::string genome;
  std::string variant = "1-ffwd";
  std::string grid = "32x32";
  std::vector<int> iterations;
  std::string out = "snapshots";
  std::string prefix;
  devo::GrowthConfig growth;
};

int cmd_snapshot(const SnapshotOptions& o) {
  const auto [w, h] = harness::parse_grid(o.grid);
  const auto genome = neat::load_genome(o.genome);
  const auto result = harness::snapshot_growth(genome, flags::parse_variant(o.variant), w, h,
                                               o.growth, o.iterations, o.out, o.prefix);
  for (const auto& f : result.files) std::cout << f << "\n";
  for (const auto& n : result.notes) std::cerr << "note: " << n << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolve neural cell controllers whose grid dynamics settle on target pictures"};
  app.require_subcommand(1);

  RunOptions evolve_opts;
  int run_index = 0;
  auto* evolve = app.add_subcommand("evolve", "Run one evolution");
  add_run_options(evolve, evolve_opts);
  evolve->add_option("--run-index", run_index, "Run index (seed offset)");

  RunOptions batch_opts;
  auto* batch = app.add_subcommand("batch", "Run independent evolutions and summarise them");
  add_run_options(batch, batch_opts);
  batch->add_option("--runs", batch_opts.runs, "Number of runs");

  HealOptions heal_opts;
  auto* heal = app.add_subcommand("heal", "Perturb a converged champion and regrow it");
  heal->add_option("--genome", heal_opts.genome, "Champion genome file")->required();
  heal->add_option("--variant", heal_opts.variant, "Model variant");
  heal->add_option("--target", heal_opts.target, "Target the champion was evolved for");
  heal->add_option("--grid", heal_opts.grid, "Grid size WxH");
  heal->add_option("--sigma", heal_opts.healing.sigma, "Std. dev. of the Gaussian perturbation");
  heal->add_option("--trials", heal_opts.healing.trials, "Number of trials");
  heal->add_option("--seed", heal_opts.healing.seed, "Perturbation seed");
  heal->add_flag("--random-init", heal_opts.healing.random_init,
                 "Reset all states uniformly at random instead of adding noise");
  heal->add_option("--max-iterations", heal_opts.growth.max_iterations, "Growth cap");
  heal->add_option("--window", heal_opts.growth.stability_window, "Stability window");

  SnapshotOptions snap_opts;
  auto* snapshot = app.add_subcommand("snapshot", "Dump growth stages as graymaps");
  snapshot->add_option("--genome", snap_opts.genome, "Genome file")->required();
  snapshot->add_option("--variant", snap_opts.variant, "Model variant");
  snapshot->add_option("--grid", snap_opts.grid, "Grid size WxH");
  snapshot->add_option("--iterations", snap_opts.iterations, "Iterations to capture")
      ->required()
      ->delimiter(',');
  snapshot->add_option("--out", snap_opts.out, "Output directory");
  snapshot->add_option("--prefix", snap_opts.prefix, "File name prefix");
  snapshot->add_option("--max-iterations", snap_opts.growth.max_iterations, "Growth cap");
  snapshot->add_option("--window", snap_opts.growth.stability_window, "Stability window");

  std::string kind = "2bands", size = "32x32", out;
  bool ascii = false;
  auto* target = app.add_subcommand("target", "Write a benchmark picture");
  target->add_option("--kind", kind, "2bands, 3bands, disc or halfdiscs");
  target->add_option("--size", size, "Picture size WxH");
  target->add_option("--out", out, "Output file (default: stdout)");
  target->add_flag("--ascii", ascii, "Write plain P2 instead of binary P5");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evolve) return cmd_evolve(evolve_opts, run_index);
    if (*batch) return cmd_batch(batch_opts);
    if (*heal) return cmd_heal(heal_opts);
    if (*snapshot) return cmd_snapshot(snap_opts);
    if (*target) {
      const auto [w, h] = harness::parse_grid(size);
      const auto img = flags::make_target(flags::parse_target_kind(kind), w, h);
      const auto format = ascii ? flags::PgmFormat::ascii : flags::PgmFormat::binary;
      if (out.empty())
        flags::write_pgm(std::cout, img, format);
      else
        flags::save_pgm(out, img, format);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
