#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "celldev/config_file.hpp"
#include "celldev/flags.hpp"
#include "celldev/neat.hpp"
#include "celldev/organism.hpp"

namespace celldev::harness {

struct RunConfig {
  flags::ModelVariant variant = flags::parse_variant("1-ffwd");
  flags::TargetKind target = flags::TargetKind::two_bands;
  int width = 32;
  int height = 32;
  neat::NeatConfig neat;
  devo::GrowthConfig growth;
  int runs = 16;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  // 0 uses one worker per hardware thread.
  int threads = 0;

  int generations() const;
  void set_generations(int generations);
  std::uint64_t run_seed(int run_index) const { return seed + static_cast<std::uint64_t>(run_index); }
  void validate() const;
};

// Full-scale settings: 32x32 grid, population 500, 250000 evaluations.
RunConfig paper_preset();
// Minutes-scale settings: 16x16 grid, population 150, 150 generations.
RunConfig desk_preset();

// Overrides fields of `base` from [run], [neat] and [growth] sections.
RunConfig apply_config(const ConfigFile& file, RunConfig base);
// Serialises in the same format apply_config reads.
std::string describe(const RunConfig& cfg);

// Parses "WxH" (or a single "N" for a square grid).
std::pair<int, int> parse_grid(const std::string& text);

struct GenerationRecord {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  int species_count = 0;
  double mean_genome_edges = 0.0;
};

struct RunRecord {
  int run_index = 0;
  std::uint64_t seed = 0;
  neat::Genome best_genome;
  double best_fitness = 0.0;
  int iterations_of_best = 0;
  std::int64_t evaluations = 0;
  std::vector<GenerationRecord> generations;

  std::vector<double> online_curve() const;
  std::vector<double> mean_genome_edges() const;
};

using Progress = std::function<void(const GenerationRecord&)>;

// Evaluates every genome of a population, fanning out over `threads`
// workers. Results are stored by genome index.
std::vector<flags::Evaluation> evaluate_all(const std::vector<neat::Genome>& genomes,
                                            const flags::ModelVariant& variant,
                                            const flags::GrayImage& target,
                                            const devo::GrowthConfig& growth, int threads);

RunRecord run_evolution(const RunConfig& cfg, int run_index, const Progress& progress = {});

// Tukey five-number summary (min, lower hinge, median, upper hinge, max).
struct FiveNumber {
  double min = 0.0;
  double lower = 0.0;
  double median = 0.0;
  double upper = 0.0;
  double max = 0.0;
};
FiveNumber five_number_summary(std::vector<double> values);

struct BatchResult {
  std::vector<RunRecord> runs;
  std::vector<double> final_fitness;
  FiveNumber summary;
  std::vector<double> mean_online_curve;
};

BatchResult run_batch(const RunConfig& cfg,
                      const std::function<void(int run, const GenerationRecord&)>& progress = {});

enum class Recovery { exact, close, diverged };
std::string_view to_string(Recovery r);

struct HealingTrial {
  Recovery outcome = Recovery::diverged;
  bool converged = false;
  int iterations = 0;
  double similarity = 0.0;
};

struct HealingReport {
  flags::GrayImage original{1, 1};
  int original_iterations = 0;
  double original_fitness = 0.0;
  std::vector<HealingTrial> trials;
  double exact_fraction = 0.0;
  double close_fraction = 0.0;
  double diverged_fraction = 0.0;
  double mean_recovery_iterations = 0.0;
};

struct HealingOptions {
  int trials = 20;
  double sigma = 1.0;
  bool random_init = false;
  std::uint64_t seed = 1;
  double close_threshold = 0.99;
};

// Grows the champion to its fixed point, then per trial perturbs (or
// randomises) the converged state and regrows. Throws std::runtime_error
// when the champion does not converge.
HealingReport self_healing_experiment(const neat::Genome& champion,
                                      const flags::ModelVariant& variant,
                                      const flags::GrayImage& target,
                                      const devo::GrowthConfig& growth,
                                      const HealingOptions& options);

struct SnapshotResult {
  std::vector<std::string> files;
  std::vector<std::string> notes;
  bool converged = false;
  int final_iteration = 0;
};

// Writes the phenotype and one map per chemical for every requested
// iteration as <prefix>iter-NNNNN-<channel>.pgm under `dir`, plus a
// manifest listing them.
SnapshotResult snapshot_growth(const neat::Genome& champion, const flags::ModelVariant& variant,
                               int width, int height, const devo::GrowthConfig& growth,
                               std::vector<int> iterations, const std::string& dir,
                               const std::string& prefix = "");

void export_csv(const RunRecord& record, const std::string& path);
void export_csv(const BatchResult& batch, const std::string& path);
std::vector<GenerationRecord> read_run_csv(const std::string& path);

void write_manifest(const std::string& path, const RunConfig& cfg,
                    const std::vector<std::string>& extra_lines);

// Shortest round-trip decimal form, independent of locale.
std::string format_double(double v);

}  // namespace celldev::harness
