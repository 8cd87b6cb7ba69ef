#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "celldev/genome.hpp"
#include "celldev/rng.hpp"

namespace celldev::neat {

// Defaults reproduce the published NEAT settings for this task family.
struct NeatConfig {
  int pop_size = 500;
  std::int64_t max_evaluations = 250000;
  double reproduction_ratio = 0.2;
  int elite_per_species = 1;
  double p_crossover = 0.15;
  double p_add_node = 0.01;
  double p_add_link = 0.01;
  double p_enable_link = 0.045;
  double p_disable_link = 0.045;
  double p_weight_gauss = 0.8;
  double weight_gauss_sigma = 0.1;
  double p_weight_uniform = 0.01;
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 0.2;
  double compat_threshold = 3.0;
  double init_weight_min = -1.0;
  double init_weight_max = 1.0;
  double uniform_reset_min = -5.0;
  double uniform_reset_max = 5.0;
  // 0 disables stagnation removal.
  int stagnation_generations = 0;

  // Throws std::invalid_argument when a probability leaves [0,1] or the
  // population is smaller than 2.
  void validate() const;
};

struct Species {
  int id = 0;
  Genome representative;
  std::vector<int> members;  // indices into the population, best first once ranked
  double best_fitness = 0.0;
  double best_ever = 0.0;
  int stale_generations = 0;
};

std::vector<Genome> init_population(const NeatConfig& cfg, IoShape io, Topology kind,
                                    InnovationRegistry& reg, Rng& rng);

double compatibility_distance(const Genome& a, const Genome& b, const NeatConfig& cfg);

// Assigns every genome to the first species whose representative lies
// within the compatibility threshold. `previous` supplies the existing
// species and their representatives; species left empty are dropped.
std::vector<Species> speciate(std::span<const Genome> population, std::vector<Species> previous,
                              const NeatConfig& cfg, int* next_species_id = nullptr);

// Sorts members by fitness (descending, ties by index) and records best
// fitness and stagnation counters.
void rank_species(std::vector<Species>& species, std::span<const double> fitnesses);

// Offspring per species under explicit fitness sharing. Expects ranked
// species. Totals equal pop_size; the species holding the overall best
// genome always receives at least one slot.
std::vector<int> allocate_offspring(const std::vector<Species>& species,
                                    std::span<const double> fitnesses, const NeatConfig& cfg);

Genome crossover(const Genome& fitter, const Genome& other, Rng& rng);

Genome mutate_add_node(Genome g, InnovationRegistry& reg, Rng& rng);
Genome mutate_add_link(Genome g, InnovationRegistry& reg, const NeatConfig& cfg, Rng& rng);
Genome mutate_weights(Genome g, const NeatConfig& cfg, Rng& rng);

// Branch overrides let tests force either branch on or off.
struct ToggleBranches {
  std::optional<bool> enable;
  std::optional<bool> disable;
};
Genome mutate_toggle(Genome g, const NeatConfig& cfg, Rng& rng, ToggleBranches force = {});

Genome enforce_io_connectivity(Genome g, InnovationRegistry& reg, const NeatConfig& cfg,
                               Rng& rng);

std::vector<Genome> reproduce(std::span<const Genome> population,
                              std::span<const double> fitnesses,
                              const std::vector<Species>& species, const std::vector<int>& counts,
                              const NeatConfig& cfg, InnovationRegistry& reg, Rng& rng);

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  int species_count = 0;
  double mean_genome_edges = 0.0;
  int best_index = 0;
};

// Generational driver: holds the population, species and innovation
// registry. Randomness for generation g comes from stream(seed, {g, ...}),
// so results do not depend on how fitnesses were computed.
class Population {
 public:
  Population(const NeatConfig& cfg, IoShape io, Topology kind, std::uint64_t seed);

  const std::vector<Genome>& genomes() const { return genomes_; }
  const std::vector<Species>& species() const { return species_; }
  int generation() const { return generation_; }
  const NeatConfig& config() const { return cfg_; }

  // Speciates and ranks the current population with its fitnesses,
  // reports statistics, then replaces it with the next generation.
  GenerationStats advance(std::span<const double> fitnesses);

 private:
  NeatConfig cfg_;
  std::uint64_t seed_;
  InnovationRegistry registry_;
  std::vector<Genome> genomes_;
  std::vector<Species> species_;
  int generation_ = 0;
  int next_species_id_ = 0;
};

}  // namespace celldev::neat
