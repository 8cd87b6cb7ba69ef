#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "celldev/genome.hpp"
#include "celldev/gray_image.hpp"
#include "celldev/network.hpp"
#include "celldev/rng.hpp"

namespace celldev::devo {

using flags::GrayImage;

// Per-cell input layout: neighbor chemicals North 1..M, East 1..M,
// South 1..M, West 1..M, then the constant bias slot.
enum class Direction { north = 0, east = 1, south = 2, west = 3 };

inline int input_slot(Direction d, int chemical, int chemicals) {
  return static_cast<int>(d) * chemicals + chemical;
}

// A width x height grid of clones of one controller. Activations and the
// chemical buffer are stored flat, one block per cell, row-major.
class Organism {
 public:
  // Throws std::invalid_argument when the genome arity is not
  // 4*chemicals inputs and chemicals+1 outputs.
  Organism(const neat::Genome& genome, int width, int height, int chemicals);
  Organism(std::shared_ptr<const neuro::Wiring> wiring, int width, int height, int chemicals);

  int width() const { return width_; }
  int height() const { return height_; }
  int chemicals() const { return chemicals_; }
  int cell_count() const { return width_ * height_; }
  int iteration() const { return iteration_; }
  const neuro::Wiring& wiring() const { return *wiring_; }

  std::span<const double> cell_activations(int row, int col) const;
  std::span<double> cell_activations(int row, int col);
  const std::vector<double>& activations() const { return acts_; }
  // Chemical k (0-based) emitted by a cell at the current step.
  double chemical(int row, int col, int k) const;
  const std::vector<double>& chem_buffer() const { return chem_; }

  // One synchronous growth step over all cells.
  void step();
  double energy() const;
  GrayImage phenotype() const;
  // k is 1-based, 1..chemicals().
  GrayImage chemical_map(int k) const;

  void reset();
  void perturb(double sigma, Rng& rng);
  void randomize_state(Rng& rng);

  friend bool operator==(const Organism& a, const Organism& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.chemicals_ == b.chemicals_ &&
           a.iteration_ == b.iteration_ && a.acts_ == b.acts_ && a.chem_ == b.chem_;
  }

 private:
  void gather_inputs(int row, int col, std::span<double> inputs) const;
  void refresh_chem_from_outputs();

  std::shared_ptr<const neuro::Wiring> wiring_;
  int width_;
  int height_;
  int chemicals_;
  int neurons_;
  int iteration_ = 0;
  std::vector<double> acts_;
  std::vector<double> chem_;
  std::vector<double> next_acts_;
  std::vector<double> next_chem_;
};

struct GrowthConfig {
  int max_iterations = 1024;
  int stability_window = 8;
  double energy_epsilon = 0.0;

  void validate() const;
};

struct GrowthResult {
  bool converged = false;
  int iterations_used = 0;
  std::vector<double> energy_trace;
  Organism final_state;
  // Present iff converged.
  std::optional<GrayImage> phenotype;
};

// Counts consecutive energy differences within epsilon. The energy of the
// starting state is the first reference, so an organism already resting on
// a fixed point is recognised after stability_window steps.
class StabilityMonitor {
 public:
  StabilityMonitor(const GrowthConfig& cfg, double start_energy)
      : window_(cfg.stability_window), epsilon_(cfg.energy_epsilon), previous_(start_energy) {}

  bool observe(double energy);
  bool stable() const { return stable_ >= window_; }

 private:
  int window_;
  double epsilon_;
  double previous_;
  int stable_ = 0;
};

// Steps until stability_window consecutive energy differences are all
// within energy_epsilon, or max_iterations steps have been taken.
GrowthResult grow(Organism org, const GrowthConfig& cfg);

}  // namespace celldev::devo
