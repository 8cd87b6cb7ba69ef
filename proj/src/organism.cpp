#include "celldev/organism.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace celldev::devo {

namespace {

std::shared_ptr<const neuro::Wiring> checked_compile(const neat::Genome& genome, int chemicals) {
  if (chemicals < 0) throw std::invalid_argument("negative chemical count");
  const auto io = genome.io();
  if (io.inputs != 4 * chemicals || io.outputs != chemicals + 1)
    throw std::invalid_argument("genome arity " + std::to_string(io.inputs) + "->" +
                                std::to_string(io.outputs) + " does not match " +
                                std::to_string(chemicals) + " chemicals");
  return neat::compile(genome);
}

}  // namespace

Organism::Organism(const neat::Genome& genome, int width, int height, int chemicals)
    : Organism(checked_compile(genome, chemicals), width, height, chemicals) {}

Organism::Organism(std::shared_ptr<const neuro::Wiring> wiring, int width, int height,
                   int chemicals)
    : wiring_(std::move(wiring)),
      width_(width),
      height_(height),
      chemicals_(chemicals),
      neurons_(wiring_->num_neurons()) {
  if (width < 1 || height < 1) throw std::invalid_argument("grid dimensions must be >= 1");
  if (wiring_->num_inputs() != 4 * chemicals + 1 ||
      static_cast<int>(wiring_->output_ids().size()) != chemicals + 1)
    throw std::invalid_argument("wiring arity does not match chemical count");
  acts_.assign(static_cast<std::size_t>(cell_count()) * neurons_, 0.0);
  next_acts_ = acts_;
  chem_.assign(static_cast<std::size_t>(cell_count()) * chemicals_, 0.0);
  next_chem_ = chem_;
}

std::span<const double> Organism::cell_activations(int row, int col) const {
  return {acts_.data() + static_cast<std::size_t>(row * width_ + col) * neurons_,
          static_cast<std::size_t>(neurons_)};
}

std::span<double> Organism::cell_activations(int row, int col) {
  return {acts_.data() + static_cast<std::size_t>(row * width_ + col) * neurons_,
          static_cast<std::size_t>(neurons_)};
}

double Organism::chemical(int row, int col, int k) const {
  return chem_[static_cast<std::size_t>(row * width_ + col) * chemicals_ + k];
}

void Organism::gather_inputs(int row, int col, std::span<double> inputs) const {
  const int m = chemicals_;
  auto fill = [&](Direction d, int r, int c) {
    const bool inside = r >= 0 && r < height_ && c >= 0 && c < width_;
    for (int k = 0; k < m; ++k)
      inputs[input_slot(d, k, m)] = inside ? chemical(r, c, k) : 0.0;
  };
  fill(Direction::north, row - 1, col);
  fill(Direction::east, row, col + 1);
  fill(Direction::south, row + 1, col);
  fill(Direction::west, row, col - 1);
  inputs[4 * m] = 1.0;
}

void Organism::step() {
  std::vector<double> inputs(4 * chemicals_ + 1);
  const auto& outputs = wiring_->output_ids();
  for (int row = 0; row < height_; ++row) {
    for (int col = 0; col < width_; ++col) {
      const std::size_t cell = static_cast<std::size_t>(row * width_ + col);
      gather_inputs(row, col, inputs);
      std::span<const double> prev(acts_.data() + cell * neurons_, neurons_);
      std::span<double> next(next_acts_.data() + cell * neurons_, neurons_);
      wiring_->advance(prev, inputs, next);
      for (int k = 0; k < chemicals_; ++k)
        next_chem_[cell * chemicals_ + k] = next[outputs[k + 1]];
    }
  }
  acts_.swap(next_acts_);
  chem_.swap(next_chem_);
  ++iteration_;
}

double Organism::energy() const {
  double e = 0.0;
  for (double a : acts_) e += a * a;
  return e;
}

GrayImage Organism::phenotype() const {
  GrayImage img(width_, height_);
  const int differentiation = wiring_->output_ids()[0];
  for (int row = 0; row < height_; ++row)
    for (int col = 0; col < width_; ++col)
      img.at(row, col) = flags::discretize(cell_activations(row, col)[differentiation]);
  return img;
}

GrayImage Organism::chemical_map(int k) const {
  if (k < 1 || k > chemicals_)
    throw std::out_of_range("chemical index " + std::to_string(k) + " outside 1.." +
                            std::to_string(chemicals_));
  GrayImage img(width_, height_);
  for (int row = 0; row < height_; ++row)
    for (int col = 0; col < width_; ++col)
      img.at(row, col) = flags::discretize(chemical(row, col, k - 1));
  return img;
}

void Organism::refresh_chem_from_outputs() {
  const auto& outputs = wiring_->output_ids();
  for (std::size_t cell = 0; cell < static_cast<std::size_t>(cell_count()); ++cell)
    for (int k = 0; k < chemicals_; ++k)
      chem_[cell * chemicals_ + k] = acts_[cell * neurons_ + outputs[k + 1]];
}

void Organism::reset() {
  std::fill(acts_.begin(), acts_.end(), 0.0);
  std::fill(chem_.begin(), chem_.end(), 0.0);
  iteration_ = 0;
}

void Organism::perturb(double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("negative perturbation sigma");
  if (sigma == 0.0) return;
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& a : acts_) a += noise(rng);
  refresh_chem_from_outputs();
}

void Organism::randomize_state(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& a : acts_) a = unit(rng);
  for (double& c : chem_) c = unit(rng);
}

void GrowthConfig::validate() const {
  if (stability_window < 1) throw std::invalid_argument("stability_window must be >= 1");
  if (max_iterations < stability_window)
    throw std::invalid_argument("max_iterations must be >= stability_window");
  if (!(energy_epsilon >= 0.0)) throw std::invalid_argument("energy_epsilon must be >= 0");
}

bool StabilityMonitor::observe(double energy) {
  if (std::abs(energy - previous_) <= epsilon_)
    ++stable_;
  else
    stable_ = 0;
  previous_ = energy;
  return stable();
}

GrowthResult grow(Organism org, const GrowthConfig& cfg) {
  std::vector<double> trace;
  trace.reserve(std::min(cfg.max_iterations, 128));
  StabilityMonitor monitor(cfg, org.energy());
  int steps = 0;
  while (steps < cfg.max_iterations && !monitor.stable()) {
    org.step();
    ++steps;
    trace.push_back(org.energy());
    monitor.observe(trace.back());
  }
  const bool converged = monitor.stable();
  GrowthResult result{converged, steps, std::move(trace), std::move(org), std::nullopt};
  if (converged) result.phenotype = result.final_state.phenotype();
  return result;
}

}  // namespace celldev::devo
