#include "celldev/neat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace celldev::neat {

void NeatConfig::validate() const {
  if (pop_size < 2) throw std::invalid_argument("pop_size must be at least 2");
  for (double p : {reproduction_ratio, p_crossover, p_add_node, p_add_link, p_enable_link,
                   p_disable_link, p_weight_gauss, p_weight_uniform})
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0,1]");
  if (weight_gauss_sigma < 0.0) throw std::invalid_argument("negative weight sigma");
  if (elite_per_species < 0) throw std::invalid_argument("negative elite size");
  if (init_weight_min > init_weight_max || uniform_reset_min > uniform_reset_max)
    throw std::invalid_argument("empty weight range");
}

std::vector<Genome> init_population(const NeatConfig& cfg, IoShape io, Topology kind,
                                    InnovationRegistry& reg, Rng& rng) {
  if (io.inputs < 1 || io.outputs < 1)
    throw std::invalid_argument("need at least one input and one output");
  const int bias = io.inputs;
  const int first_output = io.inputs + 1;
  reg.reserve_node_ids(first_output + io.outputs);

  Genome base;
  base.kind = kind;
  for (int i = 0; i < io.inputs; ++i) base.nodes.push_back({i, NodeRole::input});
  base.nodes.push_back({bias, NodeRole::bias});
  for (int o = 0; o < io.outputs; ++o) base.nodes.push_back({first_output + o, NodeRole::output});
  for (int from = 0; from <= bias; ++from)
    for (int o = 0; o < io.outputs; ++o)
      base.add_conn({reg.connection(from, first_output + o), from, first_output + o, 0.0, true});

  std::vector<Genome> pop(cfg.pop_size, base);
  for (auto& g : pop)
    for (auto& c : g.conns) c.weight = uniform(rng, cfg.init_weight_min, cfg.init_weight_max);
  return pop;
}

double compatibility_distance(const Genome& a, const Genome& b, const NeatConfig& cfg) {
  const auto& ga = a.conns;
  const auto& gb = b.conns;
  std::size_t i = 0, j = 0;
  int disjoint = 0, excess = 0, matching = 0;
  double weight_diff = 0.0;
  while (i < ga.size() && j < gb.size()) {
    if (ga[i].innovation == gb[j].innovation) {
      weight_diff += std::abs(ga[i].weight - gb[j].weight);
      ++matching;
      ++i;
      ++j;
    } else if (ga[i].innovation < gb[j].innovation) {
      ++disjoint;
      ++i;
    } else {
      ++disjoint;
      ++j;
    }
  }
  excess = static_cast<int>((ga.size() - i) + (gb.size() - j));
  const std::size_t larger = std::max(ga.size(), gb.size());
  const double n = larger < 20 ? 1.0 : static_cast<double>(larger);
  const double mean_w = matching > 0 ? weight_diff / matching : 0.0;
  return cfg.c1 * excess / n + cfg.c2 * disjoint / n + cfg.c3 * mean_w;
}

std::vector<Species> speciate(std::span<const Genome> population, std::vector<Species> previous,
                              const NeatConfig& cfg, int* next_species_id) {
  int local_next = 0;
  for (const auto& s : previous) local_next = std::max(local_next, s.id + 1);
  int& next_id = next_species_id ? *next_species_id : local_next;
  next_id = std::max(next_id, local_next);

  std::vector<Species> species = std::move(previous);
  for (auto& s : species) s.members.clear();
  for (int i = 0; i < static_cast<int>(population.size()); ++i) {
    bool placed = false;
    for (auto& s : species) {
      if (compatibility_distance(population[i], s.representative, cfg) < cfg.compat_threshold) {
        s.members.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) {
      Species s;
      s.id = next_id++;
      s.representative = population[i];
      s.members.push_back(i);
      species.push_back(std::move(s));
    }
  }
  std::erase_if(species, [](const Species& s) { return s.members.empty(); });
  return species;
}

void rank_species(std::vector<Species>& species, std::span<const double> fitnesses) {
  for (auto& s : species) {
    std::stable_sort(s.members.begin(), s.members.end(),
                     [&](int a, int b) { return fitnesses[a] > fitnesses[b]; });
    s.best_fitness = fitnesses[s.members.front()];
    if (s.best_fitness > s.best_ever) {
      s.best_ever = s.best_fitness;
      s.stale_generations = 0;
    } else {
      ++s.stale_generations;
    }
  }
}

namespace {

std::size_t best_species_index(const std::vector<Species>& species) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < species.size(); ++s)
    if (species[s].best_fitness > species[best].best_fitness) best = s;
  return best;
}

}  // namespace

std::vector<int> allocate_offspring(const std::vector<Species>& species,
                                    std::span<const double> fitnesses, const NeatConfig& cfg) {
  const std::size_t n = species.size();
  std::vector<int> counts(n, 0);
  if (n == 0) return counts;
  const std::size_t best = best_species_index(species);

  std::vector<bool> eligible(n, true);
  if (cfg.stagnation_generations > 0)
    for (std::size_t s = 0; s < n; ++s)
      eligible[s] = s == best || species[s].stale_generations < cfg.stagnation_generations;

  std::vector<double> adjusted(n, 0.0);
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    if (!eligible[s]) continue;
    double sum = 0.0;
    for (int m : species[s].members) sum += fitnesses[m];
    adjusted[s] = sum / static_cast<double>(species[s].members.size());
    total += adjusted[s];
  }

  const int eligible_count = static_cast<int>(std::count(eligible.begin(), eligible.end(), true));
  for (std::size_t s = 0; s < n; ++s) {
    if (!eligible[s]) continue;
    if (total > 0.0)
      counts[s] = static_cast<int>(std::llround(cfg.pop_size * adjusted[s] / total));
    else
      counts[s] = cfg.pop_size / eligible_count;
  }

  if (counts[best] == 0) counts[best] = 1;
  int diff = cfg.pop_size - std::accumulate(counts.begin(), counts.end(), 0);
  if (diff > 0) counts[best] += diff;
  while (diff < 0) {
    std::size_t largest = 0;
    for (std::size_t s = 1; s < n; ++s)
      if (counts[s] > counts[largest]) largest = s;
    if (largest == best && counts[best] <= 1) break;
    --counts[largest];
    ++diff;
  }
  return counts;
}

namespace {

// Re-enables an existing incident gene for any input or output node left
// without one. The fitter parent always had one, so a candidate exists.
void reenable_io(Genome& g) {
  for (const auto& n : g.nodes) {
    if (n.role != NodeRole::input && n.role != NodeRole::output) continue;
    auto touches = [&](const ConnGene& c) { return c.from == n.id || c.to == n.id; };
    bool ok = std::any_of(g.conns.begin(), g.conns.end(),
                          [&](const ConnGene& c) { return c.enabled && touches(c); });
    if (ok) continue;
    auto it = std::find_if(g.conns.begin(), g.conns.end(), touches);
    if (it != g.conns.end()) it->enabled = true;
  }
}

}  // namespace

Genome crossover(const Genome& fitter, const Genome& other, Rng& rng) {
  if (fitter.kind != other.kind) throw std::invalid_argument("crossover of different kinds");
  Genome child;
  child.kind = fitter.kind;
  child.nodes = fitter.nodes;
  child.conns.reserve(fitter.conns.size());
  std::size_t j = 0;
  for (const auto& gene : fitter.conns) {
    while (j < other.conns.size() && other.conns[j].innovation < gene.innovation) ++j;
    const bool matching = j < other.conns.size() && other.conns[j].innovation == gene.innovation;
    if (matching && chance(rng, 0.5))
      child.conns.push_back(other.conns[j]);
    else
      child.conns.push_back(gene);
  }
  reenable_io(child);
  return child;
}

Genome mutate_add_node(Genome g, InnovationRegistry& reg, Rng& rng) {
  std::vector<std::size_t> enabled;
  for (std::size_t k = 0; k < g.conns.size(); ++k)
    if (g.conns[k].enabled) enabled.push_back(k);
  if (enabled.empty()) return g;

  ConnGene& split = g.conns[enabled[pick_index(rng, enabled.size())]];
  split.enabled = false;
  const ConnGene old = split;
  int node = reg.split_node(old.innovation);
  if (g.find_node(node)) node = reg.split_node(old.innovation, true);
  g.nodes.push_back({node, NodeRole::hidden});
  g.add_conn({reg.connection(old.from, node), old.from, node, 1.0, true});
  g.add_conn({reg.connection(node, old.to), node, old.to, old.weight, true});
  return g;
}

Genome mutate_add_link(Genome g, InnovationRegistry& reg, const NeatConfig& cfg, Rng& rng) {
  std::vector<std::pair<int, int>> candidates;
  for (const auto& src : g.nodes) {
    for (const auto& dst : g.nodes) {
      if (dst.role == NodeRole::input || dst.role == NodeRole::bias) continue;
      if (g.kind == Topology::feedforward && src.id == dst.id) continue;
      if (g.has_connection(src.id, dst.id)) continue;
      candidates.emplace_back(src.id, dst.id);
    }
  }
  std::shuffle(candidates.begin(), candidates.end(), rng);
  for (const auto& [from, to] : candidates) {
    if (g.kind == Topology::feedforward && would_create_cycle(g, from, to)) continue;
    const double w = uniform(rng, cfg.init_weight_min, cfg.init_weight_max);
    g.add_conn({reg.connection(from, to), from, to, w, true});
    return g;
  }
  return g;
}

Genome mutate_weights(Genome g, const NeatConfig& cfg, Rng& rng) {
  if (chance(rng, cfg.p_weight_gauss) && cfg.weight_gauss_sigma > 0.0) {
    std::normal_distribution<double> delta(0.0, cfg.weight_gauss_sigma);
    for (auto& c : g.conns) c.weight += delta(rng);
  }
  for (auto& c : g.conns)
    if (chance(rng, cfg.p_weight_uniform))
      c.weight = uniform(rng, cfg.uniform_reset_min, cfg.uniform_reset_max);
  return g;
}

namespace {

bool io_safe_to_disable(const Genome& g, std::size_t k) {
  const ConnGene& gene = g.conns[k];
  for (int endpoint : {gene.from, gene.to}) {
    const NodeRole role = g.role_of(endpoint);
    if (role != NodeRole::input && role != NodeRole::output) continue;
    bool other = false;
    for (std::size_t m = 0; m < g.conns.size() && !other; ++m)
      other = m != k && g.conns[m].enabled &&
              (g.conns[m].from == endpoint || g.conns[m].to == endpoint);
    if (!other) return false;
  }
  return true;
}

}  // namespace

Genome mutate_toggle(Genome g, const NeatConfig& cfg, Rng& rng, ToggleBranches force) {
  const bool do_enable = force.enable.value_or(chance(rng, cfg.p_enable_link));
  if (do_enable) {
    std::vector<std::size_t> disabled;
    for (std::size_t k = 0; k < g.conns.size(); ++k)
      if (!g.conns[k].enabled) disabled.push_back(k);
    if (!disabled.empty()) g.conns[disabled[pick_index(rng, disabled.size())]].enabled = true;
  }
  const bool do_disable = force.disable.value_or(chance(rng, cfg.p_disable_link));
  if (do_disable) {
    std::vector<std::size_t> candidates;
    for (std::size_t k = 0; k < g.conns.size(); ++k)
      if (g.conns[k].enabled && io_safe_to_disable(g, k)) candidates.push_back(k);
    if (!candidates.empty())
      g.conns[candidates[pick_index(rng, candidates.size())]].enabled = false;
  }
  return g;
}

Genome enforce_io_connectivity(Genome g, InnovationRegistry& reg, const NeatConfig& cfg,
                               Rng& rng) {
  std::vector<int> inputs, outputs;
  for (const auto& n : g.nodes) {
    if (n.role == NodeRole::input) inputs.push_back(n.id);
    if (n.role == NodeRole::output) outputs.push_back(n.id);
  }
  auto connected = [&](int id) {
    return std::any_of(g.conns.begin(), g.conns.end(), [&](const ConnGene& c) {
      return c.enabled && (c.from == id || c.to == id);
    });
  };
  auto link = [&](int from, int to) {
    for (auto& c : g.conns) {
      if (c.from == from && c.to == to) {
        c.enabled = true;
        return;
      }
    }
    const double w = uniform(rng, cfg.init_weight_min, cfg.init_weight_max);
    g.add_conn({reg.connection(from, to), from, to, w, true});
  };
  // Input-to-output edges cannot close a cycle: inputs have no incoming edges.
  for (int in : inputs)
    if (!connected(in) && !outputs.empty()) link(in, outputs[pick_index(rng, outputs.size())]);
  for (int out : outputs)
    if (!connected(out) && !inputs.empty()) link(inputs[pick_index(rng, inputs.size())], out);
  return g;
}

std::vector<Genome> reproduce(std::span<const Genome> population,
                              std::span<const double> fitnesses,
                              const std::vector<Species>& species, const std::vector<int>& counts,
                              const NeatConfig& cfg, InnovationRegistry& reg, Rng& rng) {
  std::vector<Genome> next;
  next.reserve(cfg.pop_size);
  for (std::size_t s = 0; s < species.size(); ++s) {
    const auto& members = species[s].members;
    const int quota = counts[s];
    if (quota <= 0 || members.empty()) continue;

    const int elites =
        std::min({quota, cfg.elite_per_species, static_cast<int>(members.size())});
    for (int e = 0; e < elites; ++e) next.push_back(population[members[e]]);

    const auto pool_size = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(cfg.reproduction_ratio * members.size())));
    const std::span<const int> pool(members.data(), std::min(pool_size, members.size()));

    for (int k = elites; k < quota; ++k) {
      Genome child;
      if (chance(rng, cfg.p_crossover)) {
        const int a = pool[pick_index(rng, pool.size())];
        const int b = pool[pick_index(rng, pool.size())];
        const bool a_fitter = fitnesses[a] >= fitnesses[b];
        child = crossover(population[a_fitter ? a : b], population[a_fitter ? b : a], rng);
      } else {
        child = population[pool[pick_index(rng, pool.size())]];
      }
      child = mutate_weights(std::move(child), cfg, rng);
      if (chance(rng, cfg.p_add_node)) child = mutate_add_node(std::move(child), reg, rng);
      if (chance(rng, cfg.p_add_link)) child = mutate_add_link(std::move(child), reg, cfg, rng);
      child = mutate_toggle(std::move(child), cfg, rng);
      child = enforce_io_connectivity(std::move(child), reg, cfg, rng);
      next.push_back(std::move(child));
    }
  }
  return next;
}

Population::Population(const NeatConfig& cfg, IoShape io, Topology kind, std::uint64_t seed)
    : cfg_(cfg), seed_(seed) {
  cfg_.validate();
  auto rng = stream(seed_, {phase::init});
  genomes_ = init_population(cfg_, io, kind, registry_, rng);
}

GenerationStats Population::advance(std::span<const double> fitnesses) {
  if (fitnesses.size() != genomes_.size())
    throw std::invalid_argument("one fitness per genome required");

  species_ = speciate(genomes_, std::move(species_), cfg_, &next_species_id_);
  rank_species(species_, fitnesses);

  GenerationStats stats;
  stats.generation = generation_;
  stats.species_count = static_cast<int>(species_.size());
  double fit_sum = 0.0, edge_sum = 0.0;
  for (std::size_t i = 0; i < genomes_.size(); ++i) {
    fit_sum += fitnesses[i];
    edge_sum += genomes_[i].enabled_count();
    if (fitnesses[i] > fitnesses[stats.best_index]) stats.best_index = static_cast<int>(i);
  }
  stats.best_fitness = fitnesses[stats.best_index];
  stats.mean_fitness = fit_sum / genomes_.size();
  stats.mean_genome_edges = edge_sum / genomes_.size();

  const auto counts = allocate_offspring(species_, fitnesses, cfg_);
  auto rng = stream(seed_, {static_cast<std::uint64_t>(generation_), phase::reproduce});
  auto next = reproduce(genomes_, fitnesses, species_, counts, cfg_, registry_, rng);

  std::vector<Species> survivors;
  for (std::size_t s = 0; s < species_.size(); ++s) {
    if (counts[s] <= 0) continue;
    species_[s].representative = genomes_[species_[s].members.front()];
    survivors.push_back(std::move(species_[s]));
  }
  species_ = std::move(survivors);
  genomes_ = std::move(next);
  ++generation_;
  return stats;
}

}  // namespace celldev::neat
