#include "celldev/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace celldev::harness {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int RunConfig::generations() const {
  return static_cast<int>((neat.max_evaluations + neat.pop_size - 1) / neat.pop_size);
}

void RunConfig::set_generations(int generations) {
  neat.max_evaluations = static_cast<std::int64_t>(generations) * neat.pop_size;
}

void RunConfig::validate() const {
  neat.validate();
  if (variant.family == flags::Family::developmental) growth.validate();
  if (width < 2 || height < 2) throw std::invalid_argument("grid must be at least 2x2");
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (neat.max_evaluations < neat.pop_size)
    throw std::invalid_argument("max_evaluations must cover at least one generation");
}

RunConfig paper_preset() {
  RunConfig cfg;
  cfg.width = cfg.height = 32;
  return cfg;
}

RunConfig desk_preset() {
  RunConfig cfg;
  cfg.width = cfg.height = 16;
  cfg.neat.pop_size = 150;
  cfg.set_generations(150);
  cfg.runs = 5;
  return cfg;
}

std::pair<int, int> parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    std::size_t used = 0;
    if (x == std::string::npos) {
      const int n = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {n, n};
    }
    const int w = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const std::string rest = text.substr(x + 1);
    const int h = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
    return {w, h};
  } catch (const std::exception&) {
    throw std::invalid_argument("grid must look like WxH, got '" + text + "'");
  }
}

namespace {

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  if constexpr (std::is_same_v<T, bool>) {
    std::string word;
    in >> word;
    if (word == "true" || word == "1" || word == "yes") return true;
    if (word == "false" || word == "0" || word == "no") return false;
    throw std::invalid_argument("config key " + key + ": expected boolean, got '" + text + "'");
  } else {
    in >> value;
    if (!in || !(in >> std::ws).eof())
      throw std::invalid_argument("config key " + key + ": cannot parse '" + text + "'");
    return value;
  }
}

template <typename T>
void read_into(const ConfigFile& file, const std::string& key, T& field) {
  if (auto v = file.get(key)) field = parse_value<T>(key, *v);
}

}  // namespace

RunConfig apply_config(const ConfigFile& file, RunConfig cfg) {
  static const std::vector<std::string> known = {
      "run.variant", "run.target", "run.grid", "run.runs", "run.seed", "run.out", "run.threads",
      "neat.pop_size", "neat.max_evaluations", "neat.generations", "neat.reproduction_ratio",
      "neat.elite_per_species", "neat.p_crossover", "neat.p_add_node", "neat.p_add_link",
      "neat.p_enable_link", "neat.p_disable_link", "neat.p_weight_gauss",
      "neat.weight_gauss_sigma", "neat.p_weight_uniform", "neat.c1", "neat.c2", "neat.c3",
      "neat.compat_threshold", "neat.init_weight_min", "neat.init_weight_max",
      "neat.uniform_reset_min", "neat.uniform_reset_max", "neat.stagnation_generations",
      "growth.max_iterations", "growth.stability_window", "growth.energy_epsilon"};
  // A manifest's [results] section is ignored so manifests replay as configs.
  for (const auto& [key, value] : file.values())
    if (!key.starts_with("results.") && std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("unknown config key: " + key);

  if (auto v = file.get("run.variant")) cfg.variant = flags::parse_variant(*v);
  if (auto v = file.get("run.target")) cfg.target = flags::parse_target_kind(*v);
  if (auto v = file.get("run.grid")) std::tie(cfg.width, cfg.height) = parse_grid(*v);
  read_into(file, "run.runs", cfg.runs);
  read_into(file, "run.seed", cfg.seed);
  if (auto v = file.get("run.out")) cfg.out_dir = *v;
  read_into(file, "run.threads", cfg.threads);

  auto& n = cfg.neat;
  read_into(file, "neat.pop_size", n.pop_size);
  read_into(file, "neat.max_evaluations", n.max_evaluations);
  if (auto v = file.get("neat.generations"))
    cfg.set_generations(parse_value<int>("neat.generations", *v));
  read_into(file, "neat.reproduction_ratio", n.reproduction_ratio);
  read_into(file, "neat.elite_per_species", n.elite_per_species);
  read_into(file, "neat.p_crossover", n.p_crossover);
  read_into(file, "neat.p_add_node", n.p_add_node);
  read_into(file, "neat.p_add_link", n.p_add_link);
  read_into(file, "neat.p_enable_link", n.p_enable_link);
  read_into(file, "neat.p_disable_link", n.p_disable_link);
  read_into(file, "neat.p_weight_gauss", n.p_weight_gauss);
  read_into(file, "neat.weight_gauss_sigma", n.weight_gauss_sigma);
  read_into(file, "neat.p_weight_uniform", n.p_weight_uniform);
  read_into(file, "neat.c1", n.c1);
  read_into(file, "neat.c2", n.c2);
  read_into(file, "neat.c3", n.c3);
  read_into(file, "neat.compat_threshold", n.compat_threshold);
  read_into(file, "neat.init_weight_min", n.init_weight_min);
  read_into(file, "neat.init_weight_max", n.init_weight_max);
  read_into(file, "neat.uniform_reset_min", n.uniform_reset_min);
  read_into(file, "neat.uniform_reset_max", n.uniform_reset_max);
  read_into(file, "neat.stagnation_generations", n.stagnation_generations);

  read_into(file, "growth.max_iterations", cfg.growth.max_iterations);
  read_into(file, "growth.stability_window", cfg.growth.stability_window);
  read_into(file, "growth.energy_epsilon", cfg.growth.energy_epsilon);
  return cfg;
}

std::string describe(const RunConfig& cfg) {
  std::ostringstream out;
  const auto& n = cfg.neat;
  auto d = format_double;
  out << "[run]\n"
      << "variant = " << cfg.variant.name() << "\n"
      << "target = " << flags::to_string(cfg.target) << "\n"
      << "grid = " << cfg.width << "x" << cfg.height << "\n"
      << "runs = " << cfg.runs << "\n"
      << "seed = " << cfg.seed << "\n"
      << "out = " << cfg.out_dir << "\n"
      << "\n[neat]\n"
      << "pop_size = " << n.pop_size << "\n"
      << "max_evaluations = " << n.max_evaluations << "\n"
      << "reproduction_ratio = " << d(n.reproduction_ratio) << "\n"
      << "elite_per_species = " << n.elite_per_species << "\n"
      << "p_crossover = " << d(n.p_crossover) << "\n"
      << "p_add_node = " << d(n.p_add_node) << "\n"
      << "p_add_link = " << d(n.p_add_link) << "\n"
      << "p_enable_link = " << d(n.p_enable_link) << "\n"
      << "p_disable_link = " << d(n.p_disable_link) << "\n"
      << "p_weight_gauss = " << d(n.p_weight_gauss) << "\n"
      << "weight_gauss_sigma = " << d(n.weight_gauss_sigma) << "\n"
      << "p_weight_uniform = " << d(n.p_weight_uniform) << "\n"
      << "c1 = " << d(n.c1) << "\n"
      << "c2 = " << d(n.c2) << "\n"
      << "c3 = " << d(n.c3) << "\n"
      << "compat_threshold = " << d(n.compat_threshold) << "\n"
      << "init_weight_min = " << d(n.init_weight_min) << "\n"
      << "init_weight_max = " << d(n.init_weight_max) << "\n"
      << "uniform_reset_min = " << d(n.uniform_reset_min) << "\n"
      << "uniform_reset_max = " << d(n.uniform_reset_max) << "\n"
      << "stagnation_generations = " << n.stagnation_generations << "\n"
      << "\n[growth]\n"
      << "max_iterations = " << cfg.growth.max_iterations << "\n"
      << "stability_window = " << cfg.growth.stability_window << "\n"
      << "energy_epsilon = " << d(cfg.growth.energy_epsilon) << "\n";
  return out.str();
}

std::vector<double> RunRecord::online_curve() const {
  std::vector<double> curve;
  for (const auto& g : generations) curve.push_back(g.best_fitness);
  return curve;
}

std::vector<double> RunRecord::mean_genome_edges() const {
  std::vector<double> edges;
  for (const auto& g : generations) edges.push_back(g.mean_genome_edges);
  return edges;
}

std::vector<flags::Evaluation> evaluate_all(const std::vector<neat::Genome>& genomes,
                                            const flags::ModelVariant& variant,
                                            const flags::GrayImage& target,
                                            const devo::GrowthConfig& growth, int threads) {
  std::vector<flags::Evaluation> results(genomes.size());
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(genomes.size(), 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < genomes.size(); ++i)
      results[i] = flags::evaluate(genomes[i], variant, target, growth);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = next++; i < genomes.size(); i = next++) {
      try {
        results[i] = flags::evaluate(genomes[i], variant, target, growth);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

RunRecord run_evolution(const RunConfig& cfg, int run_index, const Progress& progress) {
  cfg.validate();
  const auto target = flags::make_target(cfg.target, cfg.width, cfg.height);
  RunRecord record;
  record.run_index = run_index;
  record.seed = cfg.run_seed(run_index);
  neat::Population population(cfg.neat, cfg.variant.io(), cfg.variant.topology, record.seed);

  const int generations = cfg.generations();
  std::vector<double> fitness;
  for (int g = 0; g < generations; ++g) {
    const auto& genomes = population.genomes();
    const auto evals = evaluate_all(genomes, cfg.variant, target, cfg.growth, cfg.threads);
    record.evaluations += static_cast<std::int64_t>(evals.size());
    fitness.resize(evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i) {
      fitness[i] = evals[i].fitness;
      if ((g == 0 && i == 0) || fitness[i] > record.best_fitness) {
        record.best_fitness = fitness[i];
        record.best_genome = genomes[i];
        record.iterations_of_best = evals[i].iterations;
      }
    }
    const auto stats = population.advance(fitness);
    GenerationRecord row{g, stats.best_fitness, stats.mean_fitness, stats.species_count,
                         stats.mean_genome_edges};
    record.generations.push_back(row);
    if (progress) progress(row);
  }
  return record;
}

FiveNumber five_number_summary(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("five-number summary of no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double n4 = std::floor((n + 3.0) / 2.0) / 2.0;
  auto at = [&](double depth) {
    const auto lo = static_cast<std::size_t>(std::floor(depth)) - 1;
    const auto hi = static_cast<std::size_t>(std::ceil(depth)) - 1;
    return 0.5 * (values[lo] + values[hi]);
  };
  return {at(1.0), at(n4), at((n + 1.0) / 2.0), at(n + 1.0 - n4), at(n)};
}

BatchResult run_batch(const RunConfig& cfg,
                      const std::function<void(int, const GenerationRecord&)>& progress) {
  cfg.validate();
  BatchResult batch;
  for (int r = 0; r < cfg.runs; ++r) {
    Progress per_run;
    if (progress) per_run = [&, r](const GenerationRecord& row) { progress(r, row); };
    batch.runs.push_back(run_evolution(cfg, r, per_run));
    batch.final_fitness.push_back(batch.runs.back().best_fitness);
  }
  batch.summary = five_number_summary(batch.final_fitness);
  std::size_t len = 0;
  for (const auto& run : batch.runs) len = std::max(len, run.generations.size());
  batch.mean_online_curve.assign(len, 0.0);
  for (std::size_t g = 0; g < len; ++g) {
    int count = 0;
    for (const auto& run : batch.runs) {
      if (g < run.generations.size()) {
        batch.mean_online_curve[g] += run.generations[g].best_fitness;
        ++count;
      }
    }
    batch.mean_online_curve[g] /= count;
  }
  return batch;
}

std::string_view to_string(Recovery r) {
  switch (r) {
    case Recovery::exact: return "exact";
    case Recovery::close: return "close";
    case Recovery::diverged: return "diverged";
  }
  return "diverged";
}

HealingReport self_healing_experiment(const neat::Genome& champion,
                                      const flags::ModelVariant& variant,
                                      const flags::GrayImage& target,
                                      const devo::GrowthConfig& growth,
                                      const HealingOptions& options) {
  if (variant.family != flags::Family::developmental)
    throw std::invalid_argument("self-healing needs a developmental variant");
  devo::Organism fresh(champion, target.width(), target.height(), variant.chemicals);
  auto base = devo::grow(std::move(fresh), growth);
  if (!base.converged) throw std::runtime_error("champion does not converge; no healing trials");

  HealingReport report;
  report.original = *base.phenotype;
  report.original_iterations = base.iterations_used;
  report.original_fitness = flags::similarity(report.original, target);

  double recovered_iterations = 0.0;
  int recovered = 0;
  for (int t = 0; t < options.trials; ++t) {
    devo::Organism state = base.final_state;
    auto rng = stream(options.seed, {static_cast<std::uint64_t>(t),
                                     options.random_init ? phase::randomize : phase::perturb});
    if (options.random_init)
      state.randomize_state(rng);
    else
      state.perturb(options.sigma, rng);
    const auto regrown = devo::grow(std::move(state), growth);

    HealingTrial trial;
    trial.converged = regrown.converged;
    trial.iterations = regrown.iterations_used;
    if (regrown.converged) {
      trial.similarity = flags::similarity(*regrown.phenotype, report.original);
      if (*regrown.phenotype == report.original)
        trial.outcome = Recovery::exact;
      else if (trial.similarity >= options.close_threshold)
        trial.outcome = Recovery::close;
    }
    if (trial.outcome != Recovery::diverged) {
      recovered_iterations += trial.iterations;
      ++recovered;
    }
    report.trials.push_back(trial);
  }
  const double n = std::max(options.trials, 1);
  auto fraction = [&](Recovery r) {
    return std::count_if(report.trials.begin(), report.trials.end(),
                         [r](const HealingTrial& t) { return t.outcome == r; }) /
           n;
  };
  report.exact_fraction = fraction(Recovery::exact);
  report.close_fraction = fraction(Recovery::close);
  report.diverged_fraction = fraction(Recovery::diverged);
  report.mean_recovery_iterations = recovered > 0 ? recovered_iterations / recovered : 0.0;
  return report;
}

namespace {

std::string snapshot_name(const std::string& prefix, int iteration, const std::string& channel) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter-%05d-", iteration);
  return prefix + buf + channel + ".pgm";
}

}  // namespace

SnapshotResult snapshot_growth(const neat::Genome& champion, const flags::ModelVariant& variant,
                               int width, int height, const devo::GrowthConfig& growth,
                               std::vector<int> iterations, const std::string& dir,
                               const std::string& prefix) {
  if (variant.family != flags::Family::developmental)
    throw std::invalid_argument("snapshots need a developmental variant");
  std::sort(iterations.begin(), iterations.end());
  iterations.erase(std::unique(iterations.begin(), iterations.end()), iterations.end());
  if (!iterations.empty() && iterations.front() < 0)
    throw std::invalid_argument("negative snapshot iteration");
  std::filesystem::create_directories(dir);

  devo::Organism org(champion, width, height, variant.chemicals);
  devo::StabilityMonitor monitor(growth, org.energy());
  SnapshotResult result;
  bool stopped = false;
  for (int wanted : iterations) {
    while (!stopped && org.iteration() < wanted) {
      org.step();
      monitor.observe(org.energy());
      stopped = monitor.stable() || org.iteration() >= growth.max_iterations;
    }
    if (org.iteration() < wanted)
      result.notes.push_back("iteration " + std::to_string(wanted) + " requested, growth " +
                             (monitor.stable() ? "converged" : "stopped") + " at " +
                             std::to_string(org.iteration()) + "; final state used");
    const auto write = [&](const std::string& channel, const flags::GrayImage& img) {
      const auto path = (std::filesystem::path(dir) / snapshot_name(prefix, wanted, channel)).string();
      flags::save_pgm(path, img);
      result.files.push_back(path);
    };
    write("phenotype", org.phenotype());
    for (int k = 1; k <= variant.chemicals; ++k) write("chem" + std::to_string(k), org.chemical_map(k));
  }
  result.converged = monitor.stable();
  result.final_iteration = org.iteration();

  std::ofstream manifest(std::filesystem::path(dir) / (prefix + "snapshots.txt"));
  manifest << "variant " << variant.name() << "\ngrid " << width << "x" << height << "\n"
           << "final_iteration " << result.final_iteration << "\nconverged "
           << (result.converged ? 1 : 0) << "\n";
  for (const auto& f : result.files) manifest << "file " << f << "\n";
  for (const auto& n : result.notes) manifest << "note " << n << "\n";
  return result;
}

void export_csv(const RunRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "generation,best_fitness,mean_fitness,species_count,mean_genome_edges\n";
  for (const auto& g : record.generations)
    out << g.generation << "," << format_double(g.best_fitness) << ","
        << format_double(g.mean_fitness) << "," << g.species_count << ","
        << format_double(g.mean_genome_edges) << "\n";
  if (!out) throw std::runtime_error("failed writing " + path);
}

void export_csv(const BatchResult& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "run,seed,best_fitness,iterations_of_best,final_mean_genome_edges\n";
  for (const auto& run : batch.runs) {
    const double edges = run.generations.empty() ? 0.0 : run.generations.back().mean_genome_edges;
    out << run.run_index << "," << run.seed << "," << format_double(run.best_fitness) << ","
        << run.iterations_of_best << "," << format_double(edges) << "\n";
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<GenerationRecord> read_run_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  std::vector<GenerationRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell[5];
    for (auto& c : cell)
      if (!std::getline(fields, c, ',')) throw std::runtime_error("short CSV row in " + path);
    rows.push_back({std::stoi(cell[0]), std::strtod(cell[1].c_str(), nullptr),
                    std::strtod(cell[2].c_str(), nullptr), std::stoi(cell[3]),
                    std::strtod(cell[4].c_str(), nullptr)});
  }
  return rows;
}

void write_manifest(const std::string& path, const RunConfig& cfg,
                    const std::vector<std::string>& extra_lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# celldev run manifest\n" << describe(cfg);
  if (!extra_lines.empty()) out << "\n[results]\n";
  for (const auto& line : extra_lines) out << line << "\n";
}

}  // namespace celldev::harness
