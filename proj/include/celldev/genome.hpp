#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "celldev/network.hpp"

namespace celldev::neat {

using neuro::Topology;

enum class NodeRole { input, bias, output, hidden };

std::string_view to_string(NodeRole role);

struct NodeGene {
  int id = 0;
  NodeRole role = NodeRole::hidden;

  friend bool operator==(const NodeGene&, const NodeGene&) = default;
};

struct ConnGene {
  std::int64_t innovation = 0;
  int from = 0;
  int to = 0;
  double weight = 0.0;
  bool enabled = true;

  friend bool operator==(const ConnGene&, const ConnGene&) = default;
};

// Inputs, not counting the always-on bias slot, and outputs.
struct IoShape {
  int inputs = 0;
  int outputs = 0;
};

// Node ids follow a fixed layout: inputs 0..n-1, bias n, outputs n+1..n+m,
// hidden nodes above that. Connection genes are kept sorted by innovation.
struct Genome {
  std::vector<NodeGene> nodes;
  std::vector<ConnGene> conns;
  Topology kind = Topology::feedforward;

  IoShape io() const;
  int bias_id() const { return io().inputs; }
  const NodeGene* find_node(int id) const;
  NodeRole role_of(int id) const;
  bool has_connection(int from, int to) const;
  int enabled_count() const;

  // Inserts keeping innovation order.
  void add_conn(const ConnGene& gene);

  friend bool operator==(const Genome&, const Genome&) = default;
};

// Hands out innovation numbers and hidden node ids so that the same
// structural mutation gets the same markings across genomes.
class InnovationRegistry {
 public:
  InnovationRegistry() = default;
  explicit InnovationRegistry(int first_hidden_id) : next_node_id_(first_hidden_id) {}

  std::int64_t connection(int from, int to);
  // Node id for splitting the connection with `innovation`; a second
  // split of the same gene inside one genome needs `fresh` = true.
  int split_node(std::int64_t innovation, bool fresh = false);

  // Ensures hidden node ids start at or above `first_hidden_id`.
  void reserve_node_ids(int first_hidden_id);

  std::int64_t next_innovation() const { return next_innovation_; }
  int next_node_id() const { return next_node_id_; }

 private:
  std::int64_t next_innovation_ = 0;
  int next_node_id_ = 0;
  std::map<std::pair<int, int>, std::int64_t> seen_;
  std::map<std::int64_t, int> split_seen_;
};

bool is_acyclic(const Genome& g);
bool would_create_cycle(const Genome& g, int from, int to);
bool satisfies_io_connectivity(const Genome& g);
bool innovations_sorted(const Genome& g);

// Compiles enabled genes into a wiring. Neuron indices: outputs first in
// id order (so output_ids = 0..m-1), hidden nodes after. Input slots:
// inputs 0..n-1, bias at slot n.
std::shared_ptr<const neuro::Wiring> compile(const Genome& g);

void write_genome(std::ostream& out, const Genome& g);
Genome read_genome(std::istream& in);
std::string to_text(const Genome& g);
Genome from_text(const std::string& text);
void save_genome(const std::string& path, const Genome& g);
Genome load_genome(const std::string& path);

}  // namespace celldev::neat
