#include "celldev/genome.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace celldev::neat {

std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::input: return "input";
    case NodeRole::bias: return "bias";
    case NodeRole::output: return "output";
    case NodeRole::hidden: return "hidden";
  }
  return "hidden";
}

namespace {

NodeRole parse_role(std::string_view s) {
  if (s == "input") return NodeRole::input;
  if (s == "bias") return NodeRole::bias;
  if (s == "output") return NodeRole::output;
  if (s == "hidden") return NodeRole::hidden;
  throw std::runtime_error("unknown node role: " + std::string(s));
}

bool is_source_role(NodeRole r) { return r == NodeRole::input || r == NodeRole::bias; }

}  // namespace

IoShape Genome::io() const {
  IoShape shape;
  for (const auto& n : nodes) {
    if (n.role == NodeRole::input) ++shape.inputs;
    if (n.role == NodeRole::output) ++shape.outputs;
  }
  return shape;
}

const NodeGene* Genome::find_node(int id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

NodeRole Genome::role_of(int id) const {
  const auto* n = find_node(id);
  if (!n) throw std::out_of_range("no node with id " + std::to_string(id));
  return n->role;
}

bool Genome::has_connection(int from, int to) const {
  return std::any_of(conns.begin(), conns.end(),
                     [&](const ConnGene& c) { return c.from == from && c.to == to; });
}

int Genome::enabled_count() const {
  return static_cast<int>(
      std::count_if(conns.begin(), conns.end(), [](const ConnGene& c) { return c.enabled; }));
}

void Genome::add_conn(const ConnGene& gene) {
  auto pos = std::upper_bound(
      conns.begin(), conns.end(), gene.innovation,
      [](std::int64_t innov, const ConnGene& c) { return innov < c.innovation; });
  conns.insert(pos, gene);
}

std::int64_t InnovationRegistry::connection(int from, int to) {
  auto [it, inserted] = seen_.try_emplace({from, to}, next_innovation_);
  if (inserted) ++next_innovation_;
  return it->second;
}

int InnovationRegistry::split_node(std::int64_t innovation, bool fresh) {
  if (fresh) return next_node_id_++;
  auto [it, inserted] = split_seen_.try_emplace(innovation, next_node_id_);
  if (inserted) ++next_node_id_;
  return it->second;
}

void InnovationRegistry::reserve_node_ids(int first_hidden_id) {
  next_node_id_ = std::max(next_node_id_, first_hidden_id);
}

bool would_create_cycle(const Genome& g, int from, int to) {
  if (from == to) return true;
  // Is `from` reachable from `to` over all genes?
  std::vector<int> stack{to};
  std::vector<int> visited;
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    if (node == from) return true;
    if (std::find(visited.begin(), visited.end(), node) != visited.end()) continue;
    visited.push_back(node);
    for (const auto& c : g.conns)
      if (c.from == node) stack.push_back(c.to);
  }
  return false;
}

bool is_acyclic(const Genome& g) {
  std::unordered_map<int, int> indegree;
  for (const auto& n : g.nodes) indegree[n.id] = 0;
  for (const auto& c : g.conns) ++indegree[c.to];
  std::vector<int> ready;
  for (const auto& [id, d] : indegree)
    if (d == 0) ready.push_back(id);
  std::size_t removed = 0;
  while (!ready.empty()) {
    int id = ready.back();
    ready.pop_back();
    ++removed;
    for (const auto& c : g.conns)
      if (c.from == id && --indegree[c.to] == 0) ready.push_back(c.to);
  }
  return removed == indegree.size();
}

bool satisfies_io_connectivity(const Genome& g) {
  for (const auto& n : g.nodes) {
    if (n.role != NodeRole::input && n.role != NodeRole::output) continue;
    bool touched = std::any_of(g.conns.begin(), g.conns.end(), [&](const ConnGene& c) {
      return c.enabled && (c.from == n.id || c.to == n.id);
    });
    if (!touched) return false;
  }
  return true;
}

bool innovations_sorted(const Genome& g) {
  for (std::size_t i = 1; i < g.conns.size(); ++i)
    if (g.conns[i - 1].innovation >= g.conns[i].innovation) return false;
  return true;
}

std::shared_ptr<const neuro::Wiring> compile(const Genome& g) {
  const IoShape shape = g.io();
  std::vector<int> output_nodes;
  std::vector<int> hidden_nodes;
  for (const auto& n : g.nodes) {
    if (n.role == NodeRole::output) output_nodes.push_back(n.id);
    if (n.role == NodeRole::hidden) hidden_nodes.push_back(n.id);
  }
  std::sort(output_nodes.begin(), output_nodes.end());
  std::unordered_map<int, int> neuron_index;
  int next = 0;
  for (int id : output_nodes) neuron_index[id] = next++;
  for (int id : hidden_nodes) neuron_index[id] = next++;

  auto input_slot = [&](int id) {
    const auto role = g.role_of(id);
    return role == NodeRole::bias ? shape.inputs : id;
  };

  std::vector<neuro::Link> neuron_links;
  std::vector<neuro::Link> input_links;
  for (const auto& c : g.conns) {
    if (!c.enabled) continue;
    auto target = neuron_index.find(c.to);
    if (target == neuron_index.end())
      throw std::invalid_argument("connection targets an input or bias node");
    if (is_source_role(g.role_of(c.from)))
      input_links.push_back({target->second, input_slot(c.from), c.weight});
    else
      neuron_links.push_back({target->second, neuron_index.at(c.from), c.weight});
  }
  std::vector<int> output_ids(output_nodes.size());
  for (std::size_t k = 0; k < output_ids.size(); ++k) output_ids[k] = static_cast<int>(k);
  return std::make_shared<const neuro::Wiring>(next, shape.inputs + 1, std::move(output_ids),
                                               g.kind, std::move(neuron_links),
                                               std::move(input_links));
}

void write_genome(std::ostream& out, const Genome& g) {
  const IoShape shape = g.io();
  out << "celldev-genome 1\n";
  out << "kind " << neuro::to_string(g.kind) << "\n";
  out << "io " << shape.inputs << " " << shape.outputs << "\n";
  out << "nodes " << g.nodes.size() << "\n";
  for (const auto& n : g.nodes) out << "node " << n.id << " " << to_string(n.role) << "\n";
  out << "conns " << g.conns.size() << "\n";
  char buf[64];
  for (const auto& c : g.conns) {
    std::snprintf(buf, sizeof buf, "%.17g", c.weight);
    out << "conn " << c.innovation << " " << c.from << " " << c.to << " " << buf << " "
        << (c.enabled ? 1 : 0) << "\n";
  }
}

Genome read_genome(std::istream& in) {
  auto fail = [](const std::string& what) {
    throw std::runtime_error("malformed genome: " + what);
  };
  auto expect = [&](const std::string& keyword) {
    std::string word;
    if (!(in >> word) || word != keyword) fail("expected '" + keyword + "'");
  };
  expect("celldev-genome");
  int version = 0;
  if (!(in >> version) || version != 1) fail("unsupported version");

  Genome g;
  std::string kind;
  expect("kind");
  in >> kind;
  try {
    g.kind = neuro::parse_topology(kind);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  IoShape declared;
  expect("io");
  if (!(in >> declared.inputs >> declared.outputs)) fail("io counts");

  std::size_t count = 0;
  expect("nodes");
  if (!(in >> count)) fail("node count");
  for (std::size_t i = 0; i < count; ++i) {
    NodeGene n;
    std::string role;
    expect("node");
    if (!(in >> n.id >> role)) fail("node line");
    n.role = parse_role(role);
    g.nodes.push_back(n);
  }
  expect("conns");
  if (!(in >> count)) fail("connection count");
  for (std::size_t i = 0; i < count; ++i) {
    ConnGene c;
    std::string weight;
    int enabled = 0;
    expect("conn");
    if (!(in >> c.innovation >> c.from >> c.to >> weight >> enabled)) fail("conn line");
    c.weight = std::strtod(weight.c_str(), nullptr);
    c.enabled = enabled != 0;
    g.conns.push_back(c);
  }
  const IoShape actual = g.io();
  if (actual.inputs != declared.inputs || actual.outputs != declared.outputs)
    fail("io counts do not match node list");
  if (!innovations_sorted(g)) fail("innovations not strictly increasing");
  for (const auto& c : g.conns)
    if (!g.find_node(c.from) || !g.find_node(c.to)) fail("connection to unknown node");
  return g;
}

std::string to_text(const Genome& g) {
  std::ostringstream out;
  write_genome(out, g);
  return out.str();
}

Genome from_text(const std::string& text) {
  std::istringstream in(text);
  return read_genome(in);
}

void save_genome(const std::string& path, const Genome& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_genome(out, g);
}

Genome load_genome(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_genome(in);
}

}  // namespace celldev::neat
