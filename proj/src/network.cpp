#include "celldev/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>

namespace celldev::neuro {

std::string_view to_string(Topology kind) {
  return kind == Topology::feedforward ? "feedforward" : "recurrent";
}

Topology parse_topology(std::string_view text) {
  if (text == "feedforward" || text == "ffwd") return Topology::feedforward;
  if (text == "recurrent" || text == "recurr") return Topology::recurrent;
  throw std::invalid_argument("unknown topology: " + std::string(text));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

void build_csr(int rows, const std::vector<Link>& links, std::vector<int>& offsets,
               std::vector<int>& sources, std::vector<double>& weights) {
  offsets.assign(rows + 1, 0);
  for (const auto& l : links) ++offsets[l.target + 1];
  for (int r = 0; r < rows; ++r) offsets[r + 1] += offsets[r];
  sources.resize(links.size());
  weights.resize(links.size());
  std::vector<int> fill(offsets.begin(), offsets.end() - 1);
  for (const auto& l : links) {
    sources[fill[l.target]] = l.source;
    weights[fill[l.target]] = l.weight;
    ++fill[l.target];
  }
}

// Kahn's algorithm, smallest ready index first. Empty result on a cycle.
std::vector<int> topological_order(int n, const std::vector<Link>& links) {
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> successors(n);
  for (const auto& l : links) {
    ++indegree[l.target];
    successors[l.source].push_back(l.target);
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    int i = ready.top();
    ready.pop();
    order.push_back(i);
    for (int s : successors[i])
      if (--indegree[s] == 0) ready.push(s);
  }
  if (static_cast<int>(order.size()) != n) order.clear();
  return order;
}

}  // namespace

Wiring::Wiring(int num_neurons, int num_inputs, std::vector<int> output_ids, Topology kind,
               std::vector<Link> neuron_links, std::vector<Link> input_links)
    : num_neurons_(num_neurons),
      num_inputs_(num_inputs),
      kind_(kind),
      output_ids_(std::move(output_ids)),
      neuron_links_(std::move(neuron_links)),
      input_links_(std::move(input_links)) {
  if (num_neurons_ < 1 || num_inputs_ < 0)
    throw std::invalid_argument("wiring needs at least one neuron");
  for (int id : output_ids_)
    if (id < 0 || id >= num_neurons_) throw std::invalid_argument("output id out of range");
  for (const auto& l : neuron_links_)
    if (l.target < 0 || l.target >= num_neurons_ || l.source < 0 || l.source >= num_neurons_)
      throw std::invalid_argument("neuron link out of range");
  for (const auto& l : input_links_)
    if (l.target < 0 || l.target >= num_neurons_ || l.source < 0 || l.source >= num_inputs_)
      throw std::invalid_argument("input link out of range");

  build_csr(num_neurons_, neuron_links_, neuron_offsets_, neuron_sources_, neuron_weights_);
  build_csr(num_neurons_, input_links_, input_offsets_, input_sources_, input_weights_);

  if (kind_ == Topology::feedforward) {
    topo_order_ = topological_order(num_neurons_, neuron_links_);
    if (topo_order_.empty()) throw std::invalid_argument("feedforward wiring contains a cycle");
  }
}

void Wiring::check_inputs(std::span<const double> inputs) const {
  if (static_cast<int>(inputs.size()) != num_inputs_)
    throw std::invalid_argument("input vector has length " + std::to_string(inputs.size()) +
                                ", expected " + std::to_string(num_inputs_));
}

double Wiring::net_input(int neuron, std::span<const double> activations,
                         std::span<const double> inputs) const {
  double sum = 0.0;
  for (int k = neuron_offsets_[neuron]; k < neuron_offsets_[neuron + 1]; ++k)
    sum += neuron_weights_[k] * activations[neuron_sources_[k]];
  for (int k = input_offsets_[neuron]; k < input_offsets_[neuron + 1]; ++k)
    sum += input_weights_[k] * inputs[input_sources_[k]];
  return sum;
}

void Wiring::step_synchronous(std::span<const double> prev, std::span<const double> inputs,
                              std::span<double> next) const {
  check_inputs(inputs);
  for (int i = 0; i < num_neurons_; ++i) next[i] = sigmoid(net_input(i, prev, inputs));
}

void Wiring::forward_pass(std::span<double> activations, std::span<const double> inputs) const {
  if (kind_ != Topology::feedforward)
    throw std::logic_error("forward_pass requires a feedforward wiring");
  check_inputs(inputs);
  for (int i : topo_order_) activations[i] = sigmoid(net_input(i, activations, inputs));
}

void Wiring::advance(std::span<const double> prev, std::span<const double> inputs,
                     std::span<double> next) const {
  if (kind_ == Topology::feedforward)
    forward_pass(next, inputs);
  else
    step_synchronous(prev, inputs, next);
}

Network::Network(std::shared_ptr<const Wiring> wiring)
    : wiring_(std::move(wiring)),
      activations_(wiring_->num_neurons(), 0.0),
      scratch_(wiring_->num_neurons(), 0.0) {}

Network& Network::step_synchronous(std::span<const double> inputs) {
  wiring_->step_synchronous(activations_, inputs, scratch_);
  activations_.swap(scratch_);
  return *this;
}

Network& Network::forward_pass(std::span<const double> inputs) {
  wiring_->forward_pass(activations_, inputs);
  return *this;
}

Network& Network::reset() {
  std::fill(activations_.begin(), activations_.end(), 0.0);
  return *this;
}

double Network::energy() const {
  double e = 0.0;
  for (double a : activations_) e += a * a;
  return e;
}

}  // namespace celldev::neuro
