#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace celldev::neuro {

enum class Topology { feedforward, recurrent };

std::string_view to_string(Topology kind);
Topology parse_topology(std::string_view text);

double sigmoid(double x);

// A weighted edge into neuron `target`. For neuron links `source` is a
// neuron index, for input links it is an input slot.
struct Link {
  int target = 0;
  int source = 0;
  double weight = 0.0;
};

// Immutable compiled controller structure. Evaluation reads incoming links
// per neuron from a compressed row layout built at construction.
class Wiring {
 public:
  // Throws std::invalid_argument on out-of-range indices, and when a
  // feedforward wiring contains a cycle.
  Wiring(int num_neurons, int num_inputs, std::vector<int> output_ids, Topology kind,
         std::vector<Link> neuron_links, std::vector<Link> input_links);

  int num_neurons() const { return num_neurons_; }
  int num_inputs() const { return num_inputs_; }
  Topology kind() const { return kind_; }
  const std::vector<int>& output_ids() const { return output_ids_; }
  const std::vector<int>& topo_order() const { return topo_order_; }
  const std::vector<Link>& neuron_links() const { return neuron_links_; }
  const std::vector<Link>& input_links() const { return input_links_; }

  // Synchronous update: every neuron reads `prev`, writes `next`.
  // `prev` and `next` must not alias.
  void step_synchronous(std::span<const double> prev, std::span<const double> inputs,
                        std::span<double> next) const;

  // One pass in topological order, in place. Requires feedforward kind.
  void forward_pass(std::span<double> activations, std::span<const double> inputs) const;

  // One growth step with the semantics matching kind(): forward_pass for
  // feedforward wiring (writes into `next`, ignores `prev`), synchronous
  // update otherwise.
  void advance(std::span<const double> prev, std::span<const double> inputs,
               std::span<double> next) const;

 private:
  double net_input(int neuron, std::span<const double> activations,
                   std::span<const double> inputs) const;
  void check_inputs(std::span<const double> inputs) const;

  int num_neurons_;
  int num_inputs_;
  Topology kind_;
  std::vector<int> output_ids_;
  std::vector<int> topo_order_;
  std::vector<Link> neuron_links_;
  std::vector<Link> input_links_;

  // CSR incoming edges.
  std::vector<int> neuron_offsets_;
  std::vector<int> neuron_sources_;
  std::vector<double> neuron_weights_;
  std::vector<int> input_offsets_;
  std::vector<int> input_sources_;
  std::vector<double> input_weights_;
};

// A controller instance: shared wiring plus its own activation vector.
class Network {
 public:
  explicit Network(std::shared_ptr<const Wiring> wiring);

  const Wiring& wiring() const { return *wiring_; }
  std::shared_ptr<const Wiring> shared_wiring() const { return wiring_; }
  Topology kind() const { return wiring_->kind(); }
  int num_neurons() const { return wiring_->num_neurons(); }
  int num_inputs() const { return wiring_->num_inputs(); }
  const std::vector<int>& output_ids() const { return wiring_->output_ids(); }

  std::span<const double> activations() const { return activations_; }
  std::span<double> activations() { return activations_; }
  double output(std::size_t k) const { return activations_[wiring_->output_ids()[k]]; }

  Network& step_synchronous(std::span<const double> inputs);
  Network& forward_pass(std::span<const double> inputs);
  Network& reset();
  double energy() const;

 private:
  std::shared_ptr<const Wiring> wiring_;
  std::vector<double> activations_;
  std::vector<double> scratch_;
};

}  // namespace celldev::neuro
