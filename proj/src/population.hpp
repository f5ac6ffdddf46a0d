#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "util.hpp"

namespace idsim {

struct EdgeSpec {
    std::string from;
    std::string to;
    double flow_weight = 1.0;
    std::uint32_t transit_time = 1;  // epochs spent on the edge
    std::string region;              // empty = unlabeled
    double length = 1.0;             // metadata; dynamics are driven by transit_time
};

struct NodeSpec {
    std::string id;
    bool sink = false;  // devices arriving here leave the system
};

// Directed vessel graph with labeled regions of interest. Immutable after
// construction; regions are the distinct edge labels in sorted order.
class VascularGraph {
  public:
    VascularGraph(std::vector<NodeSpec> nodes, std::vector<EdgeSpec> edges);

    static VascularGraph from_json_text(const std::string& text);
    std::string to_json_text() const;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const EdgeSpec& edge(std::uint32_t e) const { return edges_[e]; }
    const NodeSpec& node(std::uint32_t n) const { return nodes_[n]; }
    std::uint32_t edge_target_node(std::uint32_t e) const { return edge_to_[e]; }

    std::span<const std::uint32_t> outgoing(std::uint32_t node) const;
    const std::vector<double>& outgoing_cumulative_weights(std::uint32_t node) const {
        return out_cumweights_[node];
    }
    bool is_sink(std::uint32_t node) const { return nodes_[node].sink; }

    const std::vector<std::string>& region_labels() const { return region_labels_; }
    // Region index of an edge, or -1 when unlabeled.
    std::int32_t region_of_edge(std::uint32_t e) const { return edge_region_[e]; }
    std::span<const std::uint32_t> region_edges(std::uint32_t region) const;
    std::optional<std::uint32_t> region_index(const std::string& label) const;

  private:
    std::vector<NodeSpec> nodes_;
    std::vector<EdgeSpec> edges_;
    std::vector<std::uint32_t> edge_to_;
    std::vector<std::vector<std::uint32_t>> out_edges_;
    std::vector<std::vector<double>> out_cumweights_;
    std::vector<std::string> region_labels_;
    std::vector<std::int32_t> edge_region_;
    std::vector<std::vector<std::uint32_t>> region_edge_lists_;
};

struct LocalSensorParams {
    double p_self = 1.0;  // P(correct region reading | device inside a region)
    double p_conf = 0.0;  // P(confused reading of some other region)
};

struct Device {
    std::uint32_t id = 0;
    std::uint32_t edge = 0;
    std::uint32_t step = 0;  // epochs already spent on the edge, < transit_time
    bool activated = false;
    bool exited = false;
    std::uint16_t payload_units = 1;
    std::uint16_t payload_released = 0;
    double p_self = 1.0;
    double p_conf = 0.0;
    std::uint64_t seed = 0;  // pre-shared per-device randomness

    double progress(const VascularGraph& graph) const {
        return static_cast<double>(step) / static_cast<double>(graph.edge(edge).transit_time);
    }
};

// Region index the device believes it is in, or nothing.
using LocalReading = std::optional<std::uint32_t>;

// Places `count` devices uniformly over edges with uniform in-edge offsets.
std::vector<Device> make_population(const VascularGraph& graph, std::size_t count,
                                    const LocalSensorParams& sensor, std::uint16_t payload_units,
                                    std::uint64_t seed);

// Advances every non-exited device by `epochs` steps of passive transport:
// one transit step per epoch, branching at junctions proportionally to flow
// weights. Deterministic given the seed; per-device streams are derived from
// seed and device identity, so the result is independent of worker count.
void advect(const VascularGraph& graph, std::span<Device> devices, std::uint32_t epochs,
            std::uint64_t seed, std::size_t workers = 0);

LocalReading read_local_sensor(const Device& device, const VascularGraph& graph,
                               std::uint64_t seed);

// Marks the device activated; releases one payload unit on first activation.
// Returns the number of units released (0 on repeat activation).
std::uint32_t activate(Device& device);

std::size_t count_in_region(const VascularGraph& graph, std::span<const Device> devices,
                            std::uint32_t region);

}  // namespace idsim
