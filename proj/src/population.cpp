#include "population.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace idsim {

VascularGraph::VascularGraph(std::vector<NodeSpec> nodes, std::vector<EdgeSpec> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    if (edges_.empty()) throw ConfigError("graph: needs at least one edge");
    std::map<std::string, std::uint32_t> node_index;
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id.empty()) throw ConfigError("graph: node ids must be nonempty");
        if (!node_index.emplace(nodes_[i].id, i).second)
            throw ConfigError("graph: duplicate node id \"" + nodes_[i].id + "\"");
    }
    out_edges_.resize(nodes_.size());
    std::vector<bool> has_in(nodes_.size(), false);
    edge_to_.resize(edges_.size());
    edge_region_.resize(edges_.size(), -1);
    std::set<std::string> labels;
    for (std::uint32_t e = 0; e < edges_.size(); ++e) {
        const EdgeSpec& spec = edges_[e];
        auto from = node_index.find(spec.from);
        auto to = node_index.find(spec.to);
        if (from == node_index.end() || to == node_index.end())
            throw ConfigError("graph: edge " + std::to_string(e) + " references unknown node");
        if (!(spec.flow_weight > 0.0))
            throw ConfigError("graph: edge " + std::to_string(e) + " needs flow_weight > 0");
        if (spec.transit_time < 1)
            throw ConfigError("graph: edge " + std::to_string(e) + " needs transit_time >= 1");
        out_edges_[from->second].push_back(e);
        has_in[to->second] = true;
        edge_to_[e] = to->second;
        if (!spec.region.empty()) labels.insert(spec.region);
    }
    for (std::uint32_t n = 0; n < nodes_.size(); ++n) {
        if (nodes_[n].sink && !out_edges_[n].empty())
            throw ConfigError("graph: node \"" + nodes_[n].id + "\" is a sink but has outgoing edges");
        if (has_in[n] && out_edges_[n].empty() && !nodes_[n].sink)
            throw ConfigError("graph: node \"" + nodes_[n].id +
                              "\" has inbound edges but no outlet and is not marked as a sink");
    }
    region_labels_.assign(labels.begin(), labels.end());
    region_edge_lists_.resize(region_labels_.size());
    for (std::uint32_t e = 0; e < edges_.size(); ++e) {
        if (edges_[e].region.empty()) continue;
        auto it = std::lower_bound(region_labels_.begin(), region_labels_.end(), edges_[e].region);
        auto idx = static_cast<std::int32_t>(it - region_labels_.begin());
        edge_region_[e] = idx;
        region_edge_lists_[idx].push_back(e);
    }
    out_cumweights_.resize(nodes_.size());
    for (std::uint32_t n = 0; n < nodes_.size(); ++n) {
        double acc = 0.0;
        for (std::uint32_t e : out_edges_[n]) {
            acc += edges_[e].flow_weight;
            out_cumweights_[n].push_back(acc);
        }
    }
}

std::span<const std::uint32_t> VascularGraph::outgoing(std::uint32_t node) const {
    return {out_edges_[node].data(), out_edges_[node].size()};
}

std::span<const std::uint32_t> VascularGraph::region_edges(std::uint32_t region) const {
    return {region_edge_lists_[region].data(), region_edge_lists_[region].size()};
}

std::optional<std::uint32_t> VascularGraph::region_index(const std::string& label) const {
    auto it = std::lower_bound(region_labels_.begin(), region_labels_.end(), label);
    if (it == region_labels_.end() || *it != label) return std::nullopt;
    return static_cast<std::uint32_t>(it - region_labels_.begin());
}

VascularGraph VascularGraph::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("graph json: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("graph json: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "nodes" && it.key() != "edges")
            throw ConfigError("graph json: unknown key \"" + it.key() + "\"");
    if (!j.contains("nodes") || !j["nodes"].is_array() || !j.contains("edges") ||
        !j["edges"].is_array())
        throw ConfigError("graph json: expected nodes and edges arrays");

    std::vector<NodeSpec> nodes;
    for (const auto& n : j["nodes"]) {
        NodeSpec spec;
        if (n.is_string()) {
            spec.id = n.get<std::string>();
        } else if (n.is_object()) {
            for (auto it = n.begin(); it != n.end(); ++it)
                if (it.key() != "id" && it.key() != "sink")
                    throw ConfigError("graph json: unknown node key \"" + it.key() + "\"");
            if (!n.contains("id") || !n["id"].is_string())
                throw ConfigError("graph json: node objects need a string id");
            spec.id = n["id"].get<std::string>();
            if (n.contains("sink")) {
                if (!n["sink"].is_boolean()) throw ConfigError("graph json: sink must be boolean");
                spec.sink = n["sink"].get<bool>();
            }
        } else {
            throw ConfigError("graph json: nodes must be strings or objects");
        }
        nodes.push_back(std::move(spec));
    }

    std::vector<EdgeSpec> edges;
    for (const auto& e : j["edges"]) {
        if (!e.is_object()) throw ConfigError("graph json: edges must be objects");
        for (auto it = e.begin(); it != e.end(); ++it) {
            const std::string& k = it.key();
            if (k != "from" && k != "to" && k != "flow_weight" && k != "transit_time" &&
                k != "region" && k != "length")
                throw ConfigError("graph json: unknown edge key \"" + k + "\"");
        }
        EdgeSpec spec;
        if (!e.contains("from") || !e["from"].is_string() || !e.contains("to") ||
            !e["to"].is_string())
            throw ConfigError("graph json: edges need string from/to");
        spec.from = e["from"].get<std::string>();
        spec.to = e["to"].get<std::string>();
        if (!e.contains("flow_weight") || !e["flow_weight"].is_number())
            throw ConfigError("graph json: edges need numeric flow_weight");
        spec.flow_weight = e["flow_weight"].get<double>();
        if (!e.contains("transit_time") || !e["transit_time"].is_number_unsigned())
            throw ConfigError("graph json: edges need unsigned transit_time");
        spec.transit_time = e["transit_time"].get<std::uint32_t>();
        if (e.contains("region")) {
            if (!e["region"].is_string()) throw ConfigError("graph json: region must be a string");
            spec.region = e["region"].get<std::string>();
        }
        if (e.contains("length")) {
            if (!e["length"].is_number()) throw ConfigError("graph json: length must be numeric");
            spec.length = e["length"].get<double>();
        }
        edges.push_back(std::move(spec));
    }
    return VascularGraph(std::move(nodes), std::move(edges));
}

std::string VascularGraph::to_json_text() const {
    nlohmann::ordered_json j;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : nodes_) {
        if (n.sink)
            nodes.push_back({{"id", n.id}, {"sink", true}});
        else
            nodes.push_back(n.id);
    }
    j["nodes"] = std::move(nodes);
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : edges_) {
        nlohmann::ordered_json je{{"from", e.from},
                                  {"to", e.to},
                                  {"flow_weight", e.flow_weight},
                                  {"transit_time", e.transit_time}};
        if (!e.region.empty()) je["region"] = e.region;
        if (e.length != 1.0) je["length"] = e.length;
        edges.push_back(std::move(je));
    }
    j["edges"] = std::move(edges);
    return j.dump();
}

std::vector<Device> make_population(const VascularGraph& graph, std::size_t count,
                                    const LocalSensorParams& sensor, std::uint16_t payload_units,
                                    std::uint64_t seed) {
    if (count == 0) throw ConfigError("population: count must be positive");
    if (!(sensor.p_self >= 0.0 && sensor.p_conf >= 0.0 && sensor.p_self + sensor.p_conf <= 1.0))
        throw ConfigError("population: need p_self, p_conf >= 0 and p_self + p_conf <= 1");
    std::vector<Device> devices(count);
    for (std::size_t i = 0; i < count; ++i) {
        Device& d = devices[i];
        d.id = static_cast<std::uint32_t>(i);
        d.seed = derive_seed({seed, 0xDE5EEDULL, d.id});
        Rng rng(d.seed);
        d.edge = static_cast<std::uint32_t>(rng.below(graph.edge_count()));
        d.step = static_cast<std::uint32_t>(rng.below(graph.edge(d.edge).transit_time));
        d.p_self = sensor.p_self;
        d.p_conf = sensor.p_conf;
        d.payload_units = payload_units;
    }
    return devices;
}

void advect(const VascularGraph& graph, std::span<Device> devices, std::uint32_t epochs,
            std::uint64_t seed, std::size_t workers) {
    parallel_for(devices.size(), workers, [&](std::size_t idx) {
        Device& d = devices[idx];
        if (d.exited) return;
        Rng rng(seed ^ d.seed);
        for (std::uint32_t step = 0; step < epochs && !d.exited; ++step) {
            d.step += 1;
            if (d.step < graph.edge(d.edge).transit_time) continue;
            std::uint32_t node = graph.edge_target_node(d.edge);
            auto out = graph.outgoing(node);
            if (out.empty()) {
                d.exited = true;
                continue;
            }
            std::size_t pick =
                out.size() == 1 ? 0 : rng.categorical(graph.outgoing_cumulative_weights(node));
            d.edge = out[pick];
            d.step = 0;
        }
    });
}

LocalReading read_local_sensor(const Device& device, const VascularGraph& graph,
                               std::uint64_t seed) {
    if (device.exited) return std::nullopt;
    const auto regions = static_cast<std::uint32_t>(graph.region_labels().size());
    if (regions == 0) return std::nullopt;
    Rng rng(seed ^ device.seed);
    std::int32_t own = graph.region_of_edge(device.edge);
    double u = rng.next_unit();
    if (own >= 0) {
        if (u < device.p_self) return static_cast<std::uint32_t>(own);
        if (u < device.p_self + device.p_conf) {
            // Confused into a uniformly random other region; with a single
            // region there is nowhere to confuse to.
            if (regions < 2) return std::nullopt;
            std::uint32_t other = static_cast<std::uint32_t>(rng.below(regions - 1));
            if (other >= static_cast<std::uint32_t>(own)) ++other;
            return other;
        }
        return std::nullopt;
    }
    if (u < device.p_conf) return static_cast<std::uint32_t>(rng.below(regions));
    return std::nullopt;
}

std::uint32_t activate(Device& device) {
    if (device.exited) throw RuntimeError("activate: device has exited the system");
    if (device.activated) return 0;
    device.activated = true;
    if (device.payload_released < device.payload_units) {
        device.payload_released += 1;
        return 1;
    }
    return 0;
}

std::size_t count_in_region(const VascularGraph& graph, std::span<const Device> devices,
                            std::uint32_t region) {
    std::size_t count = 0;
    for (const Device& d : devices)
        if (!d.exited && graph.region_of_edge(d.edge) == static_cast<std::int32_t>(region))
            ++count;
    return count;
}

}  // namespace idsim
