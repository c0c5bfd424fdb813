#pragma once

#include <string>
#include <vector>

#include "snop/diagram.hpp"

namespace snop {

/// Endpoint of a wire: a node port, or a boundary slot when node == kBoundary.
struct PGEndpoint {
    static constexpr int kBoundary = -1;
    int node = kBoundary;
    int port = 0;

    bool operator==(const PGEndpoint&) const = default;
    auto operator<=>(const PGEndpoint&) const = default;
};

struct PGNode {
    std::string label;            // "atom:G", "atom+:G" (daggered), "ctrl:<word>@<space>"
    std::vector<int> in_dims;
    std::vector<int> out_dims;
    bool is_ctrl = false;
    std::vector<CtrlLetter> word;  // ctrl nodes only
    std::string space;             // ctrl nodes only
};

struct PGEdge {
    PGEndpoint from;  // node out-port, or boundary input slot
    PGEndpoint to;    // node in-port, or boundary output slot
    int dim = 1;

    auto operator<=>(const PGEdge&) const = default;
};

/// Connectivity-only form of a diagram. Boundary ports are ordered; identity,
/// permutation and feedback leave no nodes behind, only wiring.
struct PortGraph {
    std::vector<PGNode> nodes;
    std::vector<PGEdge> edges;
    std::vector<int> in_dims;
    std::vector<int> out_dims;
    int closed_loops = 0;  // wires fed back onto themselves, no endpoints
};

/// Convert a well-typed diagram. Dagger is eliminated first (wires reverse,
/// labels dagger); throws TypeError if the diagram does not typecheck.
PortGraph to_port_graph(const Diagram& d);

/// Plain order-of-construction serialization (not canonical across
/// isomorphic relabelings; see rewrite.hpp for the canonical form).
std::string serialize_port_graph(const PortGraph& g);

}  // namespace snop
