#include "snop/rewrite.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace snop {

namespace {

// ---------------------------------------------------------------------------
// Term-level control normalization

/// Build a Ctrl (or Id, when the word is neutral and the signatures agree)
/// from a normalized word.
Diagram ctrl_or_id(std::vector<CtrlLetter> word, const Signature& in_sig, const Signature& out_sig,
                   const ControlMonoid* monoid) {
    if (monoid) {
        const std::string token = monoid->resolve_word(word);
        if (token == monoid->neutral)
            word.clear();
        else
            word = {{token, false}};
    }
    if (word.empty() && in_sig == out_sig) return make_id(in_sig);
    return make_ctrl(ctrl_from_word(word), in_sig, out_sig);
}

/// Sequential composition with unit laws and adjacent-control fusion applied.
Diagram seq_normalized(Diagram a, Diagram b, const ControlMonoid* monoid) {
    if (a->kind == DiagramKind::Id) return b;
    if (b->kind == DiagramKind::Id) return a;
    // Rightmost stage of a, for fusion with a leading control of b.
    const Diagram& right = (a->kind == DiagramKind::Seq) ? a->b : a;
    if (right->kind == DiagramKind::Ctrl && b->kind == DiagramKind::Ctrl) {
        std::vector<CtrlLetter> word = ctrl_word(right->ctrl);
        std::vector<CtrlLetter> w2 = ctrl_word(b->ctrl);
        word.insert(word.end(), w2.begin(), w2.end());
        Diagram fused = ctrl_or_id(std::move(word), right->sig, b->sig2, monoid);
        if (a->kind == DiagramKind::Seq) return seq_normalized(a->a, fused, monoid);
        return seq_normalized(fused, make_id(b->sig2), monoid);
    }
    return make_seq(std::move(a), std::move(b));
}

}  // namespace

Diagram normalize_control(const Diagram& d, const ControlMonoid* monoid) {
    switch (d->kind) {
        case DiagramKind::Id:
        case DiagramKind::Atom:
        case DiagramKind::Perm:
            return d;
        case DiagramKind::Ctrl:
            return ctrl_or_id(ctrl_word(d->ctrl), d->sig, d->sig2, monoid);
        case DiagramKind::Tensor:
            return make_tensor(normalize_control(d->a, monoid), normalize_control(d->b, monoid));
        case DiagramKind::Seq:
            return seq_normalized(normalize_control(d->a, monoid),
                                  normalize_control(d->b, monoid), monoid);
        case DiagramKind::Feedback:
            return make_feedback(d->fb_out, d->fb_in, normalize_control(d->a, monoid));
        case DiagramKind::Dagger:
            return make_dagger(normalize_control(d->a, monoid));
    }
    throw TypeError("unreachable");
}

namespace {

// ---------------------------------------------------------------------------
// Graph-level control normalization (fusion across wiring, neutral erasure)

void refresh_ctrl_label(PGNode& n) {
    n.label = "ctrl:" + ctrl_word_to_string(n.word) + "@" + n.space;
}

void resolve_ctrl_node(PGNode& n, const ControlMonoid* monoid) {
    if (!monoid) return;
    const std::string token = monoid->resolve_word(n.word);
    if (token == monoid->neutral)
        n.word.clear();
    else
        n.word = {{token, false}};
    refresh_ctrl_label(n);
}

void compact_nodes(PortGraph& g, const std::vector<bool>& deleted) {
    std::vector<int> remap(g.nodes.size(), -1);
    std::vector<PGNode> nodes;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (deleted[i]) continue;
        remap[i] = static_cast<int>(nodes.size());
        nodes.push_back(std::move(g.nodes[i]));
    }
    g.nodes = std::move(nodes);
    for (auto& e : g.edges) {
        if (e.from.node >= 0) e.from.node = remap[static_cast<std::size_t>(e.from.node)];
        if (e.to.node >= 0) e.to.node = remap[static_cast<std::size_t>(e.to.node)];
    }
}

void normalize_graph_control(PortGraph& g, const ControlMonoid* monoid) {
    for (auto& n : g.nodes)
        if (n.is_ctrl) resolve_ctrl_node(n, monoid);

    std::vector<bool> deleted(g.nodes.size(), false);

    // Fuse wire-adjacent control pairs on the same space until fixpoint.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
            const PGEdge e = g.edges[ei];
            if (e.from.node < 0 || e.to.node < 0 || e.from.node == e.to.node) continue;
            PGNode& a = g.nodes[static_cast<std::size_t>(e.from.node)];
            PGNode& b = g.nodes[static_cast<std::size_t>(e.to.node)];
            if (!a.is_ctrl || !b.is_ctrl || a.space != b.space) continue;
            if (deleted[static_cast<std::size_t>(e.from.node)] ||
                deleted[static_cast<std::size_t>(e.to.node)])
                continue;
            // a feeds b: combined word applies a first, then b.
            a.word.insert(a.word.end(), b.word.begin(), b.word.end());
            if (monoid)
                resolve_ctrl_node(a, monoid);
            else
                refresh_ctrl_label(a);
            // a's out wire becomes b's out wire; drop the linking edge and b.
            deleted[static_cast<std::size_t>(e.to.node)] = true;
            for (auto& e2 : g.edges)
                if (e2.from == PGEndpoint{e.to.node, 0}) e2.from = e.from;
            g.edges.erase(g.edges.begin() + static_cast<std::ptrdiff_t>(ei));
            changed = true;
            break;
        }
    }

    // Erase controls whose word resolved to neutral.
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (deleted[i] || !g.nodes[i].is_ctrl || !g.nodes[i].word.empty()) continue;
        const int node = static_cast<int>(i);
        std::size_t in_e = g.edges.size(), out_e = g.edges.size();
        for (std::size_t k = 0; k < g.edges.size(); ++k) {
            if (g.edges[k].to == PGEndpoint{node, 0}) in_e = k;
            if (g.edges[k].from == PGEndpoint{node, 0}) out_e = k;
        }
        deleted[i] = true;
        if (in_e == out_e) {
            // The node sat on a wire fed back onto itself.
            ++g.closed_loops;
            g.edges.erase(g.edges.begin() + static_cast<std::ptrdiff_t>(in_e));
            continue;
        }
        g.edges[in_e].to = g.edges[out_e].to;
        g.edges.erase(g.edges.begin() + static_cast<std::ptrdiff_t>(out_e));
    }

    compact_nodes(g, deleted);
    std::sort(g.edges.begin(), g.edges.end());
}

// ---------------------------------------------------------------------------
// Canonical labeling

struct Adjacency {
    std::vector<std::vector<PGEndpoint>> out_to;   // [node][out port] -> consumer
    std::vector<std::vector<PGEndpoint>> in_from;  // [node][in port] -> producer
    std::vector<PGEndpoint> bin_to;                // boundary input k -> consumer
    std::vector<PGEndpoint> bout_from;             // boundary output k -> producer
};

Adjacency build_adjacency(const PortGraph& g) {
    Adjacency adj;
    adj.out_to.resize(g.nodes.size());
    adj.in_from.resize(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        adj.out_to[i].resize(g.nodes[i].out_dims.size());
        adj.in_from[i].resize(g.nodes[i].in_dims.size());
    }
    adj.bin_to.resize(g.in_dims.size());
    adj.bout_from.resize(g.out_dims.size());
    for (const auto& e : g.edges) {
        if (e.from.node >= 0)
            adj.out_to[static_cast<std::size_t>(e.from.node)][static_cast<std::size_t>(
                e.from.port)] = e.to;
        else
            adj.bin_to[static_cast<std::size_t>(e.from.port)] = e.to;
        if (e.to.node >= 0)
            adj.in_from[static_cast<std::size_t>(e.to.node)][static_cast<std::size_t>(
                e.to.port)] = e.from;
        else
            adj.bout_from[static_cast<std::size_t>(e.to.port)] = e.from;
    }
    return adj;
}

/// BFS from a seed set, visiting each node's consumers (out ports in order)
/// then producers (in ports in order). Appends discovered nodes to `order`.
void bfs_from(const Adjacency& adj, const std::vector<int>& seeds, std::vector<bool>& visited,
              std::vector<int>& order) {
    std::deque<int> queue;
    auto push = [&](int n) {
        if (n < 0 || visited[static_cast<std::size_t>(n)]) return;
        visited[static_cast<std::size_t>(n)] = true;
        order.push_back(n);
        queue.push_back(n);
    };
    for (int s : seeds) push(s);
    while (!queue.empty()) {
        int n = queue.front();
        queue.pop_front();
        for (const auto& ep : adj.out_to[static_cast<std::size_t>(n)]) push(ep.node);
        for (const auto& ep : adj.in_from[static_cast<std::size_t>(n)]) push(ep.node);
    }
}

PortGraph relabel(const PortGraph& g, const std::vector<int>& order) {
    std::vector<int> pos(g.nodes.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        pos[static_cast<std::size_t>(order[k])] = static_cast<int>(k);
    PortGraph out;
    out.in_dims = g.in_dims;
    out.out_dims = g.out_dims;
    out.closed_loops = g.closed_loops;
    out.nodes.reserve(g.nodes.size());
    for (int old : order) out.nodes.push_back(g.nodes[static_cast<std::size_t>(old)]);
    out.edges = g.edges;
    for (auto& e : out.edges) {
        if (e.from.node >= 0) e.from.node = pos[static_cast<std::size_t>(e.from.node)];
        if (e.to.node >= 0) e.to.node = pos[static_cast<std::size_t>(e.to.node)];
    }
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

/// Serialization of just the component discovered from one seed, used to pick
/// a deterministic representative among boundary-disconnected components.
std::string component_serial(const PortGraph& g, const Adjacency& adj, int seed,
                             const std::vector<bool>& already_visited) {
    std::vector<bool> visited = already_visited;
    std::vector<int> order;
    bfs_from(adj, {seed}, visited, order);
    std::vector<int> pos(g.nodes.size(), -1);
    for (std::size_t k = 0; k < order.size(); ++k)
        pos[static_cast<std::size_t>(order[k])] = static_cast<int>(k);
    std::ostringstream os;
    for (std::size_t k = 0; k < order.size(); ++k)
        os << k << ":" << g.nodes[static_cast<std::size_t>(order[k])].label << ";";
    std::vector<PGEdge> edges;
    for (const auto& e : g.edges) {
        if (e.from.node < 0 || pos[static_cast<std::size_t>(e.from.node)] < 0) continue;
        PGEdge r = e;
        r.from.node = pos[static_cast<std::size_t>(r.from.node)];
        r.to.node = pos[static_cast<std::size_t>(r.to.node)];
        edges.push_back(r);
    }
    std::sort(edges.begin(), edges.end());
    for (const auto& e : edges)
        os << e.from.node << "." << e.from.port << ">" << e.to.node << "." << e.to.port << ";";
    return os.str();
}

PortGraph canonical_relabel(const PortGraph& g) {
    Adjacency adj = build_adjacency(g);
    std::vector<bool> visited(g.nodes.size(), false);
    std::vector<int> order;

    // Phase 1: everything reachable from the boundary, in boundary port order.
    std::vector<int> seeds;
    for (const auto& ep : adj.bin_to) seeds.push_back(ep.node);
    for (const auto& ep : adj.bout_from) seeds.push_back(ep.node);
    bfs_from(adj, seeds, visited, order);

    // Phase 2: boundary-disconnected components, smallest serialization first.
    while (order.size() < g.nodes.size()) {
        int best = -1;
        std::string best_serial;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            if (visited[i]) continue;
            std::string s = component_serial(g, adj, static_cast<int>(i), visited);
            if (best < 0 || s < best_serial) {
                best = static_cast<int>(i);
                best_serial = std::move(s);
            }
        }
        bfs_from(adj, {best}, visited, order);
    }
    return relabel(g, order);
}

// ---------------------------------------------------------------------------
// Exhaustive isomorphism fallback (small graphs)

bool nodes_compatible(const PGNode& a, const PGNode& b) {
    return a.label == b.label && a.in_dims == b.in_dims && a.out_dims == b.out_dims;
}

bool edges_match_under(const PortGraph& g1, const PortGraph& g2, const std::vector<int>& map) {
    std::vector<PGEdge> mapped = g1.edges;
    for (auto& e : mapped) {
        if (e.from.node >= 0) e.from.node = map[static_cast<std::size_t>(e.from.node)];
        if (e.to.node >= 0) e.to.node = map[static_cast<std::size_t>(e.to.node)];
    }
    std::sort(mapped.begin(), mapped.end());
    return mapped == g2.edges;
}

bool iso_search(const PortGraph& g1, const PortGraph& g2, std::vector<int>& map,
                std::vector<bool>& used, std::size_t next) {
    if (next == g1.nodes.size()) return edges_match_under(g1, g2, map);
    for (std::size_t j = 0; j < g2.nodes.size(); ++j) {
        if (used[j] || !nodes_compatible(g1.nodes[next], g2.nodes[j])) continue;
        map[next] = static_cast<int>(j);
        used[j] = true;
        // Prune: every edge fully inside the assigned region must map onto an
        // edge of g2.
        bool ok = true;
        for (const auto& e : g1.edges) {
            const bool from_in = e.from.node < 0 || static_cast<std::size_t>(e.from.node) <= next;
            const bool to_in = e.to.node < 0 || static_cast<std::size_t>(e.to.node) <= next;
            if (!from_in || !to_in) continue;
            PGEdge m = e;
            if (m.from.node >= 0) m.from.node = map[static_cast<std::size_t>(m.from.node)];
            if (m.to.node >= 0) m.to.node = map[static_cast<std::size_t>(m.to.node)];
            if (!std::binary_search(g2.edges.begin(), g2.edges.end(), m)) {
                ok = false;
                break;
            }
        }
        if (ok && iso_search(g1, g2, map, used, next + 1)) return true;
        used[j] = false;
    }
    return false;
}

bool isomorphic(const PortGraph& g1, const PortGraph& g2) {
    if (g1.nodes.size() != g2.nodes.size() || g1.edges.size() != g2.edges.size()) return false;
    if (g1.in_dims != g2.in_dims || g1.out_dims != g2.out_dims) return false;
    if (g1.closed_loops != g2.closed_loops) return false;
    std::vector<int> map(g1.nodes.size(), -1);
    std::vector<bool> used(g2.nodes.size(), false);
    return iso_search(g1, g2, map, used, 0);
}

// ---------------------------------------------------------------------------
// Cycle detection (for the S3(iii) side condition)

bool has_ctrl_on_cycle(const PortGraph& g) {
    const std::size_t n = g.nodes.size();
    std::vector<std::vector<int>> succ(n);
    std::vector<bool> self_loop(n, false);
    for (const auto& e : g.edges) {
        if (e.from.node < 0 || e.to.node < 0) continue;
        if (e.from.node == e.to.node)
            self_loop[static_cast<std::size_t>(e.from.node)] = true;
        else
            succ[static_cast<std::size_t>(e.from.node)].push_back(e.to.node);
    }
    // Color DFS to collect nodes on directed cycles: a node is cyclic if it
    // can reach itself.
    auto reaches_self = [&](std::size_t start) {
        std::vector<bool> seen(n, false);
        std::deque<int> stack{static_cast<int>(start)};
        bool first = true;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            if (!first && static_cast<std::size_t>(v) == start) return true;
            first = false;
            for (int w : succ[static_cast<std::size_t>(v)]) {
                if (static_cast<std::size_t>(w) == start) return true;
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = true;
                    stack.push_back(w);
                }
            }
        }
        return false;
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (!g.nodes[i].is_ctrl) continue;
        if (self_loop[i] || reaches_self(i)) return true;
    }
    return false;
}

std::string first_diff_line(const std::string& a, const std::string& b) {
    std::istringstream sa(a), sb(b);
    std::string la, lb;
    for (;;) {
        const bool ga = static_cast<bool>(std::getline(sa, la));
        const bool gb = static_cast<bool>(std::getline(sb, lb));
        if (!ga && !gb) return "(no difference found)";
        if (!ga) return "only second has: " + lb;
        if (!gb) return "only first has: " + la;
        if (la != lb) return la + "  |  " + lb;
    }
}

}  // namespace

CanonicalForm canonicalize(const Diagram& d, const ControlMonoid* monoid) {
    PortGraph g = to_port_graph(normalize_control(d, monoid));
    normalize_graph_control(g, monoid);
    g = canonical_relabel(g);
    CanonicalForm cf;
    cf.serial = serialize_port_graph(g);
    cf.graph = std::move(g);
    return cf;
}

EquivVerdict equiv(const Diagram& a, const Diagram& b, const ControlMonoid* monoid) {
    Interface ia = typecheck(a);
    Interface ib = typecheck(b);
    if (!ia.in.dims_match(ib.in) || !ia.out.dims_match(ib.out))
        throw SignatureMismatch("external interfaces differ");

    CanonicalForm ca = canonicalize(a, monoid);
    CanonicalForm cb = canonicalize(b, monoid);

    EquivVerdict v;
    if (ca == cb) {
        v.verdict = Verdict::Equal;
        v.trace = "canonical port graphs coincide";
        return v;
    }
    if (ca.graph.nodes.size() <= 12 && cb.graph.nodes.size() <= 12 &&
        isomorphic(ca.graph, cb.graph)) {
        v.verdict = Verdict::Equal;
        v.trace = "canonical port graphs are isomorphic (exhaustive search)";
        return v;
    }
    if (has_ctrl_on_cycle(ca.graph) || has_ctrl_on_cycle(cb.graph)) {
        v.verdict = Verdict::Unknown;
        v.reason =
            "control acts on a feedback cycle; the well-posedness side condition "
            "of the control/feedback exchange rule cannot be discharged structurally";
        return v;
    }
    v.verdict = Verdict::Inequivalent;
    v.witness = first_diff_line(ca.serial, cb.serial);
    return v;
}

}  // namespace snop
