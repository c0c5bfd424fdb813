#include "snop/port_graph.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace snop {

namespace {

/// A net is one wire under construction. Union-find so that Seq/Feedback can
/// fuse the producer side of one net with the consumer side of another.
struct Net {
    int parent = -1;  // -1 => root
    std::optional<PGEndpoint> producer;
    std::optional<PGEndpoint> consumer;
    int dim = 1;
};

struct Builder {
    std::vector<PGNode> nodes;
    std::vector<Net> nets;
    int closed_loops = 0;

    int find(int n) {
        while (nets[static_cast<std::size_t>(n)].parent != -1)
            n = nets[static_cast<std::size_t>(n)].parent;
        return n;
    }

    int new_net(int dim) {
        nets.push_back({});
        nets.back().dim = dim;
        return static_cast<int>(nets.size()) - 1;
    }

    /// Fuse the producer side of `up` with the consumer side of `down`:
    /// the wire leaving `up`'s producer is the wire entering `down`'s consumer.
    void merge(int up, int down) {
        up = find(up);
        down = find(down);
        if (up == down) {
            // A wire fed straight back onto itself closes into a loop with no
            // endpoints; record it and retire the net.
            Net& n = nets[static_cast<std::size_t>(up)];
            if (!n.producer && !n.consumer) {
                ++closed_loops;
                n.producer = PGEndpoint{-2, -2};  // poison: never matches
                n.consumer = PGEndpoint{-2, -2};
            }
            return;
        }
        Net& a = nets[static_cast<std::size_t>(up)];
        Net& b = nets[static_cast<std::size_t>(down)];
        if (!a.producer) a.producer = b.producer;
        if (!a.consumer) a.consumer = b.consumer;
        b.parent = up;
    }

    void set_producer(int net, PGEndpoint e) { nets[static_cast<std::size_t>(find(net))].producer = e; }
    void set_consumer(int net, PGEndpoint e) { nets[static_cast<std::size_t>(find(net))].consumer = e; }
};

/// Open wiring fragment: per-port net ids, in diagram port order.
struct Fragment {
    std::vector<int> inputs;
    std::vector<int> outputs;
};

Fragment build(Builder& bld, const Diagram& d) {
    switch (d->kind) {
        case DiagramKind::Id: {
            Fragment f;
            for (const auto& sp : d->sig.spaces) {
                int n = bld.new_net(sp.dim);
                f.inputs.push_back(n);
                f.outputs.push_back(n);
            }
            return f;
        }
        case DiagramKind::Perm: {
            Fragment f;
            std::vector<int> nets;
            for (const auto& sp : d->sig.spaces) nets.push_back(bld.new_net(sp.dim));
            f.inputs = nets;
            for (std::size_t k = 0; k < nets.size(); ++k)
                f.outputs.push_back(nets[static_cast<std::size_t>(d->perm.map[k] - 1)]);
            return f;
        }
        case DiagramKind::Atom: {
            const int idx = static_cast<int>(bld.nodes.size());
            PGNode node;
            node.label = (d->daggered ? "atom+:" : "atom:") + d->name;
            for (const auto& sp : d->sig.spaces) node.in_dims.push_back(sp.dim);
            for (const auto& sp : d->sig2.spaces) node.out_dims.push_back(sp.dim);
            bld.nodes.push_back(std::move(node));
            Fragment f;
            for (std::size_t k = 0; k < d->sig.spaces.size(); ++k) {
                int n = bld.new_net(d->sig.spaces[k].dim);
                bld.set_consumer(n, {idx, static_cast<int>(k)});
                f.inputs.push_back(n);
            }
            for (std::size_t k = 0; k < d->sig2.spaces.size(); ++k) {
                int n = bld.new_net(d->sig2.spaces[k].dim);
                bld.set_producer(n, {idx, static_cast<int>(k)});
                f.outputs.push_back(n);
            }
            return f;
        }
        case DiagramKind::Ctrl: {
            // One unary node per signature component; a neutral word leaves a
            // bare wire.
            const std::vector<CtrlLetter> word = ctrl_word(d->ctrl);
            Fragment f;
            for (std::size_t k = 0; k < d->sig.spaces.size(); ++k) {
                const SpaceRef& sp = d->sig.spaces[k];
                if (word.empty()) {
                    int n = bld.new_net(sp.dim);
                    f.inputs.push_back(n);
                    f.outputs.push_back(n);
                    continue;
                }
                const int idx = static_cast<int>(bld.nodes.size());
                PGNode node;
                node.is_ctrl = true;
                node.word = word;
                node.space = sp.name;
                node.label = "ctrl:" + ctrl_word_to_string(word) + "@" + sp.name;
                node.in_dims = {sp.dim};
                node.out_dims = {sp.dim};
                bld.nodes.push_back(std::move(node));
                int nin = bld.new_net(sp.dim);
                int nout = bld.new_net(sp.dim);
                bld.set_consumer(nin, {idx, 0});
                bld.set_producer(nout, {idx, 0});
                f.inputs.push_back(nin);
                f.outputs.push_back(nout);
            }
            return f;
        }
        case DiagramKind::Tensor: {
            Fragment l = build(bld, d->a);
            Fragment r = build(bld, d->b);
            l.inputs.insert(l.inputs.end(), r.inputs.begin(), r.inputs.end());
            l.outputs.insert(l.outputs.end(), r.outputs.begin(), r.outputs.end());
            return l;
        }
        case DiagramKind::Seq: {
            Fragment f = build(bld, d->a);
            Fragment g = build(bld, d->b);
            for (std::size_t k = 0; k < f.outputs.size(); ++k)
                bld.merge(f.outputs[k], g.inputs[k]);
            return {f.inputs, g.outputs};
        }
        case DiagramKind::Feedback: {
            Fragment inner = build(bld, d->a);
            const std::size_t i = static_cast<std::size_t>(d->fb_out - 1);
            const std::size_t j = static_cast<std::size_t>(d->fb_in - 1);
            bld.merge(inner.outputs[i], inner.inputs[j]);
            Fragment f;
            for (std::size_t k = 0; k < inner.inputs.size(); ++k)
                if (k != j) f.inputs.push_back(inner.inputs[k]);
            for (std::size_t k = 0; k < inner.outputs.size(); ++k)
                if (k != i) f.outputs.push_back(inner.outputs[k]);
            return f;
        }
        case DiagramKind::Dagger:
            return build(bld, dagger_push(d->a));
    }
    throw TypeError("unreachable");
}

}  // namespace

PortGraph to_port_graph(const Diagram& d) {
    Interface iface = typecheck(d);

    Builder bld;
    Fragment frag = build(bld, remove_daggers(d));

    for (std::size_t k = 0; k < frag.inputs.size(); ++k)
        bld.set_producer(frag.inputs[k], {PGEndpoint::kBoundary, static_cast<int>(k)});
    for (std::size_t k = 0; k < frag.outputs.size(); ++k)
        bld.set_consumer(frag.outputs[k], {PGEndpoint::kBoundary, static_cast<int>(k)});

    PortGraph g;
    g.nodes = std::move(bld.nodes);
    g.closed_loops = bld.closed_loops;
    for (const auto& sp : iface.in.spaces) g.in_dims.push_back(sp.dim);
    for (const auto& sp : iface.out.spaces) g.out_dims.push_back(sp.dim);

    for (std::size_t n = 0; n < bld.nets.size(); ++n) {
        const Net& net = bld.nets[n];
        if (net.parent != -1) continue;
        if (net.producer && net.producer->node == -2) continue;  // closed loop
        if (!net.producer || !net.consumer)
            throw TypeError("internal error: dangling wire in port graph");
        g.edges.push_back({*net.producer, *net.consumer, net.dim});
    }
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

std::string serialize_port_graph(const PortGraph& g) {
    std::ostringstream os;
    auto dims = [&](const std::vector<int>& v) {
        os << "[";
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << "]";
    };
    os << "in ";
    dims(g.in_dims);
    os << "\nout ";
    dims(g.out_dims);
    os << "\nloops " << g.closed_loops << "\n";
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        os << "node " << i << " " << g.nodes[i].label << " in=";
        dims(g.nodes[i].in_dims);
        os << " out=";
        dims(g.nodes[i].out_dims);
        os << "\n";
    }
    auto ep = [&](const PGEndpoint& e) {
        if (e.node == PGEndpoint::kBoundary)
            os << "B." << e.port;
        else
            os << e.node << "." << e.port;
    };
    for (const auto& e : g.edges) {
        os << "edge ";
        ep(e.from);
        os << " -> ";
        ep(e.to);
        os << " dim=" << e.dim << "\n";
    }
    return os.str();
}

}  // namespace snop
