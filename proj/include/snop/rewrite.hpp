#pragma once

#include <string>

#include "snop/diagram.hpp"
#include "snop/environment.hpp"
#include "snop/port_graph.hpp"

namespace snop {

struct SignatureMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Canonically labeled port graph plus its text serialization. Two diagrams
/// related by the unconditional coherence relations (monoidal coherence,
/// yanking, control distribution/fusion/erasure, control-permutation
/// naturality) produce identical serializations.
struct CanonicalForm {
    PortGraph graph;
    std::string serial;

    bool operator==(const CanonicalForm& o) const { return serial == o.serial; }
};

enum class Verdict { Equal, Inequivalent, Unknown };

struct EquivVerdict {
    Verdict verdict = Verdict::Unknown;
    std::string trace;    // Equal: how equality was established
    std::string witness;  // Inequivalent: first differing canonical line
    std::string reason;   // Unknown: undischarged side condition
};

/// Term-level control normalization: fuse sequentially adjacent controls,
/// erase neutral controls, drop identity stages. With a monoid bound, words
/// resolve through the star table; otherwise they stay free words.
Diagram normalize_control(const Diagram& d, const ControlMonoid* monoid = nullptr);

CanonicalForm canonicalize(const Diagram& d, const ControlMonoid* monoid = nullptr);

EquivVerdict equiv(const Diagram& a, const Diagram& b, const ControlMonoid* monoid = nullptr);

}  // namespace snop
