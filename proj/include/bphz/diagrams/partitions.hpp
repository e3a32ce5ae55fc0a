#ifndef BPHZ_DIAGRAMS_PARTITIONS_HPP
#define BPHZ_DIAGRAMS_PARTITIONS_HPP

#include "diagram.hpp"
#include "labels.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace bphz {

struct Partition {
    std::vector<std::vector<int>> blocks;  // each sorted, ordered by first vertex

    int num_blocks() const { return static_cast<int>(blocks.size()); }
    std::vector<int> block_of(int num_vertices) const {
        std::vector<int> b(num_vertices, -1);
        for (int i = 0; i < num_blocks(); ++i)
            for (int v : blocks[i]) b[v] = i;
        return b;
    }
    auto operator<=>(const Partition&) const = default;
};

// Partitions with at least two blocks where one block holds every vertex
// carrying a leg. Enumerated by restricted growth strings.
inline std::vector<Partition> tight_partitions(const Diagram& g) {
    const int n = g.num_vertices();
    if (n < 2) throw DiagramError("TooFewVertices");
    std::vector<bool> has_leg(n, false);
    for (const auto& l : g.legs()) has_leg[l.vertex] = true;

    std::vector<Partition> out;
    std::vector<int> rgs(n, 0);
    std::function<void(int, int)> rec = [&](int i, int used) {
        if (i == n) {
            if (used < 2) return;
            int leg_block = -1;
            for (int v = 0; v < n; ++v) {
                if (!has_leg[v]) continue;
                if (leg_block == -1)
                    leg_block = rgs[v];
                else if (leg_block != rgs[v])
                    return;
            }
            Partition p;
            p.blocks.assign(used, {});
            for (int v = 0; v < n; ++v) p.blocks[rgs[v]].push_back(v);
            out.push_back(std::move(p));
            return;
        }
        for (int b = 0; b <= used && b < n; ++b) {
            rgs[i] = b;
            rec(i + 1, b == used ? used + 1 : used);
        }
    };
    rec(0, 0);
    return out;
}

// Σ over block-crossing edges of deg∞ plus d(|P|-1); nullopt is -infinity.
inline std::optional<Rational> deg_infinity(const Partition& p, const Diagram& g, const LabelTable& labels) {
    if (p.num_blocks() < 2) throw DiagramError("PartitionTooCoarse");
    auto b = p.block_of(g.num_vertices());
    Rational r = Rational(g.dim()) * (p.num_blocks() - 1);
    for (const auto& e : g.edges()) {
        if (b[e.src] == b[e.dst]) continue;
        auto di = labels.deg_inf(e.label);
        if (!di) return std::nullopt;
        r += *di;
    }
    return r;
}

inline bool in_H_plus(const Diagram& g, const LabelTable& labels) {
    if (g.num_vertices() < 2) return true;
    for (const auto& p : tight_partitions(g)) {
        auto di = deg_infinity(p, g, labels);
        if (di && *di >= 0) return false;
    }
    return true;
}

}  // namespace bphz

#endif
