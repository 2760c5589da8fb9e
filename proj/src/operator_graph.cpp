#include "monex/operator_graph.hpp"

#include <utility>

namespace monex {

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Monotone: return "monotone";
        case Kind::FirmlyNonexpansive: return "firmly";
        case Kind::Nonexpansive: return "nonexpansive";
    }
    return "?";
}

OperatorGraph::OperatorGraph(int dim, Kind kind, std::vector<GraphPair> pairs)
    : dim_(dim), kind_(kind) {
    if (dim < 1) throw DimensionError("OperatorGraph: dim must be >= 1");
    if (pairs.empty()) throw InvalidGraphError("OperatorGraph: empty graph");
    pairs_.reserve(pairs.size());
    for (auto& p : pairs) {
        if (p.x.size() != dim || p.y.size() != dim)
            throw DimensionError("OperatorGraph: vector length differs from dim");
        bool keep = true;
        for (const auto& q : pairs_) {
            if (q.x == p.x) {
                if (q.y == p.y) {
                    keep = false;  // exact duplicate, drop
                    break;
                }
                throw InvalidGraphError(
                    "OperatorGraph: two pairs share x with different values");
            }
        }
        if (keep) pairs_.push_back(std::move(p));
    }
}

ValidationReport validate(const OperatorGraph& g) {
    ValidationReport report;
    const auto& ps = g.pairs();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        for (std::size_t j = 0; j < ps.size(); ++j) {
            if (i == j) continue;
            const Vec dx = ps[i].x - ps[j].x;
            const Vec dy = ps[i].y - ps[j].y;
            double slack = 0.0;
            switch (g.kind()) {
                case Kind::Monotone:
                    slack = dx.dot(dy);
                    break;
                case Kind::FirmlyNonexpansive:
                    slack = dy.dot(dx) - dy.squaredNorm();
                    break;
                case Kind::Nonexpansive:
                    slack = dx.norm() - dy.norm();
                    break;
            }
            if (slack < -kValidationSlack) {
                report.ok = false;
                report.violations.push_back({i, j, slack});
            }
        }
    }
    return report;
}

namespace {

OperatorGraph map_pairs(const OperatorGraph& g, Kind out_kind,
                        Vec (*fx)(const GraphPair&), Vec (*fy)(const GraphPair&)) {
    std::vector<GraphPair> out;
    out.reserve(g.size());
    for (const auto& p : g.pairs()) out.push_back({fx(p), fy(p)});
    return OperatorGraph(g.dim(), out_kind, std::move(out));
}

void require_kind(const OperatorGraph& g, Kind k, const char* op) {
    if (g.kind() != k)
        throw InvalidGraphError(std::string(op) + ": expected " + kind_name(k) +
                                " input, got " + kind_name(g.kind()));
}

}  // namespace

OperatorGraph to_firmly(const OperatorGraph& g) {
    require_kind(g, Kind::Nonexpansive, "to_firmly");
    return map_pairs(
        g, Kind::FirmlyNonexpansive, [](const GraphPair& p) { return p.x; },
        [](const GraphPair& p) { return Vec(0.5 * p.x + 0.5 * p.y); });
}

OperatorGraph from_firmly(const OperatorGraph& g) {
    require_kind(g, Kind::FirmlyNonexpansive, "from_firmly");
    return map_pairs(
        g, Kind::Nonexpansive, [](const GraphPair& p) { return p.x; },
        [](const GraphPair& p) { return Vec(2.0 * p.y - p.x); });
}

OperatorGraph firmly_to_monotone(const OperatorGraph& g) {
    require_kind(g, Kind::FirmlyNonexpansive, "firmly_to_monotone");
    // Two F-pairs with equal value would give a set-valued A = F^{-1} - Id.
    const auto& ps = g.pairs();
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j)
            if (ps[i].y == ps[j].y)
                throw InvalidGraphError(
                    "firmly_to_monotone: input not injective; "
                    "monotone representation set-valued");
    return map_pairs(
        g, Kind::Monotone, [](const GraphPair& p) { return p.y; },
        [](const GraphPair& p) { return Vec(p.x - p.y); });
}

OperatorGraph monotone_to_firmly(const OperatorGraph& g) {
    require_kind(g, Kind::Monotone, "monotone_to_firmly");
    return map_pairs(
        g, Kind::FirmlyNonexpansive,
        [](const GraphPair& p) { return Vec(p.x + p.y); },
        [](const GraphPair& p) { return p.x; });
}

}  // namespace monex
