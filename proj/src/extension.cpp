#include "monex/extension.hpp"

#include "monex/solvers.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace monex {

namespace {

constexpr double kGapErrorThreshold = 1e-6;
constexpr double kDrResidualTol = 1e-8;
constexpr long kDrMaxIter = 100000;

void require_valid(const OperatorGraph& g, Kind k, const char* op) {
    if (g.kind() != k)
        throw InvalidGraphError(std::string(op) + ": expected " +
                                kind_name(k) + " input");
    const ValidationReport rep = validate(g);
    if (!rep.ok) {
        std::ostringstream msg;
        msg << op << ": input graph fails validation at pair (" <<
            rep.violations.front().i << ", " << rep.violations.front().j <<
            "), slack " << rep.violations.front().slack;
        throw InvalidGraphError(msg.str());
    }
}

std::vector<Vec> domain_points(const OperatorGraph& g) {
    std::vector<Vec> pts;
    pts.reserve(g.size());
    for (const auto& p : g.pairs()) pts.push_back(p.x);
    return pts;
}

}  // namespace

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Plain: return "plain";
        case Variant::DomainConstrained: return "constrained";
        case Variant::SubspaceProjected: return "projected";
    }
    return "?";
}

ExtensionOperator::ExtensionOperator(Variant v, OperatorGraph g,
                                     std::optional<PsiProgram> p,
                                     std::optional<Polytope> hull,
                                     std::optional<ProjectedData> proj)
    : variant_(v),
      source_(std::move(g)),
      prog_(std::move(p)),
      hull_(std::move(hull)),
      proj_(std::move(proj)) {}

ExtensionOperator ExtensionOperator::build_plain(const OperatorGraph& g) {
    require_valid(g, Kind::Monotone, "build_plain");
    return ExtensionOperator(Variant::Plain, g, PsiProgram::plain(g),
                             std::nullopt, std::nullopt);
}

ExtensionOperator ExtensionOperator::build_constrained(const OperatorGraph& g) {
    require_valid(g, Kind::Monotone, "build_constrained");
    Polytope d = Polytope::hull(domain_points(g), g.dim());
    PsiProgram prog = PsiProgram::constrained(g, d);
    return ExtensionOperator(Variant::DomainConstrained, g, std::move(prog),
                             std::move(d), std::nullopt);
}

ExtensionOperator ExtensionOperator::build_projected(const OperatorGraph& g) {
    require_valid(g, Kind::Monotone, "build_projected");
    const int n = g.dim();
    Polytope d = Polytope::hull(domain_points(g), n);

    std::vector<Vec> translated;
    for (const auto& p : g.pairs())
        translated.push_back(p.x - d.centroid());
    ProjectedData pd{d.centroid(), d.hull_basis(), std::nullopt,
                     Polytope::hull(translated, n)};

    const int k = static_cast<int>(pd.basis.cols());
    if (k > 0) {
        std::vector<GraphPair> inner_pairs;
        for (const auto& p : g.pairs())
            inner_pairs.push_back(
                {pd.basis.transpose() * (p.x - pd.translation),
                 pd.basis.transpose() * p.y});
        OperatorGraph inner(k, Kind::Monotone, std::move(inner_pairs));
        pd.inner = PsiProgram::plain(inner);
    }
    return ExtensionOperator(Variant::SubspaceProjected, g, std::nullopt,
                             std::move(d), std::move(pd));
}

const PsiProgram& ExtensionOperator::program() const {
    if (!prog_)
        throw std::logic_error(
            "program(): not available for the projected variant");
    return *prog_;
}

Vec ExtensionOperator::resolvent(const Vec& x) const {
    return resolvent_detailed(x).point;
}

ExtensionOperator::Evaluation ExtensionOperator::resolvent_detailed(
    const Vec& x) const {
    if (x.size() != dim())
        throw DimensionError("resolvent: query length mismatch");
    if (variant_ == Variant::SubspaceProjected) return resolvent_projected(x);
    PsiProgram::ResolventSolution sol = prog_->resolvent_gap_min(x, 1.0);
    if (sol.gap > kGapErrorThreshold) {
        std::ostringstream msg;
        msg << "resolvent: optimal gap " << sol.gap
            << " exceeds 1e-6; the minimum is 0 in exact arithmetic";
        throw ConsistencyError(msg.str());
    }
    return {std::move(sol.point), std::max(sol.gap, 0.0), sol.iterations};
}

// Douglas-Rachford on the pieces Q*BQ and N_D, with Id - x folded into the
// Q*BQ piece:  J of (Q*BQ + Id - x) at s is J_{B/2}(P(s+x)/2) + (I-P)(s+x)/2,
// and J_{N_D} is the projection onto D. The returned iterate comes from the
// projection side, so it lies in D up to the projector's own tolerance.
ExtensionOperator::Evaluation ExtensionOperator::resolvent_projected(
    const Vec& x) const {
    const auto& pd = *proj_;
    const Vec xt = x - pd.translation;
    const int k = static_cast<int>(pd.basis.cols());

    const auto j1 = [&](const Vec& s) -> Vec {
        const Vec v = 0.5 * (s + xt);
        if (k == 0) return v;
        const Vec vy = pd.basis.transpose() * v;
        const Vec py = pd.inner->resolvent_gap_min(vy, 0.5).point;
        return pd.basis * py + (v - pd.basis * vy);
    };

    Vec s = xt;  // initial point = (translated) query
    Vec u2;
    double res = std::numeric_limits<double>::infinity();
    for (long it = 0; it < kDrMaxIter; ++it) {
        const Vec u1 = j1(s);
        u2 = pd.hull_translated.project(2.0 * u1 - s);
        const Vec diff = u2 - u1;
        res = diff.norm();
        if (res <= kDrResidualTol)
            return {u2 + pd.translation, res, it + 1};
        s += diff;
    }
    std::ostringstream msg;
    msg << "resolvent_projected: Douglas-Rachford residual " << res
        << " after " << kDrMaxIter << " iterations";
    throw ConsistencyError(msg.str());
}

NonexpansiveMap::NonexpansiveMap(ExtensionOperator ext,
                                 std::optional<Polytope> range)
    : ext_(std::move(ext)), range_(std::move(range)) {}

Vec NonexpansiveMap::operator()(const Vec& x) const {
    const Vec t = 2.0 * ext_.resolvent(x) - x;
    return range_ ? range_->project(t) : t;
}

NonexpansiveMap extend_nonexpansive(const OperatorGraph& t, Variant v) {
    require_valid(t, Kind::Nonexpansive, "extend_nonexpansive");
    const OperatorGraph a = firmly_to_monotone(to_firmly(t));
    switch (v) {
        case Variant::Plain:
            return {ExtensionOperator::build_plain(a), std::nullopt};
        case Variant::DomainConstrained:
            return {ExtensionOperator::build_constrained(a), std::nullopt};
        case Variant::SubspaceProjected:
            return {ExtensionOperator::build_projected(a), std::nullopt};
    }
    throw std::logic_error("extend_nonexpansive: bad variant");
}

NonexpansiveMap extend_kv(const OperatorGraph& t) {
    require_valid(t, Kind::Nonexpansive, "extend_kv");
    std::vector<Vec> range_points;
    for (const auto& p : t.pairs()) range_points.push_back(p.y);
    Polytope d = Polytope::hull(range_points, t.dim());
    const OperatorGraph a = firmly_to_monotone(to_firmly(t));
    return {ExtensionOperator::build_plain(a), std::move(d)};
}

}  // namespace monex
