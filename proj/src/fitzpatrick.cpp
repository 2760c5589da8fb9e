#include "monex/fitzpatrick.hpp"

#include "monex/solvers.hpp"

#include <utility>

namespace monex {

PolyhedralFunction::PolyhedralFunction(int dim_pair,
                                       std::vector<AffinePiece> pieces,
                                       std::vector<ConicConstraint> domain)
    : dim_pair_(dim_pair), pieces_(std::move(pieces)), domain_(std::move(domain)) {
    if (dim_pair_ < 2 || dim_pair_ % 2 != 0)
        throw DimensionError("PolyhedralFunction: dim_pair must be even, >= 2");
    for (const auto& p : pieces_)
        if (p.gradient.size() != dim_pair_)
            throw DimensionError("PolyhedralFunction: piece gradient size");
    if (pieces_.empty())
        throw InvalidGraphError("PolyhedralFunction: no pieces");
}

ExtReal PolyhedralFunction::eval(const Vec& x, const Vec& xs) const {
    const int n = dim_pair_ / 2;
    if (x.size() != n || xs.size() != n)
        throw DimensionError("PolyhedralFunction::eval: argument size");
    for (const auto& dc : domain_) {
        const Vec d = x - dc.point;
        if (dc.tangent_generators.empty()) {
            if (d.norm() > 1e-8) return ExtReal::infinity();
            continue;
        }
        Mat g(n, static_cast<Eigen::Index>(dc.tangent_generators.size()));
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            g.col(j) = dc.tangent_generators[j];
        if (nnls(g, d).residual > 1e-8) return ExtReal::infinity();
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces_) {
        const double v =
            p.gradient.head(n).dot(x) + p.gradient.tail(n).dot(xs) + p.constant;
        best = std::max(best, v);
    }
    return ExtReal::finite(best);
}

ConjugateProgram::ConjugateProgram(std::vector<Vec> points,
                                   std::vector<Vec> values,
                                   std::vector<std::vector<Vec>> normal_generators)
    : points_(std::move(points)),
      values_(std::move(values)),
      normal_generators_(std::move(normal_generators)) {
    if (points_.empty() || points_.size() != values_.size() ||
        points_.size() != normal_generators_.size())
        throw InvalidGraphError("ConjugateProgram: inconsistent data");
    dim_ = static_cast<int>(points_[0].size());
    constants_.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i)
        constants_.push_back(points_[i].dot(values_[i]));
}

ExtReal ConjugateProgram::eval(const Vec& zs, const Vec& z) const {
    if (zs.size() != dim_ || z.size() != dim_)
        throw DimensionError("ConjugateProgram::eval: argument size");
    const int m = static_cast<int>(points_.size());
    int gtot = 0;
    for (const auto& gs : normal_generators_) gtot += static_cast<int>(gs.size());

    const int W = m + gtot;
    Vec cost(W);
    Mat A = Mat::Zero(2 * dim_, W);
    for (int i = 0; i < m; ++i) {
        cost[i] = constants_[i];
        A.col(i).head(dim_) = values_[i];
        A.col(i).tail(dim_) = points_[i];
    }
    int col = m;
    for (int i = 0; i < m; ++i) {
        for (const auto& g : normal_generators_[i]) {
            cost[col] = points_[i].dot(g);
            A.col(col).head(dim_) = g;
            ++col;
        }
    }
    Vec b(2 * dim_);
    b.head(dim_) = zs;
    b.tail(dim_) = z;

    std::vector<VariableBlock> blocks{{BlockType::Simplex, m}};
    if (gtot > 0) blocks.push_back({BlockType::Nonnegative, gtot});

    SolverReport rep = solve_lp(cost, A, b, blocks);
    if (rep.status == SolveStatus::Infeasible) return ExtReal::infinity();
    if (rep.status != SolveStatus::Converged)
        throw SolverError("conjugate_eval: LP did not converge", rep);
    return ExtReal::finite(rep.objective);
}

PolyhedralFunction build_fitzpatrick(const OperatorGraph& g) {
    if (g.kind() != Kind::Monotone)
        throw InvalidGraphError("build_fitzpatrick: monotone graph required");
    const int n = g.dim();
    std::vector<AffinePiece> pieces;
    pieces.reserve(g.size());
    for (const auto& p : g.pairs()) {
        Vec grad(2 * n);
        grad.head(n) = p.y;
        grad.tail(n) = p.x;
        pieces.push_back({std::move(grad), -p.x.dot(p.y)});
    }
    return PolyhedralFunction(2 * n, std::move(pieces));
}

ConjugateProgram build_conjugate(const OperatorGraph& g) {
    if (g.kind() != Kind::Monotone)
        throw InvalidGraphError("build_conjugate: monotone graph required");
    std::vector<Vec> pts, vals;
    for (const auto& p : g.pairs()) {
        pts.push_back(p.x);
        vals.push_back(p.y);
    }
    std::vector<std::vector<Vec>> gens(pts.size());
    return ConjugateProgram(std::move(pts), std::move(vals), std::move(gens));
}

ConstrainedFitzpatrick build_constrained(const OperatorGraph& g,
                                         const Polytope& p) {
    if (g.kind() != Kind::Monotone)
        throw InvalidGraphError("build_constrained: monotone graph required");
    const int n = g.dim();
    if (p.dim() != n)
        throw DimensionError("build_constrained: polytope dimension mismatch");

    std::vector<AffinePiece> pieces;
    std::vector<ConicConstraint> domain;
    std::vector<Vec> pts, vals;
    std::vector<std::vector<Vec>> gens;
    for (const auto& pr : g.pairs()) {
        if (!p.contains(pr.x, 1e-9))
            throw InvalidGraphError(
                "build_constrained: domain point outside polytope");
        Vec grad(2 * n);
        grad.head(n) = pr.y;
        grad.tail(n) = pr.x;
        pieces.push_back({std::move(grad), -pr.x.dot(pr.y)});

        ConicConstraint dc;
        dc.point = pr.x;
        for (const auto& v : p.generators())
            dc.tangent_generators.push_back(v - pr.x);
        domain.push_back(std::move(dc));

        pts.push_back(pr.x);
        vals.push_back(pr.y);
        gens.push_back(p.normal_cone(pr.x).generators());
    }
    return {PolyhedralFunction(2 * n, std::move(pieces), std::move(domain)),
            ConjugateProgram(std::move(pts), std::move(vals), std::move(gens))};
}

}  // namespace monex
