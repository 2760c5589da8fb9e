#pragma once

#include "monex/operator_graph.hpp"
#include "monex/polyhedral.hpp"
#include "monex/types.hpp"

#include <vector>

namespace monex {

/// One affine piece u -> <gradient, u> + constant over u = (x, x*).
struct AffinePiece {
    Vec gradient;
    double constant;
};

/// Conic-membership record on the x part: x - point in cone(generators).
struct ConicConstraint {
    Vec point;
    std::vector<Vec> tangent_generators;
};

/// Max of finitely many affine pieces on R^{2n}, optionally restricted to
/// a polyhedral domain in the x part (+infinity outside).
class PolyhedralFunction {
public:
    PolyhedralFunction(int dim_pair, std::vector<AffinePiece> pieces,
                       std::vector<ConicConstraint> domain = {});

    int dim_pair() const { return dim_pair_; }
    const std::vector<AffinePiece>& pieces() const { return pieces_; }
    const std::vector<ConicConstraint>& domain_constraints() const {
        return domain_;
    }

    ExtReal eval(const Vec& x, const Vec& xs) const;

private:
    int dim_pair_;
    std::vector<AffinePiece> pieces_;
    std::vector<ConicConstraint> domain_;
};

/// Conjugate of the (possibly domain-restricted) max-affine function built
/// from a graph {(a_i, a_i*)}, evaluated as the linear program
///   min  sum l_i c_i + sum <a_i, m_i>
///   s.t. sum l_i a_i* + sum m_i = z*,  sum l_i a_i = z,
///        l in the unit simplex, m_i in cone(normal generators at a_i),
/// with value +infinity iff infeasible (c_i = <a_i, a_i*>).
class ConjugateProgram {
public:
    ConjugateProgram(std::vector<Vec> points, std::vector<Vec> values,
                     std::vector<std::vector<Vec>> normal_generators);

    int dim() const { return dim_; }
    std::size_t size() const { return points_.size(); }
    const std::vector<Vec>& points() const { return points_; }
    const std::vector<Vec>& values() const { return values_; }
    const std::vector<double>& constants() const { return constants_; }
    const std::vector<std::vector<Vec>>& normal_generators() const {
        return normal_generators_;
    }

    /// Throws SolverError when the LP solver fails to converge.
    ExtReal eval(const Vec& zs, const Vec& z) const;

private:
    int dim_;
    std::vector<Vec> points_;
    std::vector<Vec> values_;
    std::vector<double> constants_;
    std::vector<std::vector<Vec>> normal_generators_;
};

/// Fitzpatrick function of a monotone graph: one piece per pair,
/// gradient (a_i*, a_i), constant -<a_i, a_i*>.
PolyhedralFunction build_fitzpatrick(const OperatorGraph& g);

/// Conjugate program of the plain Fitzpatrick function (no cones).
ConjugateProgram build_conjugate(const OperatorGraph& g);

struct ConstrainedFitzpatrick {
    PolyhedralFunction function;
    ConjugateProgram conjugate;
};

/// Fitzpatrick pair of A + N_D for D = hull of the domain points of g:
/// the same pieces with domain records x in a_i + T_D(a_i) for every i,
/// and normal-cone generators at each a_i on the conjugate side.
ConstrainedFitzpatrick build_constrained(const OperatorGraph& g,
                                         const Polytope& p);

}  // namespace monex
