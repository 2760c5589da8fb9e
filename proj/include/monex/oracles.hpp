#pragma once

#include "monex/operator_graph.hpp"
#include "monex/types.hpp"

#include <functional>
#include <vector>

namespace monex::oracles {

/// Exact solver for small LPs  min c'v  s.t.  M v = d, v >= 0  by
/// enumerating basic index subsets (column subsets of size <= #rows) and
/// solving each candidate by orthogonal decomposition. Independent of the
/// iterative solver stack. Requires the program to be bounded below when
/// feasible; returns +infinity iff no feasible basic point exists.
ExtReal enumerate_lp(const Vec& c, const Mat& M, const Vec& d,
                     double feas_tol = 1e-9);

struct GridOptions {
    double lo = -8.0;        // box for free axes (queries, u)
    double hi = 8.0;
    int resolution = 129;    // nodes per axis, capped at 200
    bool constrained = false;  // use the A + N_D variant, D = conv(dom)
    int refine_levels = 1;   // grid_conjugate_sup: zoom-in rounds
    double mu_max = 8.0;     // box [0, mu_max] per normal-cone coefficient
};

struct GridValue {
    double value;
    double error_bound;  // FD-Lipschitz estimate x half grid diagonal
};

struct GridArgmin {
    Vec argmin;
    double value;
    double error_bound;      // on the value
    double argmin_error_bound;  // on the argmin, via strong convexity
};

/// Direct minimization of the proximal-average objective over the
/// decomposition grid, with the Fitzpatrick max evaluated directly. The
/// conjugate side is swept through its defining weights (a barycentric
/// lattice over the simplex, plus boxed normal-cone coefficients in the
/// constrained variant), so every node is an exact decomposition. dim <= 2.
GridValue grid_psi(const OperatorGraph& g, const Vec& x, const Vec& xs,
                   const GridOptions& opt);

/// Grid minimization of Psi(u, x-u) - <u, x-u> over the joint
/// decomposition grid; returns the argmin u. One-dimensional graphs only.
GridArgmin grid_resolvent(const OperatorGraph& g, const Vec& x,
                          const GridOptions& opt);

/// Grid sup of <x,z*> + <z,x*> - Phi(x,x*): the sup-form conjugate used
/// to cross-check the LP form. dim <= 2.
GridValue grid_conjugate_sup(const OperatorGraph& g, const Vec& zs,
                             const Vec& z, const GridOptions& opt);

enum class PairwiseProperty { Nonexpansive, FirmlyNonexpansive, Monotone };

struct PairwiseReport {
    bool ok = true;
    double worst_slack = std::numeric_limits<double>::infinity();
    std::vector<Violation> violations;
};

/// Evaluate the handle at every sample and check the property on all
/// pairs; slack < -tol is a violation. Worst slack always reported.
PairwiseReport check_pairwise(const std::function<Vec(const Vec&)>& handle,
                              PairwiseProperty prop,
                              const std::vector<Vec>& samples,
                              double tol = 1e-7);

}  // namespace monex::oracles
