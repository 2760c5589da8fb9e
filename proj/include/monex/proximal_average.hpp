#pragma once

#include "monex/fitzpatrick.hpp"
#include "monex/operator_graph.hpp"
#include "monex/polyhedral.hpp"
#include "monex/types.hpp"

#include <optional>
#include <vector>

namespace monex {

/// Optimal decomposition (x, x*) = ((x1+x2)/2, (x1*+x2*)/2) extracted from
/// the proximal-average program, with its two optimality residuals: the
/// Fenchel equality gap of ((x1,x1*),(x2*,x2)) and ||(x1-x2)-(x1*-x2*)||.
struct Certificate {
    Vec x1, x1s, x2, x2s;
    double fenchel_gap = 0.0;
    double linear_gap = 0.0;

    bool valid(double tol = 1e-6) const {
        return std::abs(fenchel_gap) <= tol && linear_gap <= tol;
    }
};

struct CertificateReport {
    bool ok = false;
    double fenchel_gap = 0.0;
    double linear_gap = 0.0;
};

struct PsiValue {
    ExtReal value;
    std::optional<Certificate> certificate;
};

/// Proximal average of the Fitzpatrick function and the transpose of its
/// conjugate, assembled as one jointly convex quadratic program
///
///   min ½ t + ½ Phi*(z*,z) + ⅛(||y-z||² + ||y*-z*||²)
///   s.t. t >= piece_i(y, y*),  (x,x*) = ½(y+z, y*+z*),
///        z = sum l_i a_i, z* = sum l_i a_i* + sum m_i,
///        l in the simplex, m_i in the normal cones, y in the domain,
///
/// whose optimal value is Psi(x,x*) when feasible and +infinity otherwise.
/// Immutable; evaluations are pure.
class PsiProgram {
public:
    static PsiProgram plain(const OperatorGraph& g);
    static PsiProgram constrained(const OperatorGraph& g, const Polytope& d);

    int dim() const { return n_; }
    bool is_constrained() const { return constrained_; }
    const PolyhedralFunction& function() const { return function_; }
    const ConjugateProgram& conjugate() const { return conjugate_; }
    const std::optional<Polytope>& domain() const { return domain_; }

    /// Value only (no certificate extraction); cheap path.
    ExtReal psi_value(const Vec& x, const Vec& xs) const;

    /// Value plus the certificate assembled from the optimizer, residuals
    /// filled in. No certificate when the program is infeasible.
    PsiValue psi_eval(const Vec& x, const Vec& xs) const;

    /// x* in Atilde(x) iff Psi(x,x*) = <x,x*>, within tol.
    bool graph_member(const Vec& x, const Vec& xs, double tol = 1e-7) const;

    /// Recompute both residuals of a certificate against this program.
    CertificateReport verify_certificate(const Certificate& cert) const;

    struct ResolventSolution {
        Vec point;
        double gap;
        long iterations;
    };

    /// min over u of Psi(u, (x-u)/gamma) - <u, (x-u)/gamma>; the minimum
    /// is 0 and the minimizer is the resolvent of gamma * Atilde at x.
    ResolventSolution resolvent_gap_min(const Vec& x, double gamma = 1.0) const;

private:
    PsiProgram(int n, std::optional<Polytope> domain, PolyhedralFunction f,
               ConjugateProgram conj);

    struct Assembled;
    Assembled assemble(const Vec& x, const Vec* xs, double gamma) const;

    int n_ = 0;
    bool constrained_ = false;
    std::optional<Polytope> domain_;
    PolyhedralFunction function_;
    ConjugateProgram conjugate_;
};

}  // namespace monex
