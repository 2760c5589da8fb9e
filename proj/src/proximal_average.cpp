#include "monex/proximal_average.hpp"

#include "monex/solvers.hpp"

#include <cmath>
#include <utility>

namespace monex {

namespace {

void require_valid_monotone(const OperatorGraph& g, const char* op) {
    if (g.kind() != Kind::Monotone)
        throw InvalidGraphError(std::string(op) + ": monotone graph required");
    if (!validate(g).ok)
        throw InvalidGraphError(std::string(op) + ": graph fails validation");
}

}  // namespace

PsiProgram::PsiProgram(int n, std::optional<Polytope> domain,
                       PolyhedralFunction f, ConjugateProgram conj)
    : n_(n),
      constrained_(domain.has_value()),
      domain_(std::move(domain)),
      function_(std::move(f)),
      conjugate_(std::move(conj)) {}

PsiProgram PsiProgram::plain(const OperatorGraph& g) {
    require_valid_monotone(g, "PsiProgram::plain");
    return PsiProgram(g.dim(), std::nullopt, build_fitzpatrick(g),
                      build_conjugate(g));
}

PsiProgram PsiProgram::constrained(const OperatorGraph& g, const Polytope& d) {
    require_valid_monotone(g, "PsiProgram::constrained");
    ConstrainedFitzpatrick cf = build_constrained(g, d);
    return PsiProgram(g.dim(), d, std::move(cf.function),
                      std::move(cf.conjugate));
}

// Variable layout of the assembled program:
//   y (n, free) | y* (n, free) | t (1, free) | s (m, nonneg, epigraph
//   slacks) | l (m, simplex) | m-coefficients (gtot, nonneg; constrained
//   only) | rho (p, simplex; convex weights putting y in the domain hull,
//   constrained only).
struct PsiProgram::Assembled {
    QuadraticProgram qp;
    int off_y, off_ys, off_lambda, off_mu;
    int W;
    Mat Lz;   // w -> z
    Mat Lzs;  // w -> z*
};

PsiProgram::Assembled PsiProgram::assemble(const Vec& x, const Vec* xs,
                                           double gamma) const {
    const int n = n_;
    const int m = static_cast<int>(conjugate_.size());
    const auto& pts = conjugate_.points();
    const auto& vals = conjugate_.values();
    const auto& consts = conjugate_.constants();
    const auto& gens = conjugate_.normal_generators();
    int gtot = 0;
    for (const auto& gs : gens) gtot += static_cast<int>(gs.size());
    const int nverts =
        constrained_ ? static_cast<int>(domain_->generators().size()) : 0;

    Assembled a;
    a.off_y = 0;
    a.off_ys = n;
    const int off_t = 2 * n;
    const int off_s = 2 * n + 1;
    a.off_lambda = off_s + m;
    a.off_mu = a.off_lambda + m;
    const int off_rho = a.off_mu + gtot;
    a.W = off_rho + nverts;
    const int W = a.W;

    a.qp.blocks = {{BlockType::Free, 2 * n + 1},
                   {BlockType::Nonnegative, m},
                   {BlockType::Simplex, m}};
    if (gtot > 0) a.qp.blocks.push_back({BlockType::Nonnegative, gtot});
    if (constrained_) a.qp.blocks.push_back({BlockType::Simplex, nverts});

    a.Lz = Mat::Zero(n, W);
    a.Lzs = Mat::Zero(n, W);
    for (int i = 0; i < m; ++i) {
        a.Lz.col(a.off_lambda + i) = pts[i];
        a.Lzs.col(a.off_lambda + i) = vals[i];
    }
    {
        int col = a.off_mu;
        for (int i = 0; i < m; ++i)
            for (const auto& g : gens[i]) a.Lzs.col(col++) = g;
    }

    const int rows = m + (xs ? 2 * n : n) + (constrained_ ? n : 0);
    Mat A = Mat::Zero(rows, W);
    Vec b = Vec::Zero(rows);
    for (int i = 0; i < m; ++i) {
        A(i, off_t) = 1.0;
        A.row(i).segment(a.off_y, n) = -vals[i].transpose();
        A.row(i).segment(a.off_ys, n) = -pts[i].transpose();
        A(i, off_s + i) = -1.0;
        b[i] = -consts[i];
    }
    int r = m;
    if (xs) {
        A.block(r, 0, n, W) = a.Lz;
        A.block(r, a.off_y, n, n) += Mat::Identity(n, n);
        b.segment(r, n) = 2.0 * x;
        r += n;
        A.block(r, 0, n, W) = a.Lzs;
        A.block(r, a.off_ys, n, n) += Mat::Identity(n, n);
        b.segment(r, n) = 2.0 * (*xs);
        r += n;
    } else {
        A.block(r, 0, n, W) = 0.5 * a.Lz + 0.5 * gamma * a.Lzs;
        A.block(r, a.off_y, n, n) += 0.5 * Mat::Identity(n, n);
        A.block(r, a.off_ys, n, n) += 0.5 * gamma * Mat::Identity(n, n);
        b.segment(r, n) = x;
        r += n;
    }
    if (constrained_) {
        A.block(r, a.off_y, n, n) = Mat::Identity(n, n);
        const auto& verts = domain_->generators();
        for (int k = 0; k < nverts; ++k)
            A.block(r, off_rho + k, n, 1) = -verts[k];
        r += n;
    }

    Vec c = Vec::Zero(W);
    c[off_t] = 0.5;
    for (int i = 0; i < m; ++i) c[a.off_lambda + i] = 0.5 * consts[i];
    {
        int col = a.off_mu;
        for (int i = 0; i < m; ++i)
            for (const auto& g : gens[i]) c[col++] = 0.5 * pts[i].dot(g);
    }

    Mat M1 = -a.Lz;
    M1.block(0, a.off_y, n, n) += Mat::Identity(n, n);
    Mat M2 = -a.Lzs;
    M2.block(0, a.off_ys, n, n) += Mat::Identity(n, n);
    Mat Q = 0.25 * (M1.transpose() * M1) + 0.25 * (M2.transpose() * M2);
    if (!xs) {
        Mat U = 0.5 * a.Lz;
        U.block(0, a.off_y, n, n) += 0.5 * Mat::Identity(n, n);
        Q += (2.0 / gamma) * (U.transpose() * U);
        c += -(1.0 / gamma) * (U.transpose() * x);
    }

    a.qp.Q = std::move(Q);
    a.qp.c = std::move(c);
    a.qp.A = std::move(A);
    a.qp.b = std::move(b);
    return a;
}

ExtReal PsiProgram::psi_value(const Vec& x, const Vec& xs) const {
    if (x.size() != n_ || xs.size() != n_)
        throw DimensionError("psi_value: argument size");
    const Assembled a = assemble(x, &xs, 1.0);
    SolverReport rep = solve_qp(a.qp);
    if (rep.status == SolveStatus::Infeasible) return ExtReal::infinity();
    if (rep.status != SolveStatus::Converged)
        throw SolverError("psi_eval: QP did not converge", rep);
    return ExtReal::finite(rep.objective);
}

PsiValue PsiProgram::psi_eval(const Vec& x, const Vec& xs) const {
    if (x.size() != n_ || xs.size() != n_)
        throw DimensionError("psi_eval: argument size");
    const Assembled a = assemble(x, &xs, 1.0);
    SolverReport rep = solve_qp(a.qp);
    if (rep.status == SolveStatus::Infeasible)
        return {ExtReal::infinity(), std::nullopt};
    if (rep.status != SolveStatus::Converged)
        throw SolverError("psi_eval: QP did not converge", rep);

    Certificate cert;
    cert.x1 = rep.solution.segment(a.off_y, n_);
    cert.x1s = rep.solution.segment(a.off_ys, n_);
    cert.x2 = a.Lz * rep.solution;
    cert.x2s = a.Lzs * rep.solution;
    const CertificateReport check = verify_certificate(cert);
    cert.fenchel_gap = check.fenchel_gap;
    cert.linear_gap = check.linear_gap;
    return {ExtReal::finite(rep.objective), cert};
}

bool PsiProgram::graph_member(const Vec& x, const Vec& xs, double tol) const {
    const ExtReal v = psi_value(x, xs);
    if (!v.is_finite()) return false;
    return v.value() - x.dot(xs) <= tol;
}

CertificateReport PsiProgram::verify_certificate(const Certificate& cert) const {
    CertificateReport rep;
    rep.linear_gap = ((cert.x1 - cert.x2) - (cert.x1s - cert.x2s)).norm();
    const ExtReal phi = function_.eval(cert.x1, cert.x1s);
    const ExtReal phis = conjugate_.eval(cert.x2s, cert.x2);
    if (!phi.is_finite() || !phis.is_finite()) {
        rep.fenchel_gap = std::numeric_limits<double>::infinity();
        rep.ok = false;
        return rep;
    }
    rep.fenchel_gap = phi.value() + phis.value() - cert.x1.dot(cert.x2s) -
                      cert.x2.dot(cert.x1s);
    rep.ok = std::abs(rep.fenchel_gap) <= 1e-6 && rep.linear_gap <= 1e-6;
    return rep;
}

PsiProgram::ResolventSolution PsiProgram::resolvent_gap_min(
    const Vec& x, double gamma) const {
    if (x.size() != n_) throw DimensionError("resolvent: argument size");
    if (!(gamma > 0.0))
        throw std::invalid_argument("resolvent: gamma must be positive");
    const Assembled a = assemble(x, nullptr, gamma);
    SolverReport rep = solve_qp(a.qp);
    if (rep.status != SolveStatus::Converged)
        throw SolverError("resolvent: gap program did not converge", rep);
    Vec u = 0.5 * (rep.solution.segment(a.off_y, n_) + a.Lz * rep.solution);
    return {std::move(u), rep.objective, rep.iterations};
}

}  // namespace monex
