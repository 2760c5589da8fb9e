#include "monex/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>

namespace monex {

int QuadraticProgram::num_vars() const {
    int n = 0;
    for (const auto& blk : blocks) n += blk.size;
    return n;
}

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::IterationLimit: return "iteration-limit";
        case SolveStatus::Infeasible: return "infeasible";
    }
    return "?";
}

Vec project_simplex(const Vec& v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double running = 0.0;
    double tau = 0.0;
    for (int j = 0; j < n; ++j) {
        running += u[j];
        const double t = (running - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) tau = t;
    }
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = std::max(v[i] - tau, 0.0);
    return out;
}

Vec project_blocks(const std::vector<VariableBlock>& blocks, const Vec& v) {
    Vec out(v.size());
    int at = 0;
    for (const auto& blk : blocks) {
        switch (blk.type) {
            case BlockType::Free:
                out.segment(at, blk.size) = v.segment(at, blk.size);
                break;
            case BlockType::Nonnegative:
                out.segment(at, blk.size) =
                    v.segment(at, blk.size).cwiseMax(0.0);
                break;
            case BlockType::Simplex:
                out.segment(at, blk.size) =
                    project_simplex(v.segment(at, blk.size));
                break;
        }
        at += blk.size;
    }
    return out;
}

namespace {

constexpr double kInfeasibilityThreshold = 1e-8;
constexpr double kNormGuard = 1e8;

double lambda_max(const Mat& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues().maxCoeff());
}

class QpEngine {
public:
    QpEngine(const QuadraticProgram& qp, double tol, long max_iter)
        : tol_(tol), max_iter_(max_iter), blocks_(qp.blocks) {
        W_ = qp.num_vars();
        if (qp.Q.rows() != W_ || qp.Q.cols() != W_ || qp.c.size() != W_)
            throw DimensionError("solve_qp: objective size mismatch");
        Q_ = 0.5 * (qp.Q + qp.Q.transpose());
        c_ = qp.c;
        c0_ = qp.c0;
        A_ = qp.A;
        b_ = qp.b;
        if (A_.rows() != b_.size() || (A_.rows() > 0 && A_.cols() != W_))
            throw DimensionError("solve_qp: constraint size mismatch");
        Eigen::SelfAdjointEigenSolver<Mat> es(Q_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw std::invalid_argument("solve_qp: quadratic term not PSD");
        q_lmax_ = std::max(0.0, es.eigenvalues().maxCoeff());
        if (A_.rows() > 0) {
            AtA_ = A_.transpose() * A_;
            Atb_ = A_.transpose() * b_;
            a_lmax_ = lambda_max(AtA_);
        }
    }

    SolverReport run() {
        Vec w = initial_point();
        if (A_.rows() == 0) return run_unconstrained(std::move(w));

        // phase 1: distance to the affine constraint over the block set
        w = apg(AtA_, -Atb_, std::move(w), std::max(1e-12, 1e-3 * tol_),
                std::min<long>(max_iter_, 40000), std::max(a_lmax_, 1e-12));
        const double feas = (A_ * w - b_).norm();
        if (feas > kInfeasibilityThreshold) {
            SolverReport rep = make_report(w, Vec::Zero(A_.rows()));
            rep.status = SolveStatus::Infeasible;
            return rep;
        }

        Vec xi = Vec::Zero(A_.rows());
        double rho =
            std::clamp((1.0 + q_lmax_) / std::max(a_lmax_, 1e-8), 1e-2, 1e6);
        double prev_primal = std::numeric_limits<double>::infinity();
        Vec best_w = w;
        Vec best_xi = xi;
        double best_score = std::numeric_limits<double>::infinity();

        for (int outer = 0; outer < 64 && iters_ < max_iter_; ++outer) {
            const Mat P = Q_ + rho * AtA_;
            const Vec q = c_ + A_.transpose() * xi - rho * Atb_;
            const double L = std::max(lambda_max(P), 1e-12);
            const double tol_inner =
                std::max(tol_, 1e-4 * std::pow(0.3, outer));
            const long budget =
                std::min(max_iter_ - iters_,
                         std::max<long>(1000, max_iter_ / 16));
            w = apg(P, q, std::move(w), tol_inner, budget, L);

            const Vec xihat = xi + rho * (A_ * w - b_);
            const double primal = (A_ * w - b_).lpNorm<Eigen::Infinity>();
            const double dual = dual_residual(w, xihat);
            if (std::max(primal, dual) < best_score) {
                best_score = std::max(primal, dual);
                best_w = w;
                best_xi = xihat;
            }
            if (auto pol = polish(w, xihat)) return *pol;
            if (primal <= tol_ && dual <= tol_) return make_report(w, xihat);
            xi = xihat;
            // drive the penalty up while feasibility stalls well above
            // tolerance; near the end multiplier updates close the gap on
            // their own, and a huge rho only degrades the inner conditioning
            if (primal > 100.0 * tol_ && primal > 0.2 * prev_primal)
                rho = std::min(rho * 8.0, 3e5);
            prev_primal = primal;
        }
        SolverReport rep = make_report(best_w, best_xi);
        rep.status = SolveStatus::IterationLimit;
        return rep;
    }

private:
    Vec initial_point() const {
        Vec w = Vec::Zero(W_);
        int at = 0;
        for (const auto& blk : blocks_) {
            if (blk.type == BlockType::Simplex)
                w.segment(at, blk.size).setConstant(1.0 / blk.size);
            at += blk.size;
        }
        return w;
    }

    SolverReport run_unconstrained(Vec w) {
        w = apg(Q_, c_, std::move(w), tol_, max_iter_,
                std::max(q_lmax_, 1e-12));
        const Vec xihat(0);
        if (auto pol = polish(w, xihat)) return *pol;
        SolverReport rep = make_report(w, xihat);
        if (rep.dual_residual > tol_) rep.status = SolveStatus::IterationLimit;
        return rep;
    }

    double objective(const Vec& w) const {
        return 0.5 * w.dot(Q_ * w) + c_.dot(w) + c0_;
    }

    double dual_residual(const Vec& w, const Vec& xihat) const {
        Vec g = Q_ * w + c_;
        if (A_.rows() > 0) g += A_.transpose() * xihat;
        return (w - project_blocks(blocks_, w - g)).lpNorm<Eigen::Infinity>();
    }

    double block_violation(const Vec& w) const {
        double worst = 0.0;
        int at = 0;
        for (const auto& blk : blocks_) {
            const auto seg = w.segment(at, blk.size);
            if (blk.type != BlockType::Free)
                worst = std::max(worst, -seg.minCoeff());
            if (blk.type == BlockType::Simplex)
                worst = std::max(worst, std::abs(seg.sum() - 1.0));
            at += blk.size;
        }
        return std::max(worst, 0.0);
    }

    SolverReport make_report(const Vec& w, const Vec& xihat) const {
        SolverReport rep;
        rep.solution = w;
        rep.eq_multipliers = xihat;
        rep.objective = objective(w);
        rep.primal_residual =
            A_.rows() > 0
                ? std::max((A_ * w - b_).lpNorm<Eigen::Infinity>(),
                           block_violation(w))
                : block_violation(w);
        rep.dual_residual = dual_residual(w, xihat);
        rep.iterations = iters_;
        rep.status = SolveStatus::Converged;
        return rep;
    }

    // FISTA with gradient-scheme adaptive restart on ½wᵀPw + qᵀw over the
    // block set. Returns the lowest-residual iterate seen.
    Vec apg(const Mat& P, const Vec& q, Vec w0, double tol_in, long budget,
            double L) {
        Vec w = project_blocks(blocks_, w0);
        Vec v = w;
        double t = 1.0;
        Vec best = w;
        double best_res = std::numeric_limits<double>::infinity();
        for (long it = 0; it < budget; ++it) {
            ++iters_;
            const Vec g = P * v + q;
            const Vec wn = project_blocks(blocks_, v - g / L);
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            if (g.dot(wn - w) > 0.0) {
                v = wn;
                t = 1.0;
            } else {
                v = wn + ((t - 1.0) / tn) * (wn - w);
                t = tn;
            }
            w = wn;
            if ((it & 3) == 0 || it == budget - 1) {
                const Vec gw = P * w + q;
                const double res =
                    (w - project_blocks(blocks_, w - gw))
                        .lpNorm<Eigen::Infinity>();
                if (res < best_res) {
                    best_res = res;
                    best = w;
                }
                if (res <= tol_in) break;
                if (w.lpNorm<Eigen::Infinity>() > kNormGuard) {
                    SolverReport rep = make_report(
                        w, A_.rows() > 0 ? Vec(Vec::Zero(A_.rows())) : Vec(0));
                    rep.status = SolveStatus::IterationLimit;
                    throw SolverError("solve: iterates unbounded", rep);
                }
            }
        }
        return best;
    }

    // Fix near-active bound coordinates, solve the remaining
    // equality-constrained problem exactly, and accept the candidate only
    // if its measured KKT residuals meet the tolerance. Coordinates that
    // are small with a near-zero reduced cost are genuinely ambiguous at
    // degenerate faces, so both activity choices are enumerated for them.
    std::optional<SolverReport> polish(const Vec& w, const Vec& xihat) {
        const double scale = std::max(1.0, w.lpNorm<Eigen::Infinity>());
        Vec g = Q_ * w + c_;
        if (A_.rows() > 0) g += A_.transpose() * xihat;
        const double gscale = std::max(1.0, g.lpNorm<Eigen::Infinity>());

        // three-way classification: coordinates whose value and reduced
        // cost are both small cannot be assigned an activity reliably,
        // so both choices are enumerated for them
        std::vector<char> base(W_, 0);
        std::vector<std::pair<double, int>> ambiguous;  // (|rc|, index)
        int at = 0;
        for (const auto& blk : blocks_) {
            if (blk.type != BlockType::Free) {
                double tau = 0.0;  // block multiplier estimate
                if (blk.type == BlockType::Simplex) {
                    tau = g[at];
                    for (int i = at; i < at + blk.size; ++i)
                        tau = std::min(tau, g[i]);
                }
                for (int i = at; i < at + blk.size; ++i) {
                    const double rc = g[i] - tau;
                    const bool small_w = w[i] <= 1e-5 * scale;
                    const bool small_rc = std::abs(rc) <= 1e-4 * gscale;
                    base[i] = small_w ? 1 : 0;
                    if ((small_w && rc <= 1e-4 * gscale) ||
                        (!small_w && w[i] <= 5e-2 * scale && small_rc))
                        ambiguous.emplace_back(std::abs(rc), i);
                }
            }
            at += blk.size;
        }

        if (auto rep = polish_fixed(base, w)) return rep;
        if (auto rep = polish_descent(base, w)) return rep;
        std::stable_sort(ambiguous.begin(), ambiguous.end());
        if (ambiguous.size() > 10) ambiguous.resize(10);
        if (!ambiguous.empty()) {
            const int combos = 1 << ambiguous.size();
            for (int mask = 1; mask < combos; ++mask) {
                std::vector<char> fixed = base;
                for (std::size_t j = 0; j < ambiguous.size(); ++j)
                    if (mask & (1 << j))
                        fixed[ambiguous[j].second] =
                            base[ambiguous[j].second] ? 0 : 1;
                if (auto rep = polish_fixed(fixed, w)) return rep;
            }
        }
        // fallback: coarser activity thresholds
        for (const double rel : {1e-4, 1e-3, 1e-2, 5e-2}) {
            std::vector<char> fixed(W_, 0);
            at = 0;
            for (const auto& blk : blocks_) {
                if (blk.type != BlockType::Free)
                    for (int i = at; i < at + blk.size; ++i)
                        fixed[i] = w[i] <= rel * scale ? 1 : 0;
                at += blk.size;
            }
            if (auto rep = polish_fixed(fixed, w)) return rep;
            if (auto rep = polish_descent(fixed, w)) return rep;
        }
        return std::nullopt;
    }

    struct FaceSolution {
        Vec raw;  // free coordinates as solved, fixed ones at zero
        Vec wp;   // raw with bound coordinates clamped to >= 0
        Vec y;    // equality multipliers
        std::vector<double> simplex_mult;  // one per simplex block
        bool solved = false;
    };

    FaceSolution solve_face(std::vector<char> fixed, const Vec& w) const {
        FaceSolution out;
        std::vector<std::pair<int, int>> simplex_ranges;
        int at = 0;
        for (const auto& blk : blocks_) {
            if (blk.type == BlockType::Simplex) {
                simplex_ranges.emplace_back(at, blk.size);
                bool any_free = false;
                for (int i = at; i < at + blk.size; ++i)
                    if (!fixed[i]) any_free = true;
                if (!any_free) {  // keep the largest weight free
                    int arg = at;
                    for (int i = at; i < at + blk.size; ++i)
                        if (w[i] > w[arg]) arg = i;
                    fixed[arg] = 0;
                }
            }
            at += blk.size;
        }
        std::vector<int> free_idx;
        for (int i = 0; i < W_; ++i)
            if (!fixed[i]) free_idx.push_back(i);
        const int nf = static_cast<int>(free_idx.size());
        const int p = static_cast<int>(A_.rows());
        const int ns = static_cast<int>(simplex_ranges.size());
        if (nf + p + ns == 0) {
            out.raw = Vec::Zero(W_);
            out.wp = Vec::Zero(W_);
            out.y = Vec(0);
            out.solved = true;
            return out;
        }

        Mat K = Mat::Zero(nf + p + ns, nf + p + ns);
        Vec rhs = Vec::Zero(nf + p + ns);
        for (int r = 0; r < nf; ++r) {
            for (int s = 0; s < nf; ++s)
                K(r, s) = Q_(free_idx[r], free_idx[s]);
            rhs[r] = -c_[free_idx[r]];
        }
        for (int r = 0; r < p; ++r) {
            for (int s = 0; s < nf; ++s) {
                K(nf + r, s) = A_(r, free_idx[s]);
                K(s, nf + r) = A_(r, free_idx[s]);
            }
            rhs[nf + r] = b_[r];
        }
        for (int r = 0; r < ns; ++r) {
            const auto [start, size] = simplex_ranges[r];
            for (int s = 0; s < nf; ++s) {
                const bool in_block =
                    free_idx[s] >= start && free_idx[s] < start + size;
                K(nf + p + r, s) = in_block ? 1.0 : 0.0;
                K(s, nf + p + r) = in_block ? 1.0 : 0.0;
            }
            rhs[nf + p + r] = 1.0;
        }
        const Vec sol = K.completeOrthogonalDecomposition().solve(rhs);

        out.raw = Vec::Zero(W_);
        for (int s = 0; s < nf; ++s) out.raw[free_idx[s]] = sol[s];
        out.wp = out.raw;
        at = 0;
        for (const auto& blk : blocks_) {
            if (blk.type != BlockType::Free) {
                // negatives are decomposition noise on wrong or degenerate
                // faces; clamp them and let the residual gate decide
                for (int i = at; i < at + blk.size; ++i)
                    out.wp[i] = std::max(out.wp[i], 0.0);
            }
            at += blk.size;
        }
        out.y = sol.segment(nf, p);
        for (int r = 0; r < ns; ++r) out.simplex_mult.push_back(sol[nf + p + r]);
        out.solved = true;
        return out;
    }

    std::optional<SolverReport> gate(const FaceSolution& f) const {
        SolverReport rep = make_report(f.wp, f.y);
        if (rep.primal_residual <= tol_ && rep.dual_residual <= tol_)
            return rep;
        return std::nullopt;
    }

    std::optional<SolverReport> polish_fixed(std::vector<char> fixed,
                                             const Vec& w) const {
        return gate(solve_face(std::move(fixed), w));
    }

    // Primal active-set walk: fix the most negative freed coordinate,
    // release the fixed coordinate with the most negative reduced cost,
    // stop when the face's exact solution passes the residual gate.
    std::optional<SolverReport> polish_descent(std::vector<char> fixed,
                                               const Vec& w) const {
        for (int round = 0; round < 48; ++round) {
            const FaceSolution f = solve_face(fixed, w);
            int worst = -1;
            double worst_val = -1e-11;
            int at = 0;
            for (const auto& blk : blocks_) {
                if (blk.type != BlockType::Free) {
                    for (int i = at; i < at + blk.size; ++i)
                        if (!fixed[i] && f.raw[i] < worst_val) {
                            worst_val = f.raw[i];
                            worst = i;
                        }
                }
                at += blk.size;
            }
            if (worst >= 0) {
                fixed[worst] = 1;
                continue;
            }
            if (auto rep = gate(f)) return rep;

            // all freed coordinates feasible but not stationary: look for a
            // fixed coordinate whose bound multiplier went negative
            Vec g = Q_ * f.wp + c_;
            if (A_.rows() > 0) g += A_.transpose() * f.y;
            worst = -1;
            worst_val = -1e-10;
            at = 0;
            int simplex_at = 0;
            for (const auto& blk : blocks_) {
                if (blk.type != BlockType::Free) {
                    const double mult =
                        blk.type == BlockType::Simplex &&
                                simplex_at <
                                    static_cast<int>(f.simplex_mult.size())
                            ? f.simplex_mult[simplex_at]
                            : 0.0;
                    for (int i = at; i < at + blk.size; ++i) {
                        if (!fixed[i]) continue;
                        const double rc = g[i] + mult;
                        if (rc < worst_val) {
                            worst_val = rc;
                            worst = i;
                        }
                    }
                }
                if (blk.type == BlockType::Simplex) ++simplex_at;
                at += blk.size;
            }
            if (worst >= 0) {
                fixed[worst] = 0;
                continue;
            }
            break;
        }
        return std::nullopt;
    }

    int W_ = 0;
    Mat Q_;
    Vec c_;
    double c0_ = 0.0;
    Mat A_;
    Vec b_;
    Mat AtA_;
    Vec Atb_;
    double q_lmax_ = 0.0;
    double a_lmax_ = 0.0;
    double tol_;
    long max_iter_;
    std::vector<VariableBlock> blocks_;
    long iters_ = 0;
};

}  // namespace

SolverReport solve_qp(const QuadraticProgram& qp, double tol, long max_iter) {
    QpEngine engine(qp, tol, max_iter);
    return engine.run();
}

SolverReport solve_lp(const Vec& c, const Mat& A, const Vec& b,
                      const std::vector<VariableBlock>& blocks, double tol,
                      long max_iter) {
    QuadraticProgram qp;
    const int n = static_cast<int>(c.size());
    qp.Q = 1e-10 * Mat::Identity(n, n);
    qp.c = c;
    qp.A = A;
    qp.b = b;
    qp.blocks = blocks;
    SolverReport rep = solve_qp(qp, tol, max_iter);
    if (rep.status != SolveStatus::Infeasible &&
        rep.solution.lpNorm<Eigen::Infinity>() > 1e7)
        throw SolverError("solve_lp: program unbounded below", rep);
    rep.objective = c.dot(rep.solution);
    return rep;
}

NnlsResult nnls(const Mat& A, const Vec& b) {
    const int n = static_cast<int>(A.cols());
    if (n == 0) return {Vec(0), b.norm()};
    QuadraticProgram qp;
    qp.Q = A.transpose() * A;
    qp.c = -A.transpose() * b;
    qp.c0 = 0.5 * b.squaredNorm();
    qp.A = Mat(0, n);
    qp.b = Vec(0);
    qp.blocks = {{BlockType::Nonnegative, n}};
    SolverReport rep = solve_qp(qp, 1e-10, 200000);
    return {rep.solution, (A * rep.solution - b).norm()};
}

}  // namespace monex
