#pragma once

#include "monex/types.hpp"

#include <vector>

namespace monex {

enum class BlockType { Free, Nonnegative, Simplex };

struct VariableBlock {
    BlockType type;
    int size;
};

/// min ½ wᵀQw + cᵀw + c0  s.t.  A w = b,  w in the block set
/// (each block free, componentwise nonnegative, or a unit simplex).
struct QuadraticProgram {
    Mat Q;
    Vec c;
    double c0 = 0.0;
    Mat A;  // zero rows = unconstrained
    Vec b;
    std::vector<VariableBlock> blocks;

    int num_vars() const;
};

enum class SolveStatus { Converged, IterationLimit, Infeasible };

const char* status_name(SolveStatus s);

struct SolverReport {
    Vec solution;
    Vec eq_multipliers;  // one entry per equality row
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    long iterations = 0;
    SolveStatus status = SolveStatus::Converged;
};

struct SolverError : std::runtime_error {
    SolverError(const std::string& what, SolverReport rep)
        : std::runtime_error(what), report(std::move(rep)) {}
    SolverReport report;
};

/// Euclidean projection onto {v >= 0, sum v = 1} by sort and threshold.
Vec project_simplex(const Vec& v);

/// Projection onto the block set (free / nonnegative / simplex per block).
Vec project_blocks(const std::vector<VariableBlock>& blocks, const Vec& v);

/// Accelerated projected gradient with an augmented-Lagrangian outer loop
/// for the equality constraints, finished by an active-set KKT polish.
/// Deterministic: fixed iteration order, no randomized pivoting.
SolverReport solve_qp(const QuadraticProgram& qp, double tol = 1e-9,
                      long max_iter = 200000);

/// LP over the same constraint language, solved as phase-1 feasibility
/// followed by a 1e-10-regularized QP (picks the minimum-norm optimum).
/// Throws SolverError if the program is unbounded below.
SolverReport solve_lp(const Vec& c, const Mat& A, const Vec& b,
                      const std::vector<VariableBlock>& blocks,
                      double tol = 1e-9, long max_iter = 200000);

struct NnlsResult {
    Vec coefficients;
    double residual;  // ||A mu - b||
};

/// min ||A mu - b|| over mu >= 0.
NnlsResult nnls(const Mat& A, const Vec& b);

}  // namespace monex
