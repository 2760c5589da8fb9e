#include "monex/polyhedral.hpp"

#include "monex/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace monex {

namespace {

constexpr int kMaxFacetDim = 4;
constexpr int kMaxFacetPoints = 12;
constexpr double kMembershipTol = 1e-9;
constexpr double kFacetSideTol = 1e-9;
constexpr double kActiveFacetTol = 1e-8;
constexpr double kRankTol = 1e-10;  // relative to largest singular value

Mat stack_columns(const std::vector<Vec>& vs, int dim) {
    Mat m(dim, static_cast<Eigen::Index>(vs.size()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) = vs[j];
    return m;
}

// All size-k index subsets of {0..m-1} in lexicographic order.
void for_each_subset(int m, int k,
                     const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    if (k > m) return;
    while (true) {
        fn(idx);
        int pos = k - 1;
        while (pos >= 0 && idx[pos] == m - k + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
}

}  // namespace

Cone::Cone(int dim, std::vector<Vec> generators)
    : dim_(dim), generators_(std::move(generators)) {
    for (const auto& g : generators_)
        if (g.size() != dim)
            throw DimensionError("Cone: generator length differs from dim");
}

bool Cone::contains(const Vec& d, double tol) const {
    if (d.size() != dim_) throw DimensionError("Cone: query length mismatch");
    if (generators_.empty()) return d.norm() <= tol;
    const Mat g = stack_columns(generators_, dim_);
    return nnls(g, d).residual <= tol;
}

Polytope Polytope::hull(const std::vector<Vec>& points, int dim) {
    if (points.empty()) throw InvalidGraphError("Polytope: no points");
    Polytope p;
    p.dim_ = dim;
    for (const auto& v : points) {
        if (v.size() != dim)
            throw DimensionError("Polytope: point length differs from dim");
        bool dup = false;
        for (const auto& u : p.generators_)
            if (u == v) {
                dup = true;
                break;
            }
        if (!dup) p.generators_.push_back(v);
    }
    const auto m = static_cast<Eigen::Index>(p.generators_.size());
    p.centroid_ = Vec::Zero(dim);
    for (const auto& v : p.generators_) p.centroid_ += v;
    p.centroid_ /= static_cast<double>(m);

    Mat centered(dim, m);
    for (Eigen::Index j = 0; j < m; ++j)
        centered.col(j) = p.generators_[j] - p.centroid_;
    Eigen::JacobiSVD<Mat> svd(centered, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > kRankTol * smax) ++rank;
    if (smax == 0.0) rank = 0;
    p.basis_ = svd.matrixU().leftCols(rank);
    p.complement_ = svd.matrixU().rightCols(dim - rank);
    p.cache_ = std::make_shared<FacetCache>();
    return p;
}

const std::vector<Halfspace>& Polytope::facets() const {
    std::call_once(cache_->once, [this] {
        const int k = affine_dim();
        const int m = static_cast<int>(generators_.size());
        if (dim_ > kMaxFacetDim || m > kMaxFacetPoints)
            throw LimitError("facet enumeration limit");
        std::vector<Halfspace> out;
        if (k == 0) {
            cache_->value = out;
            return;
        }
        // local coordinates in the affine hull
        std::vector<Vec> local(m);
        for (int i = 0; i < m; ++i)
            local[i] = basis_.transpose() * (generators_[i] - centroid_);

        auto push_unique = [&out](const Vec& n, double off) {
            for (const auto& h : out)
                if ((h.normal - n).lpNorm<Eigen::Infinity>() <= 1e-7 &&
                    std::abs(h.offset - off) <= 1e-7)
                    return;
            out.push_back({n, off});
        };
        auto try_candidate = [&](const Vec& n_local, double off_local) {
            for (const auto& u : local)
                if (n_local.dot(u) > off_local + kFacetSideTol) return;
            // supporting: lift to ambient coordinates
            const Vec n_amb = basis_ * n_local;
            push_unique(n_amb, off_local + n_amb.dot(centroid_));
        };

        for_each_subset(m, k, [&](const std::vector<int>& idx) {
            Vec normal(k);
            if (k == 1) {
                normal[0] = 1.0;
            } else {
                Mat diff(k - 1, k);
                for (int r = 1; r < k; ++r)
                    diff.row(r - 1) =
                        (local[idx[r]] - local[idx[0]]).transpose();
                Eigen::JacobiSVD<Mat> svd(diff, Eigen::ComputeFullV);
                const auto& sv = svd.singularValues();
                // need the k points to span a (k-1)-dim hyperplane
                if (sv.size() < k - 1 ||
                    sv[k - 2] <= 1e-9 * std::max(1.0, sv[0]))
                    return;
                normal = svd.matrixV().col(k - 1);
            }
            normal.normalize();
            const double off = normal.dot(local[idx[0]]);
            try_candidate(normal, off);
            try_candidate(-normal, -off);
        });
        cache_->value = std::move(out);
    });
    return cache_->value;
}

Cone Polytope::normal_cone(const Vec& a) const {
    if (!contains(a, kMembershipTol))
        throw InvalidGraphError("normal_cone: point not in polytope");
    std::vector<Vec> gens;
    for (Eigen::Index j = 0; j < complement_.cols(); ++j) {
        gens.push_back(complement_.col(j));
        gens.push_back(-complement_.col(j));
    }
    if (affine_dim() > 0) {
        for (const auto& h : facets())
            if (std::abs(h.normal.dot(a) - h.offset) <= kActiveFacetTol)
                gens.push_back(h.normal);
    }
    return Cone(dim_, std::move(gens));
}

bool Polytope::tangent_cone_member(const Vec& a, const Vec& x,
                                   double tol) const {
    if (a.size() != dim_ || x.size() != dim_)
        throw DimensionError("tangent_cone_member: length mismatch");
    Mat g(dim_, static_cast<Eigen::Index>(generators_.size()));
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        g.col(j) = generators_[j] - a;
    return nnls(g, x - a).residual <= tol;
}

Vec Polytope::project(const Vec& x) const {
    if (x.size() != dim_) throw DimensionError("project: length mismatch");
    if (generators_.size() == 1) return generators_[0];
    const Mat v = stack_columns(generators_, dim_);
    QuadraticProgram qp;
    qp.Q = v.transpose() * v;
    qp.c = -v.transpose() * x;
    qp.c0 = 0.5 * x.squaredNorm();
    qp.A = Mat(0, v.cols());
    qp.b = Vec(0);
    qp.blocks = {{BlockType::Simplex, static_cast<int>(v.cols())}};
    SolverReport rep = solve_qp(qp, 1e-9, 200000);
    if (rep.status != SolveStatus::Converged)
        throw SolverError("project: solver did not converge", rep);
    return v * rep.solution;
}

double Polytope::distance(const Vec& x) const { return (project(x) - x).norm(); }

bool Polytope::contains(const Vec& x, double tol) const {
    return distance(x) <= tol;
}

}  // namespace monex
