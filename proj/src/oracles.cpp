#include "monex/oracles.hpp"

#include "monex/polyhedral.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace monex::oracles {

namespace {

constexpr int kMaxResolution = 200;
constexpr long kMaxGridNodes = 20000000;

// All index subsets of {0..n-1} with 1 <= size <= k, lexicographic.
void for_each_small_subset(int n, int k,
                           const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx;
    const std::function<void(int)> rec = [&](int start) {
        if (!idx.empty()) fn(idx);
        if (static_cast<int>(idx.size()) == k) return;
        for (int i = start; i < n; ++i) {
            idx.push_back(i);
            rec(i + 1);
            idx.pop_back();
        }
    };
    rec(0);
}

// Precomputed basic-subset pseudo-inverses for one constraint matrix,
// reusable across right-hand sides.
class LpSolveTable {
public:
    LpSolveTable(const Vec& c, const Mat& M) : rows_(static_cast<int>(M.rows())) {
        const int n = static_cast<int>(M.cols());
        for_each_small_subset(n, std::min(rows_, n), [&](const std::vector<int>& s) {
            Entry e;
            e.sub = Mat(rows_, static_cast<Eigen::Index>(s.size()));
            e.cost = Vec(static_cast<Eigen::Index>(s.size()));
            for (std::size_t j = 0; j < s.size(); ++j) {
                e.sub.col(static_cast<Eigen::Index>(j)) = M.col(s[j]);
                e.cost[static_cast<Eigen::Index>(j)] = c[s[j]];
            }
            e.pinv = e.sub.completeOrthogonalDecomposition().pseudoInverse();
            entries_.push_back(std::move(e));
        });
    }

    ExtReal solve(const Vec& d, double feas_tol) const {
        double best = std::numeric_limits<double>::infinity();
        bool any = false;
        for (const auto& e : entries_) {
            const Vec v = e.pinv * d;
            if (v.minCoeff() < -1e-11) continue;
            if ((e.sub * v - d).norm() > feas_tol) continue;
            any = true;
            best = std::min(best, e.cost.dot(v));
        }
        return any ? ExtReal::finite(best) : ExtReal::infinity();
    }

private:
    struct Entry {
        Mat sub;
        Mat pinv;
        Vec cost;
    };
    int rows_;
    std::vector<Entry> entries_;
};

// Normal-cone generators at a hull generator, straight from the H-rep:
// active facet normals plus +/- the affine hull's orthogonal complement.
std::vector<Vec> hrep_normal_generators(const Polytope& hull, const Vec& a) {
    std::vector<Vec> gens;
    for (Eigen::Index j = 0; j < hull.hull_complement().cols(); ++j) {
        gens.push_back(hull.hull_complement().col(j));
        gens.push_back(-hull.hull_complement().col(j));
    }
    if (hull.affine_dim() > 0)
        for (const auto& h : hull.facets())
            if (std::abs(h.normal.dot(a) - h.offset) <= 1e-8)
                gens.push_back(h.normal);
    return gens;
}

bool in_hull_hrep(const Polytope& hull, const Vec& x, double tol = 1e-9) {
    if ((hull.hull_complement().transpose() * (x - hull.centroid())).norm() >
        std::max(tol, 1e-8))
        return false;
    if (hull.affine_dim() == 0)
        return (x - hull.generators()[0]).norm() <= std::max(tol, 1e-8);
    for (const auto& h : hull.facets())
        if (h.normal.dot(x) > h.offset + tol) return false;
    return true;
}

double phi_direct(const OperatorGraph& g, const Vec& x, const Vec& xs) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : g.pairs())
        best = std::max(best, x.dot(p.y) + p.x.dot(xs) - p.x.dot(p.y));
    return best;
}

void check_oracle_graph(const OperatorGraph& g, int max_dim, const char* op) {
    if (g.kind() != Kind::Monotone)
        throw InvalidGraphError(std::string(op) + ": monotone graph required");
    if (g.dim() > max_dim)
        throw LimitError(std::string(op) + ": dimension cap exceeded");
}

// Odometer sweep over per-axis node counts; f(index vector, coordinates).
void sweep(const std::vector<int>& res, const std::vector<double>& lo,
           const std::vector<double>& step,
           const std::function<void(const std::vector<int>&, const Vec&)>& fn) {
    const int d = static_cast<int>(res.size());
    std::vector<int> idx(d, 0);
    Vec coord(d);
    while (true) {
        for (int k = 0; k < d; ++k) coord[k] = lo[k] + step[k] * idx[k];
        fn(idx, coord);
        int k = d - 1;
        while (k >= 0 && idx[k] == res[k] - 1) {
            idx[k] = 0;
            --k;
        }
        if (k < 0) break;
        ++idx[k];
    }
}

// Error bound from the secant slopes adjacent to the extremal node:
// sum over axes of (local Lipschitz estimate) * (half step).
double local_error_bound(
    const std::vector<int>& at, const std::vector<int>& res,
    const std::vector<double>& step,
    const std::function<double(const std::vector<int>&)>& value_at,
    double f_at) {
    double bound = 1e-9;
    for (std::size_t k = 0; k < res.size(); ++k) {
        double slope = 0.0;
        for (int dir = -1; dir <= 1; dir += 2) {
            std::vector<int> nb = at;
            nb[k] += dir;
            if (nb[k] < 0 || nb[k] >= res[k]) continue;
            const double fn = value_at(nb);
            if (!std::isfinite(fn) || !std::isfinite(f_at)) continue;
            slope = std::max(slope, std::abs(fn - f_at) / step[k]);
        }
        bound += 0.5 * slope * step[k];
    }
    return bound;
}

long total_nodes(const std::vector<int>& res) {
    long t = 1;
    for (int r : res) t *= r;
    return t;
}

}  // namespace

ExtReal enumerate_lp(const Vec& c, const Mat& M, const Vec& d, double feas_tol) {
    if (M.rows() != d.size() || M.cols() != c.size())
        throw DimensionError("enumerate_lp: size mismatch");
    return LpSolveTable(c, M).solve(d, feas_tol);
}

namespace {

// All (k_1..k_m) >= 0 with sum K, lexicographic.
void for_each_composition(int m, int K,
                          const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> k(m, 0);
    const std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == m - 1) {
            k[pos] = left;
            fn(k);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            k[pos] = v;
            rec(pos + 1, left - v);
        }
    };
    rec(0, K);
}

long composition_count(int m, int K) {
    // C(K + m - 1, m - 1)
    long c = 1;
    for (int i = 1; i < m; ++i) c = c * (K + i) / i;
    return c;
}

// Exact decomposition sweep shared by grid_psi and grid_resolvent: the
// conjugate side is parametrized by its simplex weights (lattice k/K) and,
// in the constrained variant, boxed normal-cone coefficients.
struct DecompositionSweep {
    const OperatorGraph& g;
    std::optional<Polytope> hull;
    std::vector<std::vector<Vec>> gens;  // flattened below
    std::vector<Vec> gen_vecs;
    std::vector<double> gen_costs;  // <a_i, g_ij>
    int m = 0, n = 0, G = 0, K = 0, mu_res = 0;
    double mu_step = 0.0;

    DecompositionSweep(const OperatorGraph& graph, const GridOptions& opt,
                       int K_in)
        : g(graph), m(static_cast<int>(graph.size())), n(graph.dim()), K(K_in) {
        if (opt.constrained) {
            std::vector<Vec> pts;
            for (const auto& p : g.pairs()) pts.push_back(p.x);
            hull = Polytope::hull(pts, n);
            hull->facets();
            for (const auto& p : g.pairs())
                for (const auto& gen : hrep_normal_generators(*hull, p.x)) {
                    gen_vecs.push_back(gen);
                    gen_costs.push_back(p.x.dot(gen));
                }
            G = static_cast<int>(gen_vecs.size());
        }
        mu_res = G > 0 ? std::min(33, K + 1) : 1;
        mu_step = mu_res > 1 ? opt.mu_max / (mu_res - 1) : 0.0;
    }

    long nodes() const {
        long t = composition_count(m, K);
        for (int j = 0; j < G; ++j) t *= mu_res;
        return t;
    }

    // enumerate (lambda, mu) nodes; fn(z, zs, conj_value)
    void run(const std::function<void(const std::vector<int>&,
                                      const std::vector<int>&, const Vec&,
                                      const Vec&, double)>& fn) const {
        std::vector<int> mu_idx(std::max(G, 1), 0);
        for_each_composition(m, K, [&](const std::vector<int>& k) {
            Vec z = Vec::Zero(n), zs0 = Vec::Zero(n);
            double cost0 = 0.0;
            for (int i = 0; i < m; ++i) {
                const double li = static_cast<double>(k[i]) / K;
                z += li * g.pair(i).x;
                zs0 += li * g.pair(i).y;
                cost0 += li * g.pair(i).x.dot(g.pair(i).y);
            }
            if (G == 0) {
                std::fill(mu_idx.begin(), mu_idx.end(), 0);
                fn(k, mu_idx, z, zs0, cost0);
                return;
            }
            std::fill(mu_idx.begin(), mu_idx.end(), 0);
            while (true) {
                Vec zs = zs0;
                double cost = cost0;
                for (int j = 0; j < G; ++j) {
                    const double mu = mu_step * mu_idx[j];
                    zs += mu * gen_vecs[j];
                    cost += mu * gen_costs[j];
                }
                fn(k, mu_idx, z, zs, cost);
                int j = G - 1;
                while (j >= 0 && mu_idx[j] == mu_res - 1) mu_idx[j--] = 0;
                if (j < 0) break;
                ++mu_idx[j];
            }
        });
    }

    Vec point_of(const std::vector<int>& k, const std::vector<int>& mu_idx,
                 Vec& zs, double& cost) const {
        Vec z = Vec::Zero(n);
        zs = Vec::Zero(n);
        cost = 0.0;
        for (int i = 0; i < m; ++i) {
            const double li = static_cast<double>(k[i]) / K;
            z += li * g.pair(i).x;
            zs += li * g.pair(i).y;
            cost += li * g.pair(i).x.dot(g.pair(i).y);
        }
        for (int j = 0; j < G; ++j) {
            const double mu = mu_step * mu_idx[j];
            zs += mu * gen_vecs[j];
            cost += mu * gen_costs[j];
        }
        return z;
    }

    // neighbors of a lattice node: one unit moved between two weights, or
    // one step along a mu axis
    std::vector<std::pair<std::vector<int>, std::vector<int>>> neighbors(
        const std::vector<int>& k, const std::vector<int>& mu_idx) const {
        std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                if (i == j || k[i] == 0) continue;
                auto kk = k;
                --kk[i];
                ++kk[j];
                out.emplace_back(kk, mu_idx);
            }
        for (int j = 0; j < G; ++j)
            for (int dir = -1; dir <= 1; dir += 2) {
                if (mu_idx[j] + dir < 0 || mu_idx[j] + dir >= mu_res) continue;
                auto mm = mu_idx;
                mm[j] += dir;
                out.emplace_back(k, mm);
            }
        return out;
    }
};

}  // namespace

GridValue grid_psi(const OperatorGraph& g, const Vec& x, const Vec& xs,
                   const GridOptions& opt) {
    check_oracle_graph(g, 2, "grid_psi");
    const int n = g.dim();
    if (x.size() != n || xs.size() != n)
        throw DimensionError("grid_psi: argument size");
    const int res = std::clamp(opt.resolution, 2, kMaxResolution);
    const DecompositionSweep sw(g, opt, res - 1);
    if (sw.nodes() > kMaxGridNodes) throw LimitError("grid_psi: grid size limit");

    const auto objective = [&](const Vec& z, const Vec& zs,
                               double conj_cost) -> double {
        const Vec y = 2.0 * x - z;
        const Vec ys = 2.0 * xs - zs;
        if (sw.hull && !in_hull_hrep(*sw.hull, y))
            return std::numeric_limits<double>::infinity();
        return 0.5 * phi_direct(g, y, ys) + 0.5 * conj_cost +
               0.125 * ((y - z).squaredNorm() + (ys - zs).squaredNorm());
    };

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> arg_k, arg_mu;
    sw.run([&](const std::vector<int>& k, const std::vector<int>& mu,
               const Vec& z, const Vec& zs, double cost) {
        const double f = objective(z, zs, cost);
        if (f < best) {
            best = f;
            arg_k = k;
            arg_mu = mu;
        }
    });
    if (!std::isfinite(best))
        return {best, std::numeric_limits<double>::infinity()};

    double err = 1e-9;
    for (const auto& [kk, mm] : sw.neighbors(arg_k, arg_mu)) {
        Vec zs;
        double cost;
        const Vec z = sw.point_of(kk, mm, zs, cost);
        const double f = objective(z, zs, cost);
        if (std::isfinite(f)) err = std::max(err, std::abs(f - best) + 1e-9);
    }
    return {best, err};
}

GridArgmin grid_resolvent(const OperatorGraph& g, const Vec& x,
                          const GridOptions& opt) {
    check_oracle_graph(g, 1, "grid_resolvent");
    if (x.size() != 1) throw DimensionError("grid_resolvent: argument size");
    const int res = std::clamp(opt.resolution, 2, kMaxResolution);
    const DecompositionSweep sw(g, opt, res - 1);
    if (sw.nodes() * res > kMaxGridNodes)
        throw LimitError("grid_resolvent: grid size limit");

    const double xq = x[0];
    const double ustep = (opt.hi - opt.lo) / (res - 1);

    const auto objective = [&](double u, const Vec& z, const Vec& zs,
                               double conj_cost) -> double {
        const double y = 2.0 * u - z[0];
        const double ys = 2.0 * (xq - u) - zs[0];
        if (sw.hull) {
            Vec yv(1);
            yv[0] = y;
            if (!in_hull_hrep(*sw.hull, yv))
                return std::numeric_limits<double>::infinity();
        }
        Vec yvec(1), ysvec(1);
        yvec[0] = y;
        ysvec[0] = ys;
        return 0.5 * phi_direct(g, yvec, ysvec) + 0.5 * conj_cost +
               0.125 * ((y - z[0]) * (y - z[0]) + (ys - zs[0]) * (ys - zs[0])) -
               u * (xq - u);
    };

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> arg_k, arg_mu;
    int arg_u = 0;
    sw.run([&](const std::vector<int>& k, const std::vector<int>& mu,
               const Vec& z, const Vec& zs, double cost) {
        for (int iu = 0; iu < res; ++iu) {
            const double u = opt.lo + ustep * iu;
            const double f = objective(u, z, zs, cost);
            if (f < best) {
                best = f;
                arg_k = k;
                arg_mu = mu;
                arg_u = iu;
            }
        }
    });
    Vec u(1);
    u[0] = opt.lo + ustep * arg_u;
    if (!std::isfinite(best))
        return {u, best, std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity()};

    double err = 1e-9;
    {
        Vec zs;
        double cost;
        const Vec z = sw.point_of(arg_k, arg_mu, zs, cost);
        for (int dir = -1; dir <= 1; dir += 2) {
            const int iu = arg_u + dir;
            if (iu < 0 || iu >= res) continue;
            const double f = objective(opt.lo + ustep * iu, z, zs, cost);
            if (std::isfinite(f)) err = std::max(err, std::abs(f - best));
        }
        for (const auto& [kk, mm] : sw.neighbors(arg_k, arg_mu)) {
            Vec zs2;
            double cost2;
            const Vec z2 = sw.point_of(kk, mm, zs2, cost2);
            const double f = objective(u[0], z2, zs2, cost2);
            if (std::isfinite(f)) err = std::max(err, std::abs(f - best));
        }
        err += 1e-9;
    }
    // the gap program is 2-strongly convex in u, so the argmin error is
    // bounded through the value error
    return {u, best, err, std::sqrt(std::max(err, 0.0))};
}

GridValue grid_conjugate_sup(const OperatorGraph& g, const Vec& zs,
                             const Vec& z, const GridOptions& opt) {
    check_oracle_graph(g, 2, "grid_conjugate_sup");
    const int n = g.dim();
    if (zs.size() != n || z.size() != n)
        throw DimensionError("grid_conjugate_sup: argument size");
    const int res = std::clamp(opt.resolution, 2, kMaxResolution);

    std::optional<Polytope> hull;
    if (opt.constrained) {
        std::vector<Vec> pts;
        for (const auto& p : g.pairs()) pts.push_back(p.x);
        hull = Polytope::hull(pts, n);
        hull->facets();
    }

    const int d = 2 * n;
    std::vector<int> resv(d, res);
    if (total_nodes(resv) * std::max(opt.refine_levels, 1) > kMaxGridNodes)
        throw LimitError("grid_conjugate_sup: grid size limit");

    const auto value_of = [&](const Vec& coord) -> double {
        const Vec xx = coord.head(n);
        const Vec xxs = coord.tail(n);
        if (hull && !in_hull_hrep(*hull, xx))
            return -std::numeric_limits<double>::infinity();
        return xx.dot(zs) + z.dot(xxs) - phi_direct(g, xx, xxs);
    };

    // The objective is concave, so the grid argmax is within one spacing of
    // a maximizer; zooming around it converges to the sup geometrically.
    std::vector<double> lo(d, opt.lo);
    std::vector<double> hi(d, opt.hi);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> arg(d, 0);
    std::vector<double> step(d, 0.0);
    for (int level = 0; level < std::max(opt.refine_levels, 1); ++level) {
        for (int k = 0; k < d; ++k) step[k] = (hi[k] - lo[k]) / (res - 1);
        best = -std::numeric_limits<double>::infinity();
        sweep(resv, lo, step,
              [&](const std::vector<int>& idx, const Vec& coord) {
                  const double f = value_of(coord);
                  if (f > best) {
                      best = f;
                      arg = idx;
                  }
              });
        if (level + 1 < std::max(opt.refine_levels, 1)) {
            for (int k = 0; k < d; ++k) {
                const double center = lo[k] + step[k] * arg[k];
                lo[k] = center - 2.0 * step[k];
                hi[k] = center + 2.0 * step[k];
            }
        }
    }
    const auto value_at = [&](const std::vector<int>& idx) {
        Vec coord(d);
        for (int k = 0; k < d; ++k) coord[k] = lo[k] + step[k] * idx[k];
        return value_of(coord);
    };
    return {best, local_error_bound(arg, resv, step, value_at, best)};
}

PairwiseReport check_pairwise(const std::function<Vec(const Vec&)>& handle,
                              PairwiseProperty prop,
                              const std::vector<Vec>& samples, double tol) {
    PairwiseReport rep;
    std::vector<Vec> images;
    images.reserve(samples.size());
    for (const auto& s : samples) images.push_back(handle(s));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const Vec dx = samples[i] - samples[j];
            const Vec dy = images[i] - images[j];
            double slack = 0.0;
            switch (prop) {
                case PairwiseProperty::Nonexpansive:
                    slack = dx.norm() - dy.norm();
                    break;
                case PairwiseProperty::FirmlyNonexpansive:
                    slack = dy.dot(dx) - dy.squaredNorm();
                    break;
                case PairwiseProperty::Monotone:
                    slack = dx.dot(dy);
                    break;
            }
            rep.worst_slack = std::min(rep.worst_slack, slack);
            if (slack < -tol) {
                rep.ok = false;
                rep.violations.push_back({i, j, slack});
            }
        }
    }
    return rep;
}

}  // namespace monex::oracles
