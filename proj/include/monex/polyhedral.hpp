#pragma once

#include "monex/types.hpp"

#include <memory>
#include <mutex>
#include <vector>

namespace monex {

/// Halfspace {x : <normal, x> <= offset}.
struct Halfspace {
    Vec normal;
    double offset;
};

/// Finitely generated convex cone, conic V-representation.
class Cone {
public:
    Cone(int dim, std::vector<Vec> generators);

    int dim() const { return dim_; }
    const std::vector<Vec>& generators() const { return generators_; }

    /// d in cone iff d is a nonnegative combination of the generators,
    /// decided by nonnegative least squares. Empty generator list = {0}.
    bool contains(const Vec& d, double tol = 1e-8) const;

private:
    int dim_;
    std::vector<Vec> generators_;
};

/// Convex hull of finitely many points. V-rep is stored verbatim
/// (exact duplicates dropped); the H-rep (facets relative to the affine
/// hull) is computed on demand by exhaustive candidate enumeration and
/// cached. Immutable apart from that one-time cache fill.
class Polytope {
public:
    static Polytope hull(const std::vector<Vec>& points, int dim);

    int dim() const { return dim_; }
    /// Dimension of the affine hull of the generators.
    int affine_dim() const { return static_cast<int>(basis_.cols()); }
    const std::vector<Vec>& generators() const { return generators_; }
    const Vec& centroid() const { return centroid_; }
    /// Orthonormal basis of the affine hull's direction space (dim x k).
    const Mat& hull_basis() const { return basis_; }
    /// Orthonormal basis of its orthogonal complement (dim x (dim-k)).
    const Mat& hull_complement() const { return complement_; }

    /// Supporting halfspaces relative to the affine hull, outward unit
    /// normals. Enforced caps: dim <= 4 and <= 12 generating points;
    /// beyond them a LimitError("facet enumeration limit") is thrown.
    const std::vector<Halfspace>& facets() const;

    /// Normal cone N(a): outward normals of the facets active at a plus
    /// +/- an orthonormal basis of the affine hull's orthogonal
    /// complement. Throws if a is not in the polytope (tolerance 1e-9).
    Cone normal_cone(const Vec& a) const;

    /// x - a in T(a) = cone(hull - a)? Nonnegative least squares with
    /// residual tolerance tol.
    bool tangent_cone_member(const Vec& a, const Vec& x,
                             double tol = 1e-8) const;

    /// Euclidean projection, via the simplex-constrained least squares
    /// program over the generators. Throws SolverError on solver failure.
    Vec project(const Vec& x) const;

    double distance(const Vec& x) const;
    bool contains(const Vec& x, double tol = 1e-9) const;

private:
    Polytope() = default;

    int dim_ = 0;
    std::vector<Vec> generators_;
    Vec centroid_;
    Mat basis_;
    Mat complement_;

    struct FacetCache {
        std::once_flag once;
        std::vector<Halfspace> value;
    };
    std::shared_ptr<FacetCache> cache_;
};

}  // namespace monex
