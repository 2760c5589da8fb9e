#include "monex/fitzpatrick.hpp"

#include "monex/oracles.hpp"
#include "testutil.hpp"

#include <doctest.h>

using namespace monex;
using testutil::vec;

namespace {

OperatorGraph id_graph01() {
    return OperatorGraph(1, Kind::Monotone,
                         {{vec({0.0}), vec({0.0})}, {vec({1.0}), vec({1.0})}});
}

}  // namespace

TEST_CASE("two-point Fitzpatrick function: max(0, x + x* - 1)") {
    const PolyhedralFunction f = build_fitzpatrick(id_graph01());
    REQUIRE(f.pieces().size() == 2);
    CHECK(f.eval(vec({2.0}), vec({3.0})).value() == doctest::Approx(4.0));
    CHECK(f.eval(vec({0.0}), vec({0.0})).value() ==
          doctest::Approx(0.0).scale(1));
    CHECK(f.eval(vec({0.5}), vec({0.2})).value() ==
          doctest::Approx(0.0).scale(1));
}

TEST_CASE("single-pair Fitzpatrick function is affine") {
    testutil::Rng rng(61);
    for (int t = 0; t < 10; ++t) {
        const Vec a = rng.vector(2, -2.0, 2.0);
        const Vec as = rng.vector(2, -2.0, 2.0);
        OperatorGraph g(2, Kind::Monotone, {{a, as}});
        const PolyhedralFunction f = build_fitzpatrick(g);
        const Vec x = rng.vector(2, -3.0, 3.0);
        const Vec xs = rng.vector(2, -3.0, 3.0);
        CHECK(f.eval(x, xs).value() ==
              doctest::Approx(x.dot(as) + a.dot(xs) - a.dot(as)));
    }
}

TEST_CASE("on-graph values equal the duality pairing") {
    testutil::Rng rng(67);
    for (int t = 0; t < 10; ++t) {
        const OperatorGraph g =
            testutil::random_monotone(rng, rng.integer(1, 3), rng.integer(2, 5));
        const PolyhedralFunction f = build_fitzpatrick(g);
        const ConjugateProgram c = build_conjugate(g);
        for (const auto& p : g.pairs()) {
            const double pairing = p.x.dot(p.y);
            CHECK(f.eval(p.x, p.y).value() ==
                  doctest::Approx(pairing).epsilon(1e-9));
            const ExtReal conj = c.eval(p.y, p.x);
            REQUIRE(conj.is_finite());
            CHECK(conj.value() == doctest::Approx(pairing).epsilon(1e-9));
        }
    }
}

TEST_CASE("conjugate of the two-point identity graph") {
    const ConjugateProgram c = build_conjugate(id_graph01());
    const ExtReal mid = c.eval(vec({0.5}), vec({0.5}));
    REQUIRE(mid.is_finite());
    CHECK(mid.value() == doctest::Approx(0.5).epsilon(1e-8));
    const ExtReal zero = c.eval(vec({0.0}), vec({0.0}));
    REQUIRE(zero.is_finite());
    CHECK(zero.value() == doctest::Approx(0.0).scale(1).epsilon(1e-8));
    CHECK_FALSE(c.eval(vec({2.0}), vec({2.0})).is_finite());
    CHECK_FALSE(c.eval(vec({0.5}), vec({0.4})).is_finite());
}

TEST_CASE("constrained build keeps pieces, adds cones and domain records") {
    // domain = vertices of the unit square
    std::vector<GraphPair> pairs;
    const std::vector<Vec> verts = {vec({0.0, 0.0}), vec({1.0, 0.0}),
                                    vec({0.0, 1.0}), vec({1.0, 1.0})};
    for (const auto& v : verts) pairs.push_back({v, v});  // identity values
    OperatorGraph g(2, Kind::Monotone, pairs);
    const Polytope d = Polytope::hull(verts, 2);
    const ConstrainedFitzpatrick cf = build_constrained(g, d);
    CHECK(cf.function.pieces().size() == 4);
    CHECK(cf.function.domain_constraints().size() == 4);
    for (const auto& gens : cf.conjugate.normal_generators())
        CHECK(gens.size() == 2);  // two active facets at each vertex

    // off-hull first argument evaluates to +infinity
    CHECK_FALSE(cf.function.eval(vec({2.0, 0.5}), vec({0.0, 0.0})).is_finite());
    CHECK(cf.function.eval(vec({0.5, 0.5}), vec({0.0, 0.0})).is_finite());
}

TEST_CASE("interior data points contribute trivial constraints") {
    // identity on a grid inside ]-1,1[, hull [-0.9, 0.9]
    std::vector<GraphPair> pairs;
    for (double x : {-0.9, -0.45, 0.0, 0.45, 0.9})
        pairs.push_back({vec({x}), vec({x})});
    OperatorGraph g(1, Kind::Monotone, pairs);
    const Polytope d = Polytope::hull({vec({-0.9}), vec({0.9})}, 1);
    const ConstrainedFitzpatrick cf = build_constrained(g, d);
    const PolyhedralFunction plain = build_fitzpatrick(g);
    // inside the hull the constrained function agrees with the plain one
    testutil::Rng rng(71);
    for (int t = 0; t < 20; ++t) {
        const Vec x = rng.vector(1, -0.9, 0.9);
        const Vec xs = rng.vector(1, -2.0, 2.0);
        const ExtReal a = cf.function.eval(x, xs);
        REQUIRE(a.is_finite());
        CHECK(a.value() == doctest::Approx(plain.eval(x, xs).value()));
    }
    CHECK_FALSE(cf.function.eval(vec({1.2}), vec({0.0})).is_finite());

    // single interior point of a segment: trivial constraint
    OperatorGraph one(1, Kind::Monotone, {{vec({0.0}), vec({3.0})}});
    const Polytope seg = Polytope::hull({vec({-1.0}), vec({1.0})}, 1);
    const ConstrainedFitzpatrick cf1 = build_constrained(one, seg);
    CHECK(cf1.conjugate.normal_generators()[0].empty());
    CHECK(cf1.function.eval(vec({0.7}), vec({0.0})).is_finite());
}

TEST_CASE("Fenchel-Young inequality on random samples") {
    testutil::Rng rng(73);
    for (int t = 0; t < 5; ++t) {
        const OperatorGraph g =
            testutil::random_monotone(rng, rng.integer(1, 2), rng.integer(2, 4));
        const PolyhedralFunction f = build_fitzpatrick(g);
        const ConjugateProgram c = build_conjugate(g);
        for (int s = 0; s < 10; ++s) {
            const Vec x = rng.vector(g.dim(), -2.0, 2.0);
            const Vec xs = rng.vector(g.dim(), -2.0, 2.0);
            // points of the conjugate domain: convex combinations
            Vec z = Vec::Zero(g.dim()), zs = Vec::Zero(g.dim());
            Vec w = testutil::simplex_projection_bisect(
                rng.vector(static_cast<int>(g.size()), -1.0, 1.0));
            for (std::size_t i = 0; i < g.size(); ++i) {
                z += w[static_cast<int>(i)] * g.pair(i).x;
                zs += w[static_cast<int>(i)] * g.pair(i).y;
            }
            const ExtReal fv = f.eval(x, xs);
            const ExtReal cv = c.eval(zs, z);
            REQUIRE(fv.is_finite());
            REQUIRE(cv.is_finite());
            CHECK(fv.value() + cv.value() >=
                  x.dot(zs) + z.dot(xs) - 1e-8);
        }
    }
}

TEST_CASE("LP form agrees with the refined grid sup") {
    testutil::Rng rng(79);
    for (int t = 0; t < 6; ++t) {
        const OperatorGraph g = testutil::random_monotone(rng, 1, rng.integer(2, 4));
        const ConjugateProgram c = build_conjugate(g);
        // instances with the sup attained inside the box: the swapped graph
        // points and their midpoints
        std::vector<std::pair<Vec, Vec>> queries;
        for (const auto& p : g.pairs()) queries.push_back({p.y, p.x});
        queries.push_back({0.5 * (g.pair(0).y + g.pair(1).y),
                           0.5 * (g.pair(0).x + g.pair(1).x)});
        for (const auto& [zs, z] : queries) {
            const ExtReal lp = c.eval(zs, z);
            REQUIRE(lp.is_finite());
            oracles::GridOptions opt;
            opt.lo = -6.0;
            opt.hi = 6.0;
            opt.resolution = 33;
            opt.refine_levels = 9;
            const auto sup = oracles::grid_conjugate_sup(g, zs, z, opt);
            CHECK(std::abs(lp.value() - sup.value) <= 1e-6);
        }
    }
}

TEST_CASE("constrained variant dominates and matches where finite") {
    testutil::Rng rng(83);
    for (int t = 0; t < 5; ++t) {
        const OperatorGraph g =
            testutil::random_monotone(rng, rng.integer(1, 2), rng.integer(2, 4));
        std::vector<Vec> pts;
        for (const auto& p : g.pairs()) pts.push_back(p.x);
        const Polytope d = Polytope::hull(pts, g.dim());
        const ConstrainedFitzpatrick cf = build_constrained(g, d);
        const PolyhedralFunction plain = build_fitzpatrick(g);
        for (int s = 0; s < 20; ++s) {
            const Vec x = rng.vector(g.dim(), -3.0, 3.0);
            const Vec xs = rng.vector(g.dim(), -3.0, 3.0);
            const ExtReal constrained = cf.function.eval(x, xs);
            const ExtReal base = plain.eval(x, xs);
            REQUIRE(base.is_finite());
            if (constrained.is_finite())
                CHECK(constrained.value() ==
                      doctest::Approx(base.value()).epsilon(1e-9));
        }
    }
}
