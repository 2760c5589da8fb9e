#include "monex/polyhedral.hpp"

#include "testutil.hpp"

#include <doctest.h>

#include <algorithm>
#include <thread>

using namespace monex;
using testutil::vec;

namespace {

Polytope segment01() { return Polytope::hull({vec({0.0}), vec({1.0})}, 1); }

bool has_facet(const Polytope& p, const Vec& normal, double offset) {
    for (const auto& h : p.facets())
        if ((h.normal - normal).lpNorm<Eigen::Infinity>() <= 1e-9 &&
            std::abs(h.offset - offset) <= 1e-9)
            return true;
    return false;
}

bool generators_match(const Cone& c, const std::vector<Vec>& expected) {
    if (c.generators().size() != expected.size()) return false;
    std::vector<bool> used(expected.size(), false);
    for (const auto& g : c.generators()) {
        bool found = false;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (!used[i] && (g - expected[i]).norm() <= 1e-9) {
                used[i] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("hull dedups and keeps interior generators") {
    const Polytope seg = Polytope::hull({vec({0.0}), vec({0.5}), vec({1.0}),
                                         vec({1.0})},
                                        1);
    CHECK(seg.generators().size() == 3);
    CHECK(seg.affine_dim() == 1);

    const Polytope tri =
        Polytope::hull({vec({0.0, 0.0}), vec({1.0, 0.0}), vec({0.0, 1.0})}, 2);
    CHECK(tri.affine_dim() == 2);
}

TEST_CASE("facets of a segment") {
    const Polytope seg = segment01();
    CHECK(seg.facets().size() == 2);
    CHECK(has_facet(seg, vec({1.0}), 1.0));   // x <= 1
    CHECK(has_facet(seg, vec({-1.0}), 0.0));  // -x <= 0
}

TEST_CASE("facets of the unit square") {
    const Polytope sq = Polytope::hull(
        {vec({0.0, 0.0}), vec({1.0, 0.0}), vec({0.0, 1.0}), vec({1.0, 1.0})},
        2);
    CHECK(sq.facets().size() == 4);
    CHECK(has_facet(sq, vec({1.0, 0.0}), 1.0));
    CHECK(has_facet(sq, vec({0.0, 1.0}), 1.0));
    CHECK(has_facet(sq, vec({-1.0, 0.0}), 0.0));
    CHECK(has_facet(sq, vec({0.0, -1.0}), 0.0));
}

TEST_CASE("single point: no facets, normal cone is everything") {
    const Polytope pt = Polytope::hull({vec({3.0})}, 1);
    CHECK(pt.affine_dim() == 0);
    CHECK(pt.facets().empty());
    const Cone nc = pt.normal_cone(vec({3.0}));
    CHECK(generators_match(nc, {vec({1.0}), vec({-1.0})}));
    CHECK(nc.contains(vec({7.0})));
    CHECK(nc.contains(vec({-7.0})));
    // tangent cone is {0}
    CHECK(pt.tangent_cone_member(vec({3.0}), vec({3.0})));
    CHECK_FALSE(pt.tangent_cone_member(vec({3.0}), vec({3.5})));
}

TEST_CASE("facet enumeration caps are enforced") {
    std::vector<Vec> pts;
    testutil::Rng rng(5);
    for (int i = 0; i < 13; ++i) pts.push_back(rng.vector(2, -1.0, 1.0));
    const Polytope p = Polytope::hull(pts, 2);
    CHECK_THROWS_AS(p.facets(), LimitError);
    CHECK_THROWS_AS(p.normal_cone(p.generators()[0]), LimitError);

    std::vector<Vec> five;
    for (int i = 0; i < 6; ++i) five.push_back(rng.vector(5, -1.0, 1.0));
    CHECK_THROWS_AS(Polytope::hull(five, 5).facets(), LimitError);
}

TEST_CASE("facets of the 4-D simplex") {
    std::vector<Vec> pts{Vec::Zero(4)};
    for (int i = 0; i < 4; ++i) {
        Vec e = Vec::Zero(4);
        e[i] = 1.0;
        pts.push_back(e);
    }
    const Polytope p = Polytope::hull(pts, 4);
    CHECK(p.affine_dim() == 4);
    CHECK(p.facets().size() == 5);
}

TEST_CASE("normal cones of the segment") {
    const Polytope seg = segment01();
    CHECK(seg.normal_cone(vec({0.5})).generators().empty());
    CHECK(generators_match(seg.normal_cone(vec({1.0})), {vec({1.0})}));
    CHECK(generators_match(seg.normal_cone(vec({0.0})), {vec({-1.0})}));
    CHECK_THROWS_AS(seg.normal_cone(vec({1.5})), InvalidGraphError);
}

TEST_CASE("normal cone of a flat segment in the plane") {
    const Polytope flat =
        Polytope::hull({vec({-1.0, 0.0}), vec({1.0, 0.0})}, 2);
    const Cone nc = flat.normal_cone(vec({0.0, 0.0}));
    CHECK(generators_match(nc, {vec({0.0, 1.0}), vec({0.0, -1.0})}));
}

TEST_CASE("tangent cone membership") {
    const Polytope seg = segment01();
    CHECK(seg.tangent_cone_member(vec({0.0}), vec({5.0})));
    CHECK_FALSE(seg.tangent_cone_member(vec({0.0}), vec({-0.1})));

    const Polytope sq = Polytope::hull(
        {vec({0.0, 0.0}), vec({1.0, 0.0}), vec({0.0, 1.0}), vec({1.0, 1.0})},
        2);
    CHECK_FALSE(sq.tangent_cone_member(vec({1.0, 1.0}), vec({0.5, 2.0})));
    CHECK(sq.tangent_cone_member(vec({1.0, 1.0}), vec({0.5, 0.5})));
}

TEST_CASE("projection golden cases") {
    CHECK(segment01().project(vec({2.0}))[0] == doctest::Approx(1.0));
    const Polytope flat =
        Polytope::hull({vec({0.0, 0.0}), vec({1.0, 0.0})}, 2);
    CHECK((flat.project(vec({0.5, 2.0})) - vec({0.5, 0.0})).norm() <= 1e-8);
    const Polytope tri =
        Polytope::hull({vec({0.0, 0.0}), vec({1.0, 0.0}), vec({0.0, 1.0})}, 2);
    CHECK((tri.project(vec({1.0, 1.0})) - vec({0.5, 0.5})).norm() <= 1e-8);
}

TEST_CASE("projection variational inequality and idempotence") {
    testutil::Rng rng(19);
    for (int t = 0; t < 25; ++t) {
        const int dim = rng.integer(1, 3);
        const int m = rng.integer(1, 6);
        std::vector<Vec> pts;
        for (int i = 0; i < m; ++i) pts.push_back(rng.vector(dim, -2.0, 2.0));
        const Polytope p = Polytope::hull(pts, dim);
        const Vec x = rng.vector(dim, -5.0, 5.0);
        const Vec px = p.project(x);
        CHECK(p.contains(px, 1e-8));
        for (const auto& v : p.generators())
            CHECK((x - px).dot(v - px) <= 1e-8);
        CHECK((p.project(px) - px).norm() <= 1e-8);
    }
}

TEST_CASE("normal and tangent cones are polar") {
    testutil::Rng rng(31);
    for (int t = 0; t < 15; ++t) {
        const int dim = rng.integer(1, 3);
        const int m = rng.integer(1, 5);
        std::vector<Vec> pts;
        for (int i = 0; i < m; ++i) pts.push_back(rng.vector(dim, -2.0, 2.0));
        const Polytope p = Polytope::hull(pts, dim);
        for (const auto& a : p.generators()) {
            const Cone nc = p.normal_cone(a);
            for (int s = 0; s < 10; ++s) {
                const Vec x = rng.vector(dim, -3.0, 3.0);
                if (!p.tangent_cone_member(a, x)) continue;
                for (const auto& n : nc.generators())
                    CHECK(n.dot(x - a) <= 1e-8);
            }
        }
    }
}

TEST_CASE("intersection of tangent-cone translates recovers the hull") {
    testutil::Rng rng(37);
    for (int t = 0; t < 10; ++t) {
        const int dim = rng.integer(1, 2);
        const int m = rng.integer(2, 5);
        std::vector<Vec> pts;
        for (int i = 0; i < m; ++i) pts.push_back(rng.vector(dim, -2.0, 2.0));
        const Polytope p = Polytope::hull(pts, dim);
        for (int s = 0; s < 30; ++s) {
            const Vec x = rng.vector(dim, -3.0, 3.0);
            bool in_all = true;
            for (const auto& a : p.generators())
                if (!p.tangent_cone_member(a, x, 1e-8)) {
                    in_all = false;
                    break;
                }
            const bool in_hull = p.contains(x, 1e-6);
            if (in_hull) CHECK(in_all);
            if (!in_all) CHECK_FALSE(p.contains(x, 1e-9));
        }
    }
}

TEST_CASE("H-rep and V-rep classify points identically") {
    testutil::Rng rng(43);
    for (int t = 0; t < 10; ++t) {
        const int dim = rng.integer(1, 3);
        const int m = rng.integer(2, 6);
        std::vector<Vec> pts;
        for (int i = 0; i < m; ++i) pts.push_back(rng.vector(dim, -2.0, 2.0));
        const Polytope p = Polytope::hull(pts, dim);
        for (int s = 0; s < 20; ++s) {
            const Vec x = rng.vector(dim, -3.0, 3.0);
            const double dist = p.distance(x);
            if (dist > 1e-6) {
                // outside by V-rep: an H-rep constraint must cut it off,
                // unless it already leaves the affine hull
                bool cut =
                    (p.hull_complement().transpose() * (x - p.centroid()))
                        .norm() > 1e-9;
                for (const auto& h : p.facets())
                    if (h.normal.dot(x) > h.offset + 1e-9) cut = true;
                CHECK(cut);
            } else {
                for (const auto& h : p.facets())
                    CHECK(h.normal.dot(x) <= h.offset + 1e-6);
            }
        }
    }
}

TEST_CASE("concurrent facet triggering computes once and agrees") {
    const Polytope sq = Polytope::hull(
        {vec({0.0, 0.0}), vec({1.0, 0.0}), vec({0.0, 1.0}), vec({1.0, 1.0})},
        2);
    std::vector<std::size_t> counts(8, 0);
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t)
        threads.emplace_back(
            [&, t] { counts[t] = sq.facets().size(); });
    for (auto& th : threads) th.join();
    for (std::size_t n : counts) CHECK(n == 4);
}

TEST_CASE("facet invariants on random hulls") {
    testutil::Rng rng(47);
    for (int t = 0; t < 10; ++t) {
        const int dim = rng.integer(2, 3);
        const int m = rng.integer(3, 8);
        std::vector<Vec> pts;
        for (int i = 0; i < m; ++i) pts.push_back(rng.vector(dim, -2.0, 2.0));
        const Polytope p = Polytope::hull(pts, dim);
        const int k = p.affine_dim();
        for (const auto& h : p.facets()) {
            CHECK(h.normal.norm() == doctest::Approx(1.0).epsilon(1e-9));
            int active = 0;
            for (const auto& v : p.generators()) {
                CHECK(h.normal.dot(v) <= h.offset + 1e-9);
                if (std::abs(h.normal.dot(v) - h.offset) <= 1e-8) ++active;
            }
            CHECK(active >= k);  // supporting relative to the affine hull
        }
    }
}
