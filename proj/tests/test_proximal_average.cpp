#include "monex/proximal_average.hpp"

#include "monex/oracles.hpp"
#include "testutil.hpp"

#include <doctest.h>

using namespace monex;
using testutil::vec;

namespace {

OperatorGraph single_point(double a, double as) {
    return OperatorGraph(1, Kind::Monotone, {{vec({a}), vec({as})}});
}

OperatorGraph id_graph01() {
    return OperatorGraph(1, Kind::Monotone,
                         {{vec({0.0}), vec({0.0})}, {vec({1.0}), vec({1.0})}});
}

}  // namespace

TEST_CASE("single-point graph: closed-form values") {
    const PsiProgram prog = PsiProgram::plain(single_point(0.0, 0.0));
    // the extension of {(0,0)} is the identity, so Psi(1,1) = <1,1> = 1
    const PsiValue on = prog.psi_eval(vec({1.0}), vec({1.0}));
    REQUIRE(on.value.is_finite());
    CHECK(on.value.value() == doctest::Approx(1.0).epsilon(1e-8));
    REQUIRE(on.certificate);
    CHECK(on.certificate->valid());

    // (1,-1) is off the graph of Id, so the value is strictly above <1,-1>
    const PsiValue off = prog.psi_eval(vec({1.0}), vec({-1.0}));
    REQUIRE(off.value.is_finite());
    CHECK(off.value.value() > -1.0 + 0.1);
    // closed form: gap = 0.5 * ((x-a) - (x*-a*))^2 = 2 here
    CHECK(off.value.value() - (-1.0) == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("single-point graph: psi matches the closed form at random points") {
    testutil::Rng rng(89);
    for (int t = 0; t < 8; ++t) {
        const int n = rng.integer(1, 3);
        const Vec a = rng.vector(n, -2.0, 2.0);
        const Vec as = rng.vector(n, -2.0, 2.0);
        OperatorGraph g(n, Kind::Monotone, {{a, as}});
        const PsiProgram prog = PsiProgram::plain(g);
        const Vec x = rng.vector(n, -3.0, 3.0);
        const Vec xs = rng.vector(n, -3.0, 3.0);
        const double expected = x.dot(as) + a.dot(xs) - a.dot(as) +
                                0.5 * (x - a).squaredNorm() +
                                0.5 * (xs - as).squaredNorm();
        const ExtReal v = prog.psi_value(x, xs);
        REQUIRE(v.is_finite());
        CHECK(v.value() == doctest::Approx(expected).epsilon(1e-7));
    }
}

TEST_CASE("graph membership on the shifted identity line") {
    const PsiProgram prog = PsiProgram::plain(single_point(1.0, 3.0));
    for (double x : {-5.0, 0.0, 7.0})
        CHECK(prog.graph_member(vec({x}), vec({x + 2.0})));
    CHECK_FALSE(prog.graph_member(vec({0.0}), vec({0.0})));
}

TEST_CASE("every data pair is a member") {
    testutil::Rng rng(97);
    for (int t = 0; t < 5; ++t) {
        const OperatorGraph g =
            testutil::random_monotone(rng, rng.integer(1, 3), rng.integer(2, 5));
        const PsiProgram prog = PsiProgram::plain(g);
        for (const auto& p : g.pairs()) CHECK(prog.graph_member(p.x, p.y));
    }
}

TEST_CASE("two-point identity graph at the midpoint") {
    const PsiProgram prog = PsiProgram::plain(id_graph01());
    const PsiValue v = prog.psi_eval(vec({0.5}), vec({0.5}));
    REQUIRE(v.value.is_finite());
    CHECK(v.value.value() == doctest::Approx(0.25).epsilon(1e-6));
    REQUIRE(v.certificate);
    CHECK(v.certificate->valid());
    CHECK(prog.graph_member(vec({0.5}), vec({0.5})));
}

TEST_CASE("psi dominates the pairing everywhere") {
    testutil::Rng rng(101);
    for (int t = 0; t < 4; ++t) {
        const OperatorGraph g =
            testutil::random_monotone(rng, rng.integer(1, 3), rng.integer(2, 5));
        const PsiProgram prog = PsiProgram::plain(g);
        for (int s = 0; s < 25; ++s) {
            const Vec x = rng.vector(g.dim(), -4.0, 4.0);
            const Vec xs = rng.vector(g.dim(), -4.0, 4.0);
            const ExtReal v = prog.psi_value(x, xs);
            REQUIRE(v.is_finite());
            CHECK(v.value() >= x.dot(xs) - 1e-8);
        }
    }
}

TEST_CASE("members sampled through the gap program form a monotone graph") {
    testutil::Rng rng(103);
    for (int t = 0; t < 3; ++t) {
        const OperatorGraph g =
            testutil::random_monotone(rng, rng.integer(1, 2), rng.integer(2, 4));
        const PsiProgram prog = PsiProgram::plain(g);
        std::vector<std::pair<Vec, Vec>> members;
        for (int s = 0; s < 12; ++s) {
            const Vec q = rng.vector(g.dim(), -5.0, 5.0);
            const auto sol = prog.resolvent_gap_min(q);
            CHECK(sol.gap <= 1e-7);
            members.emplace_back(sol.point, q - sol.point);
            CHECK(prog.graph_member(sol.point, q - sol.point));
        }
        for (std::size_t i = 0; i < members.size(); ++i)
            for (std::size_t j = i + 1; j < members.size(); ++j)
                CHECK((members[i].first - members[j].first)
                          .dot(members[i].second - members[j].second) >= -1e-7);
    }
}

TEST_CASE("certificate soundness in both directions") {
    testutil::Rng rng(107);
    for (int t = 0; t < 3; ++t) {
        const OperatorGraph g =
            testutil::random_monotone(rng, rng.integer(1, 2), rng.integer(2, 4));
        const PsiProgram prog = PsiProgram::plain(g);
        for (int s = 0; s < 6; ++s) {
            const Vec q = rng.vector(g.dim(), -4.0, 4.0);
            const auto sol = prog.resolvent_gap_min(q);
            const Vec u = sol.point;
            const Vec us = q - sol.point;
            const PsiValue member = prog.psi_eval(u, us);
            REQUIRE(member.value.is_finite());
            CHECK(member.value.value() - u.dot(us) <= 1e-7);
            REQUIRE(member.certificate);
            CHECK(member.certificate->valid());

            // push the value far off the graph; the gap must open up and
            // the extracted certificate must break
            const Vec far = us + Vec::Constant(g.dim(), 3.0);
            const PsiValue off = prog.psi_eval(u, far);
            REQUIRE(off.value.is_finite());
            if (off.value.value() - u.dot(far) > 1e-6) {
                REQUIRE(off.certificate);
                CHECK_FALSE(off.certificate->valid());
            }
        }
    }
}

TEST_CASE("verify_certificate rejects hand-built bad certificates") {
    const PsiProgram prog = PsiProgram::plain(id_graph01());

    Certificate broken_linear;
    broken_linear.x1 = vec({0.4});
    broken_linear.x1s = vec({0.4});
    broken_linear.x2 = vec({0.4});
    broken_linear.x2s = vec({0.9});  // x1 - x2 = 0 but x1* - x2* = -0.5
    const CertificateReport r1 = prog.verify_certificate(broken_linear);
    CHECK_FALSE(r1.ok);
    CHECK(r1.linear_gap == doctest::Approx(0.5).epsilon(1e-9));

    Certificate fenchel_one;
    fenchel_one.x1 = vec({0.0});
    fenchel_one.x1s = vec({0.0});
    fenchel_one.x2 = vec({1.0});
    fenchel_one.x2s = vec({1.0});
    const CertificateReport r2 = prog.verify_certificate(fenchel_one);
    CHECK_FALSE(r2.ok);
    CHECK(r2.fenchel_gap == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(r2.linear_gap <= 1e-9);
}

TEST_CASE("constrained program: infinite outside the hull") {
    const PsiProgram prog = PsiProgram::constrained(
        id_graph01(), Polytope::hull({vec({0.0}), vec({1.0})}, 1));
    CHECK_FALSE(prog.psi_value(vec({2.0}), vec({0.0})).is_finite());
    CHECK(prog.psi_value(vec({0.5}), vec({0.5})).is_finite());
    // data pairs remain members
    CHECK(prog.graph_member(vec({0.0}), vec({0.0})));
    CHECK(prog.graph_member(vec({1.0}), vec({1.0})));
    // (1, anything >= 1) joins the graph through the normal cone at 1
    CHECK(prog.graph_member(vec({1.0}), vec({4.0})));
    CHECK_FALSE(prog.graph_member(vec({0.5}), vec({4.0})));
}

TEST_CASE("psi agrees with the grid oracle on 1-D instances") {
    testutil::Rng rng(109);
    for (int t = 0; t < 4; ++t) {
        const OperatorGraph g = testutil::random_monotone(rng, 1, rng.integer(2, 4));
        const PsiProgram prog = PsiProgram::plain(g);
        const Vec x = rng.vector(1, -1.5, 1.5);
        const Vec xs = rng.vector(1, -1.5, 1.5);
        const ExtReal v = prog.psi_value(x, xs);
        REQUIRE(v.is_finite());
        oracles::GridOptions opt;
        opt.lo = -8.0;
        opt.hi = 8.0;
        opt.resolution = 161;
        const auto grid = oracles::grid_psi(g, x, xs, opt);
        CHECK(std::abs(v.value() - grid.value) <= 2.0 * grid.error_bound);
        CHECK(grid.value >= v.value() - 1e-7);  // grid min sits above the true min
    }
}
