#include <catch2/catch_amalgamated.hpp>

#include "hqe/series.hpp"

#include <random>

using namespace hqe;

namespace {

EnvPtr small_env() {
    Policy pol;
    pol.novikov_cap = 8;
    std::vector<VarSpec> vars = {
        {"lam", VarKind::Laurent, -9, 9, 1, Group::None},
        {"L", VarKind::Polynomial, 0, 3, 1, Group::None},
        {"s", VarKind::HalfLaurent, -16, 16, 2, Group::None},
        {"eps", VarKind::Laurent, -6, 6, 1, Group::None},
        {"y1", VarKind::Polynomial, 0, 4, 1, Group::Y},
    };
    return make_env(pol, vars);
}

Series lam(const EnvPtr& e, int p = 1) { return Series::var(e, "lam", p); }

// d/dlam with the built-in rule dL/dlam = 1/lam.
Series dlam(const Series& a) {
    const EnvPtr& e = a.env();
    return a.diff("lam") + a.diff("L") * lam(e, -1);
}

Series random_sparse(const EnvPtr& e, std::mt19937& rng, int lam_max = 3, int s_max = 2) {
    std::uniform_int_distribution<int> nterms(1, 6), lamexp(-lam_max, lam_max), sexp(0, s_max),
        num(-9, 9), den(1, 9);
    Series r = Series::zero(e);
    int n = nterms(rng);
    for (int i = 0; i < n; ++i) {
        Series mono = Series::one(e);
        mono = mono * lam(e, lamexp(rng));
        mono = mono * Series::var(e, "s", sexp(rng));
        r = r + mono.scaled(Scalar(Rat(num(rng), den(rng))));
    }
    return r;
}

} // namespace

TEST_CASE("series ring basics") {
    auto e = small_env();
    SECTION("difference of squares") {
        Series a = Series::one(e) + lam(e, -1);
        Series b = Series::one(e) - lam(e, -1);
        REQUIRE(a * b == Series::one(e) - lam(e, -2));
    }
    SECTION("annihilator") {
        Series a = lam(e, 2) + Series::var(e, "s", 3);
        REQUIRE((a * Series::zero(e)).is_zero());
    }
    SECTION("mismatched environments rejected") {
        auto e2 = small_env();
        REQUIRE_THROWS(Series::one(e) + Series::one(e2));
    }
    SECTION("ring laws on random sparse inputs") {
        std::mt19937 rng(20240817);
        for (int trial = 0; trial < 25; ++trial) {
            Series a = random_sparse(e, rng), b = random_sparse(e, rng), c = random_sparse(e, rng);
            REQUIRE((a * b) * c == a * (b * c));
            REQUIRE(a * (b + c) == a * b + a * c);
            REQUIRE(a * b == b * a);
            REQUIRE(a + b == b + a);
        }
    }
}

TEST_CASE("series exp") {
    auto e = small_env();
    SECTION("exp(0) = 1") { REQUIRE(Series::zero(e).exp_series() == Series::one(e)); }
    SECTION("inverse pair under y cap") {
        Series y_over_eps = Series::var(e, "y1") * Series::var(e, "eps", -1);
        REQUIRE(y_over_eps.exp_series() * (-y_over_eps).exp_series() == Series::one(e));
    }
    SECTION("exp(s lam^-1) to novikov cap") {
        // window on s is generous here; restrict by hand to power 2
        Policy pol;
        pol.novikov_cap = 2;
        auto e2 = make_env(pol, {{"lam", VarKind::Laurent, -4, 4, 1, Group::None},
                                 {"s", VarKind::HalfLaurent, 0, 4, 2, Group::None}});
        Series a = Series::var(e2, "s") * Series::var(e2, "lam", -1);
        Series want = Series::one(e2) + a + (a * a).scaled(Scalar(Rat(1, 2)));
        REQUIRE(a.exp_series() == want);
    }
    SECTION("homomorphism on commuting nilpotents") {
        std::mt19937 rng(7);
        Series u = Series::var(e, "s") * random_sparse(e, rng, 1, 1);
        Series v = Series::var(e, "s") * random_sparse(e, rng, 1, 1);
        REQUIRE((u + v).exp_series() == u.exp_series() * v.exp_series());
    }
    SECTION("non-nilpotent argument throws") {
        REQUIRE_THROWS((Series::one(e) + lam(e, 1)).exp_series(40));
    }
}

TEST_CASE("series calculus") {
    auto e = small_env();
    SECTION("product rule with dL = dlam/lam") {
        // d/dlam (lam^2 L) = 2 lam L + lam
        Series f = lam(e, 2) * Series::var(e, "L");
        REQUIRE(dlam(f) == Series::rat_mul(2, lam(e, 1) * Series::var(e, "L")) + lam(e, 1));
    }
    SECTION("antidiff is a right inverse of diff") {
        std::mt19937 rng(99);
        for (int trial = 0; trial < 10; ++trial) {
            Series a = random_sparse(e, rng) * lam(e, 5); // keep lam powers off -1
            REQUIRE(a.antidiff("lam").diff("lam") == a);
        }
    }
    SECTION("lam^-1 has no lam-primitive") { REQUIRE_THROWS(lam(e, -1).antidiff("lam")); }
}

TEST_CASE("reversion of the CP1 superpotential at infinity") {
    auto e = small_env();
    int ilam = e->index_of("lam");
    Series s2 = Series::var(e, "s", 2);
    auto f = [&](const Series& x) {
        return x + s2 * x.inverse_given_leading(ilam, 1, Scalar(1));
    };
    auto fp = [&](const Series& x) {
        Series xinv = x.inverse_given_leading(ilam, 1, Scalar(1));
        return Series::one(e) - s2 * xinv * xinv;
    };
    auto inv1 = [&](const Series& g) { return g.inverse_given_leading(ilam, 0, Scalar(1)); };
    Series xplus = newton_solve(f, fp, inv1, lam(e), lam(e));

    // quadratic-formula oracle: x_{+-} = (lam/2)(1 +- sqrt(1 - 4 s^2 lam^-2))
    Series u = Series::rat_mul(-4, s2 * lam(e, -2));
    Series root = sqrt1p_series(u);
    Series xplus_oracle = (lam(e) * (Series::one(e) + root)).scaled(Scalar(Rat(1, 2)));
    REQUIRE(xplus == xplus_oracle);

    // displayed shape: x_+ = lam - s^2 lam^-1 - s^4 lam^-3 - 2 s^6 lam^-5 + ...
    Series expect = lam(e) - s2 * lam(e, -1) - s2 * s2 * lam(e, -3) -
                    Series::rat_mul(2, s2 * s2 * s2 * lam(e, -5));
    Series diff = xplus - expect;
    for (auto& [exp, c] : diff.terms()) REQUIRE(exp[ilam] <= -7);

    // small root via its own leading monomial
    ExpVec lead{};
    lead[ilam] = -1;
    lead[e->index_of("s")] = 4;
    auto fsmall = [&](const Series& x) {
        return x + s2 * x.inverse_given_leading(lead, Scalar(1));
    };
    auto fpsmall = [&](const Series& x) {
        Series xinv = x.inverse_given_leading(lead, Scalar(1));
        return Series::one(e) - s2 * xinv * xinv;
    };
    ExpVec lead2{};
    lead2[ilam] = 2;
    lead2[e->index_of("s")] = -4;
    auto invsmall = [&](const Series& g) { return g.inverse_given_leading(lead2, Scalar(-1)); };
    Series xminus = newton_solve(fsmall, fpsmall, invsmall, lam(e), s2 * lam(e, -1));
    Series xminus_oracle = (lam(e) * (Series::one(e) - root)).scaled(Scalar(Rat(1, 2)));
    REQUIRE(xminus == xminus_oracle);

    SECTION("product of root expansions is exactly s^2") {
        Series prod = xplus * xminus;
        // equality holds only inside the certified lambda range
        Series delta = prod - s2;
        for (auto& [exp, c] : delta.terms()) {
            INFO(delta.pretty());
            REQUIRE(!delta.exact_at(exp));
        }
    }
    SECTION("composition returns the target") {
        REQUIRE(!(f(xplus) - lam(e)).certified_nonzero());
        REQUIRE(!(fsmall(xminus) - lam(e)).certified_nonzero());
    }
}

TEST_CASE("truncation behavior") {
    SECTION("monotonicity: big window then truncate == small window") {
        Policy big, small;
        std::vector<VarSpec> vb = {{"lam", VarKind::Laurent, -9, 9, 1, Group::None}};
        std::vector<VarSpec> vs = {{"lam", VarKind::Laurent, -4, 4, 1, Group::None}};
        auto eb = make_env(big, vb);
        auto es = make_env(small, vs);
        std::mt19937 rng(3);
        for (int trial = 0; trial < 10; ++trial) {
            std::uniform_int_distribution<int> le(-3, 3), num(-5, 5);
            Series a = Series::zero(eb), b = Series::zero(eb);
            for (int i = 0; i < 4; ++i) {
                a = a + Series::var(eb, "lam", le(rng)).scaled(Scalar(num(rng)));
                b = b + Series::var(eb, "lam", le(rng)).scaled(Scalar(num(rng)));
            }
            Series big_then_small = (a * b).transplant(es);
            Series small_all = a.transplant(es) * b.transplant(es);
            REQUIRE(big_then_small == small_all);
        }
    }
    SECTION("validity bounds certify pollution") {
        Policy pol;
        auto e = make_env(pol, {{"lam", VarKind::Laurent, -2, 2, 1, Group::None}});
        Series a = lam(e, -2), b = lam(e, -1);
        Series c = a * b; // true lam^-3, dropped
        REQUIRE(c.is_zero());
        REQUIRE(c.truncated());
        Series d = c * lam(e, 2); // true lam^-1, still zero stored
        ExpVec at_m1{};
        at_m1[0] = -1;
        ExpVec at_0{};
        REQUIRE(!d.exact_at(at_m1));
        REQUIRE(d.exact_at(at_0));
    }
}
