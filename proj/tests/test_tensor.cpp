#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rp/tensor.hpp"

using namespace rp;

namespace {

TruncatedTensor random_tensor(std::mt19937_64& gen, int dim, int level,
                              bool unit_scalar, double amp = 1.0) {
    std::uniform_real_distribution<double> u(-amp, amp);
    TruncatedTensor t(dim, level);
    t.scalar() = unit_scalar ? 1.0 : u(gen);
    for (int k = 1; k <= level; ++k)
        for (double& x : t.at(k)) x = u(gen);
    return t;
}

}  // namespace

TEST_CASE("otimes: single cross term at level 2") {
    // a = (1,[1,0],0), b = (1,[0,1],0) -> (1,[1,1], e1(x)e2)
    auto a = TruncatedTensor::unit(2, 2);
    auto b = TruncatedTensor::unit(2, 2);
    a.at(1)[0] = 1.0;
    b.at(1)[1] = 1.0;
    auto c = otimes(a, b);
    CHECK(c.scalar() == doctest::Approx(1.0));
    CHECK(c.at(1)[0] == doctest::Approx(1.0));
    CHECK(c.at(1)[1] == doctest::Approx(1.0));
    // row-major level 2: index of (i,j) is 2i + j
    CHECK(c.at(2)[0 * 2 + 1] == doctest::Approx(1.0));
    CHECK(c.at(2)[0] == doctest::Approx(0.0));
    CHECK(c.at(2)[2] == doctest::Approx(0.0));
    CHECK(c.at(2)[3] == doctest::Approx(0.0));
}

TEST_CASE("otimes: d=1 n=3 hand convolution") {
    TruncatedTensor a(1, 3), b(1, 3);
    a.scalar() = 1.0; a.at(1)[0] = 2.0; a.at(2)[0] = 3.0; a.at(3)[0] = 4.0;
    b.scalar() = 1.0; b.at(1)[0] = 5.0; b.at(2)[0] = 6.0; b.at(3)[0] = 7.0;
    auto c = otimes(a, b);
    CHECK(c.scalar() == doctest::Approx(1.0));
    CHECK(c.at(1)[0] == doctest::Approx(7.0));
    CHECK(c.at(2)[0] == doctest::Approx(19.0));   // 6 + 2*5 + 3
    CHECK(c.at(3)[0] == doctest::Approx(38.0));   // 7 + 2*6 + 3*5 + 4
}

TEST_CASE("otimes: unit is two-sided identity") {
    std::mt19937_64 gen(7);
    for (int rep = 0; rep < 10; ++rep) {
        auto a = random_tensor(gen, 2, 3, false);
        auto id = TruncatedTensor::unit(2, 3);
        CHECK(max_diff_norm(otimes(a, id), a) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(max_diff_norm(otimes(id, a), a) == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("otimes: associativity on random triples") {
    std::mt19937_64 gen(11);
    for (int rep = 0; rep < 30; ++rep) {
        auto a = random_tensor(gen, 3, 3, false);
        auto b = random_tensor(gen, 3, 3, false);
        auto c = random_tensor(gen, 3, 3, false);
        CHECK(max_diff_norm(otimes(otimes(a, b), c), otimes(a, otimes(b, c))) < 1e-10);
    }
}

TEST_CASE("otimes_in_place matches otimes") {
    std::mt19937_64 gen(13);
    auto a = random_tensor(gen, 2, 4, false);
    auto b = random_tensor(gen, 2, 4, false);
    auto ref = otimes(a, b);
    otimes_in_place(a, b);
    CHECK(max_diff_norm(a, ref) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("otimes: shape mismatch throws") {
    TruncatedTensor a(2, 2), b(2, 3), c(3, 2);
    CHECK_THROWS_AS((void)otimes(a, b), std::invalid_argument);
    CHECK_THROWS_AS((void)otimes(a, c), std::invalid_argument);
}

TEST_CASE("oplus: unit is the zero element, componentwise addition") {
    std::mt19937_64 gen(17);
    auto a = random_tensor(gen, 2, 2, true);
    auto id = TruncatedTensor::unit(2, 2);
    CHECK(max_diff_norm(oplus(a, id), a) == doctest::Approx(0.0));

    TruncatedTensor x(1, 2), y(1, 2);
    x.scalar() = 1.0; x.at(1)[0] = 1.0; x.at(2)[0] = 2.0;
    y.scalar() = 1.0; y.at(1)[0] = 3.0; y.at(2)[0] = 4.0;
    auto z = oplus(x, y);
    CHECK(z.scalar() == doctest::Approx(1.0));
    CHECK(z.at(1)[0] == doctest::Approx(4.0));
    CHECK(z.at(2)[0] == doctest::Approx(6.0));
}

TEST_CASE("oplus: associative, rejects non-unit scalar") {
    std::mt19937_64 gen(19);
    auto a = random_tensor(gen, 2, 3, true);
    auto b = random_tensor(gen, 2, 3, true);
    auto c = random_tensor(gen, 2, 3, true);
    CHECK(max_diff_norm(oplus(oplus(a, b), c), oplus(a, oplus(b, c))) < 1e-12);

    auto bad = random_tensor(gen, 2, 3, false);
    bad.scalar() = 0.5;
    CHECK_THROWS_AS((void)oplus(a, bad), std::domain_error);
}

TEST_CASE("unit_scale: lambda = 0, 1, -2") {
    std::mt19937_64 gen(23);
    auto a = random_tensor(gen, 2, 3, true);
    CHECK(max_diff_norm(unit_scale(0.0, a), TruncatedTensor::unit(2, 3)) == doctest::Approx(0.0));
    CHECK(max_diff_norm(unit_scale(1.0, a), a) == doctest::Approx(0.0));

    TruncatedTensor b(1, 1);
    b.scalar() = 1.0; b.at(1)[0] = 3.0;
    auto s = unit_scale(-2.0, b);
    CHECK(s.scalar() == doctest::Approx(1.0));
    CHECK(s.at(1)[0] == doctest::Approx(-6.0));
}

TEST_CASE("vector space axioms for (T~, oplus, unit_scale)") {
    std::mt19937_64 gen(29);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        auto a = random_tensor(gen, 2, 3, true);
        auto b = random_tensor(gen, 2, 3, true);
        const double lam = u(gen), mu = u(gen);
        // commutativity
        CHECK(max_diff_norm(oplus(a, b), oplus(b, a)) < 1e-12);
        // distributivity over vectors
        CHECK(max_diff_norm(unit_scale(lam, oplus(a, b)),
                            oplus(unit_scale(lam, a), unit_scale(lam, b))) < 1e-12);
        // distributivity over scalars
        CHECK(max_diff_norm(unit_scale(lam + mu, a),
                            oplus(unit_scale(lam, a), unit_scale(mu, a))) < 1e-12);
        // scalar compatibility
        CHECK(max_diff_norm(unit_scale(lam * mu, a),
                            unit_scale(lam, unit_scale(mu, a))) < 1e-12);
        // inverse
        CHECK(max_diff_norm(oplus(a, unit_scale(-1.0, a)),
                            TruncatedTensor::unit(2, 3)) < 1e-12);
    }
}

TEST_CASE("group_inverse: unit, closed form at level 2, random product check") {
    auto id = TruncatedTensor::unit(2, 2);
    CHECK(max_diff_norm(group_inverse(id), id) == doctest::Approx(0.0));

    // a = (1, v, 0) -> (1, -v, v(x)v)
    TruncatedTensor a = TruncatedTensor::unit(2, 2);
    a.at(1)[0] = 0.7; a.at(1)[1] = -0.3;
    auto inv = group_inverse(a);
    CHECK(inv.at(1)[0] == doctest::Approx(-0.7));
    CHECK(inv.at(1)[1] == doctest::Approx(0.3));
    CHECK(inv.at(2)[0] == doctest::Approx(0.49));
    CHECK(inv.at(2)[1] == doctest::Approx(-0.21));
    CHECK(inv.at(2)[2] == doctest::Approx(-0.21));
    CHECK(inv.at(2)[3] == doctest::Approx(0.09));

    std::mt19937_64 gen(31);
    for (int rep = 0; rep < 20; ++rep) {
        auto t = random_tensor(gen, 3, 3, true);
        auto ti = group_inverse(t);
        auto idb = TruncatedTensor::unit(3, 3);
        CHECK(max_diff_norm(otimes(t, ti), idb) < 1e-10);
        CHECK(max_diff_norm(otimes(ti, t), idb) < 1e-10);
    }
}

TEST_CASE("tensor_exp and tensor_log are mutual inverses") {
    std::mt19937_64 gen(37);
    for (int rep = 0; rep < 20; ++rep) {
        auto x = random_tensor(gen, 2, 3, false, 0.8);
        x.scalar() = 0.0;
        CHECK(max_diff_norm(tensor_log(tensor_exp(x)), x) < 1e-12);
        auto a = random_tensor(gen, 2, 3, true, 0.8);
        CHECK(max_diff_norm(tensor_exp(tensor_log(a)), a) < 1e-12);
    }
}

TEST_CASE("level_norm: scalar, Euclidean, admissibility") {
    auto a = TruncatedTensor::unit(2, 1);
    CHECK(level_norm(a, 0) == doctest::Approx(1.0));
    TruncatedTensor b(2, 1);
    b.at(1)[0] = 3.0; b.at(1)[1] = 4.0;
    CHECK(level_norm(b, 1) == doctest::Approx(5.0));
    CHECK_THROWS_AS((void)level_norm(b, 2), std::invalid_argument);

    // submultiplicativity ||v (x) w|| <= ||v|| ||w|| (equality for rank one)
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        TruncatedTensor v(3, 2), w(3, 2);
        for (double& x : v.at(1)) x = u(gen);
        for (double& x : w.at(1)) x = u(gen);
        auto prod = otimes(v, w);
        CHECK(level_norm(prod, 2) <= level_norm(v, 1) * level_norm(w, 1) + 1e-12);
        CHECK(level_norm(prod, 2) ==
              doctest::Approx(level_norm(v, 1) * level_norm(w, 1)).epsilon(1e-12));
    }

    // permutation isometry: swapping the two factors of a pure level-2 tensor
    for (int rep = 0; rep < 20; ++rep) {
        TruncatedTensor v(3, 1), w(3, 1);
        for (double& x : v.at(1)) x = u(gen);
        for (double& x : w.at(1)) x = u(gen);
        TruncatedTensor vw(3, 2), wv(3, 2);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                vw.at(2)[i * 3 + j] = v.at(1)[i] * w.at(1)[j];
                wv.at(2)[i * 3 + j] = w.at(1)[i] * v.at(1)[j];
            }
        CHECK(level_norm(vw, 2) == doctest::Approx(level_norm(wv, 2)).epsilon(1e-12));
    }
}

TEST_CASE("truncate / zero_pad round trips") {
    std::mt19937_64 gen(43);
    auto a = random_tensor(gen, 2, 2, true);
    CHECK(max_diff_norm(truncate(zero_pad(a, 4), 2), a) == doctest::Approx(0.0));
    CHECK(max_diff_norm(truncate(a, 2), a) == doctest::Approx(0.0));

    TruncatedTensor b(1, 1);
    b.scalar() = 1.0; b.at(1)[0] = 1.0;
    auto z = zero_pad(b, 2);
    CHECK(z.level() == 2);
    CHECK(z.at(2)[0] == doctest::Approx(0.0));
    CHECK_THROWS_AS((void)truncate(b, 2), std::invalid_argument);
    CHECK_THROWS_AS((void)zero_pad(b, 0), std::invalid_argument);
}

TEST_CASE("defect_norms matches explicit defect") {
    std::mt19937_64 gen(47);
    std::vector<double> scratch;
    for (int rep = 0; rep < 10; ++rep) {
        auto a = random_tensor(gen, 2, 3, true);
        auto b = random_tensor(gen, 2, 3, true);
        auto c = random_tensor(gen, 2, 3, true);
        std::vector<double> out(4);
        defect_norms(a, b, c, scratch, out);
        auto explicit_defect = sub(otimes(a, b), c);
        for (int k = 0; k <= 3; ++k)
            CHECK(out[k] == doctest::Approx(level_norm(explicit_defect, k)).epsilon(1e-12));
    }
}
