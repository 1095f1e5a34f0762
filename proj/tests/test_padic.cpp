#include <doctest.h>

#include "ppolar/padic.hpp"
#include "ppolar/rng.hpp"

#include "oracles.hpp"

using namespace ppolar;

namespace {
Ctx ctx5(int prec = kDefaultPrecision) { return PrimeContext::make(5, prec); }
}  // namespace

TEST_CASE("context validation") {
    CHECK_THROWS_AS(PrimeContext::make(2), UsageError);
    CHECK_THROWS_AS(PrimeContext::make(9), UsageError);
    CHECK_THROWS_AS(PrimeContext::make(5, 0), UsageError);
    CHECK_THROWS_AS(PrimeContext::make(5, 100000), UsageError);
    CHECK(PrimeContext::make(3)->nonresidue == 2);
    CHECK(PrimeContext::make(5)->nonresidue == 2);
    CHECK(PrimeContext::make(7)->nonresidue == 3);
}

TEST_CASE("embedding tracks valuation exactly") {
    auto c = ctx5();
    auto x = PadicScalar::embed_int(c, 50);
    CHECK(x.valuation() == 2);
    CHECK(x.leading_digit() == 2);
    CHECK(x.precision() == c->precision);

    CHECK(PadicScalar::embed_int(c, 0).is_zero());
    CHECK_THROWS_AS(PadicScalar::embed_int(c, 3, 0), DivisionByZeroError);

    auto half = PadicScalar::embed_int(c, 1, 2);
    auto two = PadicScalar::embed_int(c, 2);
    CHECK(agreement_digits(half * two, PadicScalar::one(c)) >= c->precision);
}

TEST_CASE("subtraction cancels into higher valuation with reduced precision") {
    auto c = ctx5(4);
    auto a = PadicScalar::from_unit(c, 0, 1 + 5 + 25, 4);
    auto b = PadicScalar::from_unit(c, 0, 1 + 5, 4);
    auto d = a - b;
    CHECK(d.valuation() == 2);
    CHECK(d.unit() == 1);
    CHECK(d.precision() == 2);
}

TEST_CASE("full cancellation raises InsufficientPrecision") {
    auto c = ctx5(6);
    auto a = PadicScalar::from_unit(c, 0, 7, 6);
    CHECK_THROWS_AS(a - a, InsufficientPrecisionError);
    // ... but a later term can rescue an n-ary sum
    auto r = sum_scalars(c, {a, a.negate(), PadicScalar::embed_int(c, 5, 1, 6)});
    CHECK(r.valuation() == 1);
}

TEST_CASE("exact zero is absorbing and precise") {
    auto c = ctx5();
    auto z = PadicScalar::zero(c);
    auto x = PadicScalar::embed_int(c, 7);
    CHECK((z * x).is_zero());
    CHECK((x + z).identical(x));
    CHECK((x - z).identical(x));
    CHECK_THROWS_AS(x / z, DivisionByZeroError);
    CHECK_THROWS_AS(z.inv(), DivisionByZeroError);
}

TEST_CASE("arithmetic agrees with an exact rational shadow") {
    // every digit the scalar model claims must match the exact value
    for (long p : {3L, 5L, 7L}) {
        auto c = PrimeContext::make(p, 48);
        auto rng = derive_stream(0xabc123, {static_cast<std::uint64_t>(p)});
        for (int iter = 0; iter < 200; ++iter) {
            mpq_class qa = oracles::random_rational(rng, p, -3, 3);
            mpq_class qb = oracles::random_rational(rng, p, -3, 3);
            auto a = PadicScalar::embed(c, qa.get_num(), qa.get_den());
            auto b = PadicScalar::embed(c, qb.get_num(), qb.get_den());

            mpq_class exact;
            PadicScalar got = PadicScalar::zero(c);
            switch (iter % 4) {
                case 0: exact = qa + qb; got = a + b; break;
                case 1: exact = qa - qb; got = a - b; break;
                case 2: exact = qa * qb; got = a * b; break;
                case 3: exact = qa / qb; got = a / b; break;
            }
            if (exact == 0) {
                // the model may only claim zero-to-precision here, never a
                // wrong finite valuation; nothing further to check
                continue;
            }
            CHECK(oracles::vp_mpq(exact, p) == got.valuation());
            auto ref = PadicScalar::embed(c, exact.get_num(), exact.get_den(), 64);
            CHECK(agreement_digits(got, ref) >= got.precision());
        }
    }
}

TEST_CASE("square classes at p = 5") {
    auto c = ctx5();
    auto cls = [&](long n) { return unit_square_class(PadicScalar::embed_int(c, n)); };
    CHECK(cls(1) == SquareClass{false, false});
    CHECK(cls(2) == SquareClass{true, false});
    CHECK(cls(10) == SquareClass{true, true});
    CHECK_THROWS_AS(unit_square_class(PadicScalar::zero(c)), UsageError);
}

TEST_CASE("square class is multiplicative and kills squares") {
    for (long p : {3L, 5L, 7L, 11L}) {
        auto c = PrimeContext::make(p, 32);
        auto rng = derive_stream(77, {static_cast<std::uint64_t>(p)});
        for (int i = 0; i < 100; ++i) {
            mpq_class qa = oracles::random_rational(rng, p, -2, 2);
            mpq_class qb = oracles::random_rational(rng, p, -2, 2);
            auto a = oracles::embed_mpq(c, qa);
            auto b = oracles::embed_mpq(c, qb);
            CHECK(unit_square_class(a * b) == unit_square_class(a) * unit_square_class(b));
            CHECK(unit_square_class(a * a * b) == unit_square_class(b));
        }
    }
}

TEST_CASE("legendre via class matches residue enumeration") {
    for (long p : {3L, 5L, 7L, 11L, 13L}) {
        auto c = PrimeContext::make(p, 8);
        for (long u = 1; u < p; ++u) {
            auto cl = unit_square_class(PadicScalar::embed_int(c, u));
            CHECK((cl.unit_nonresidue ? -1 : 1) == oracles::slow_legendre(u, p));
            CHECK_FALSE(cl.odd_valuation);
        }
    }
}

TEST_CASE("hilbert symbol frozen values") {
    auto c = ctx5();
    auto e = [&](long n, long d = 1) { return PadicScalar::embed_int(c, n, d); };
    CHECK(hilbert_symbol(e(1), e(7)) == 1);
    CHECK(hilbert_symbol(e(1), e(10)) == 1);
    CHECK(hilbert_symbol(e(5), e(2)) == -1);
    CHECK(hilbert_symbol(e(2), e(5)) == -1);
}

TEST_CASE("hilbert symbol properties") {
    for (long p : {3L, 5L, 7L}) {
        auto c = PrimeContext::make(p, 32);
        auto rng = derive_stream(31337, {static_cast<std::uint64_t>(p)});
        for (int i = 0; i < 80; ++i) {
            auto a = oracles::embed_mpq(c, oracles::random_rational(rng, p, -2, 2));
            auto b = oracles::embed_mpq(c, oracles::random_rational(rng, p, -2, 2));
            auto d = oracles::embed_mpq(c, oracles::random_rational(rng, p, -2, 2));
            CHECK(hilbert_symbol(a, a.negate()) == 1);
            CHECK(hilbert_symbol(a, b) == hilbert_symbol(b, a));
            CHECK(hilbert_symbol(a * d, b) == hilbert_symbol(a, b) * hilbert_symbol(d, b));
        }
    }
}

TEST_CASE("hilbert symbol agrees with brute-force solvability mod p^6") {
    for (long p : {3L, 5L, 7L}) {
        auto c = PrimeContext::make(p, 32);
        auto rng = derive_stream(0x411b, {static_cast<std::uint64_t>(p)});
        for (int i = 0; i < 12; ++i) {
            mpq_class qa = oracles::random_rational(rng, p, -3, 3);
            mpq_class qb = oracles::random_rational(rng, p, -3, 3);
            int fast = hilbert_symbol(oracles::embed_mpq(c, qa), oracles::embed_mpq(c, qb));
            CHECK(fast == oracles::slow_hilbert(p, qa, qb));
        }
    }
}

TEST_CASE("hensel_sqrt") {
    auto c = ctx5();
    auto r = hensel_sqrt(PadicScalar::embed_int(c, 6));
    CHECK(r.leading_digit() == 1);
    CHECK(agreement_digits(r * r, PadicScalar::embed_int(c, 6)) >= c->precision);

    CHECK_THROWS_AS(hensel_sqrt(PadicScalar::embed_int(c, 2)), NotASquareError);
    CHECK_THROWS_AS(hensel_sqrt(PadicScalar::embed_int(c, 5)), NotASquareError);
    CHECK(hensel_sqrt(PadicScalar::zero(c)).is_zero());

    for (long p : {3L, 5L, 7L}) {
        auto cp = PrimeContext::make(p, 40);
        auto rng = derive_stream(4242, {static_cast<std::uint64_t>(p)});
        for (int i = 0; i < 60; ++i) {
            mpq_class q = oracles::random_rational(rng, p, -2, 2);
            auto x = oracles::embed_mpq(cp, q);
            auto sq = x * x;
            auto root = hensel_sqrt(sq);
            CHECK(root.leading_digit() <= (p - 1) / 2);
            CHECK(agreement_digits(root * root, sq) >= sq.precision());
            // root is x up to sign
            bool plus = agreement_digits(root, x) >= x.precision();
            bool minus = agreement_digits(root, x.negate()) >= x.precision();
            CHECK((plus || minus));
        }
    }
}

TEST_CASE("scalar text round trip") {
    auto c = ctx5(4);
    auto x = PadicScalar::embed_int(c, 50);
    CHECK(x.text() == "5^2 * (2 + 0*5 + 0*5^2 + 0*5^3) [prec 4]");
    CHECK(PadicScalar::parse_text(c, x.text()).identical(x));
    CHECK(PadicScalar::zero(c).text() == "0");
    CHECK(PadicScalar::parse_text(c, "0").is_zero());

    SplitMix64 rng(99);
    auto c7 = PrimeContext::make(7, 24);
    for (int i = 0; i < 50; ++i) {
        mpq_class q = oracles::random_rational(rng, 7, -3, 3);
        auto a = oracles::embed_mpq(c7, q);
        auto back = PadicScalar::parse_text(c7, a.text());
        CHECK(back.identical(a));
        CHECK(back.text() == a.text());
    }
    CHECK_THROWS_AS(PadicScalar::parse_text(c, "3^1 * (1) [prec 4]"), UsageError);
    CHECK_THROWS_AS(PadicScalar::parse_text(c, "5^1 * (7) [prec 4]"), UsageError);
}

TEST_CASE("scalar json round trip") {
    auto c = ctx5(6);
    SplitMix64 rng(1234);
    for (int i = 0; i < 50; ++i) {
        mpq_class q = oracles::random_rational(rng, 5, -3, 3);
        auto a = oracles::embed_mpq(c, q);
        auto j = a.to_json();
        CHECK(PadicScalar::from_json(c, j).identical(a));
        CHECK(PadicScalar::from_json(c, j).to_json() == j);
    }
    auto z = PadicScalar::zero(c);
    CHECK(PadicScalar::from_json(c, z.to_json()).is_zero());
    auto j = PadicScalar::embed_int(c, 3).to_json();
    j["p"] = 7;
    CHECK_THROWS_AS(PadicScalar::from_json(c, j), UsageError);
}

TEST_CASE("with_precision reinterprets exact digits") {
    auto c = ctx5(8);
    auto a = PadicScalar::embed_int(c, 126, 1, 8);
    auto wide = a.with_precision(20);
    CHECK(wide.precision() == 20);
    CHECK(wide.unit() == a.unit());  // digits above 8 are zero for this integer
    auto narrow = a.with_precision(2);
    CHECK(narrow.unit() == a.unit() % 25);
}
