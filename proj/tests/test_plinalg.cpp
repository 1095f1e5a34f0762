#include <doctest.h>

#include <vector>

#include "oracles.hpp"
#include "ppolar/plinalg.hpp"
#include "ppolar/rng.hpp"

using namespace ppolar;

namespace {

PMatrix from_rows(const Ctx& ctx, const std::vector<std::vector<mpq_class>>& rows) {
    PMatrix m(ctx, rows.size(), rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) m.at(i, j) = oracles::embed_mpq(ctx, rows[i][j]);
    return m;
}

std::vector<std::vector<mpq_class>> random_invertible(SplitMix64& rng, long p, size_t n) {
    for (;;) {
        std::vector<std::vector<mpq_class>> m(n, std::vector<mpq_class>(n));
        for (auto& row : m)
            for (auto& x : row) x = oracles::random_rational(rng, p, -3, 3);
        if (oracles::det_mpq(m) != 0) return m;
    }
}

bool is_permutation_matrix(const PMatrix& m) {
    if (!m.square()) return false;
    PadicScalar one = PadicScalar::one(m.ctx());
    for (size_t i = 0; i < m.rows(); ++i) {
        size_t hits = 0;
        for (size_t j = 0; j < m.cols(); ++j) {
            if (m.at(i, j).is_zero()) continue;
            if (agreement_digits(m.at(i, j), one) < m.at(i, j).precision()) return false;
            ++hits;
        }
        if (hits != 1) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("matrix product and inverse against exact rationals") {
    auto ctx = PrimeContext::make(5);
    auto rng = derive_stream(0x91a7, {1});
    for (int iter = 0; iter < 40; ++iter) {
        auto a = random_invertible(rng, 5, 3);
        auto b = random_invertible(rng, 5, 3);
        PMatrix A = from_rows(ctx, a), B = from_rows(ctx, b);
        PMatrix C = A * B;
        for (size_t i = 0; i < 3; ++i)
            for (size_t j = 0; j < 3; ++j) {
                mpq_class s = 0;
                for (size_t k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
                if (s == 0) {
                    CHECK(C.at(i, j).is_zero());
                } else {
                    CHECK(C.at(i, j).valuation() == oracles::vp_mpq(s, 5));
                    CHECK(agreement_digits(C.at(i, j), oracles::embed_mpq(ctx, s)) >=
                          C.at(i, j).precision());
                }
            }
        CHECK(A.determinant().valuation() == oracles::vp_mpq(oracles::det_mpq(a), 5));
        PMatrix prod = A * A.inverse();
        CHECK(matrix_agreement_digits(prod, PMatrix::identity(ctx, 3)) >= ctx->precision - 6);
    }
}

TEST_CASE("exact cancellation mid-elimination stays computable") {
    // det = -1 but elimination walks through a true 1 - 1 = 0
    auto ctx = PrimeContext::make(5);
    PMatrix m = from_rows(ctx, {{1, 1, 0}, {1, 1, 1}, {0, 1, 1}});
    CHECK(m.determinant().valuation() == 0);
    CHECK(m.is_integral_unit());
    PMatrix prod = m * m.inverse();
    CHECK(matrix_agreement_digits(prod, PMatrix::identity(ctx, 3)) >= ctx->precision - 4);
}

TEST_CASE("integral unit predicate") {
    auto ctx = PrimeContext::make(5);
    CHECK(PMatrix::identity(ctx, 3).is_integral_unit());
    PMatrix d = from_rows(ctx, {{5, 0}, {0, 1}});
    CHECK_FALSE(d.is_integral_unit());  // det valuation 1
    // entries are 5-adic integers, det = -1 a unit
    PMatrix h = from_rows(ctx, {{1, mpq_class(1, 2)}, {1, mpq_class(-1, 2)}});
    CHECK(h.is_integral_unit());
    PMatrix f = from_rows(ctx, {{mpq_class(1, 5), 0}, {0, 1}});
    CHECK_FALSE(f.is_integral_unit());  // non-integral entry
}

TEST_CASE("singular matrix reports no pivot") {
    auto ctx = PrimeContext::make(5);
    PMatrix z(ctx, 2, 2);
    CHECK(z.determinant().is_zero());
    CHECK_THROWS_AS(z.inverse(), SingularToPrecisionError);
    PMatrix s = from_rows(ctx, {{1, 1}, {1, 1}});
    CHECK(s.determinant().is_zero());
    CHECK_THROWS_AS(s.inverse(), SingularToPrecisionError);
}

TEST_CASE("plu elimination: frozen and random") {
    auto ctx = PrimeContext::make(5);

    PLUFactors id = plu_eliminate(PMatrix::identity(ctx, 3));
    CHECK(id.perm == std::vector<size_t>{0, 1, 2});
    CHECK(id.lower.identical(PMatrix::identity(ctx, 3)));
    CHECK(id.upper.identical(PMatrix::identity(ctx, 3)));

    // unit pivot below forces the row swap; both factors stay integral
    PMatrix m = from_rows(ctx, {{5, 1}, {1, 1}});
    PLUFactors f = plu_eliminate(m);
    CHECK(f.perm == std::vector<size_t>{1, 0});
    CHECK(f.lower.is_integral());
    CHECK(f.upper.is_integral());
    PMatrix pm = f.permuted_input();
    for (size_t i = 0; i < 2; ++i)
        for (size_t j = 0; j < 2; ++j) CHECK(pm.at(i, j).identical(m.at(f.perm[i], j)));

    auto rng = derive_stream(0x91a7, {2});
    for (int iter = 0; iter < 60; ++iter) {
        long p = (iter % 2) ? 3 : 7;
        auto c2 = PrimeContext::make(p);
        size_t n = 1 + rng.below(4);
        PMatrix g = from_rows(c2, random_invertible(rng, p, n));
        PLUFactors lu = plu_eliminate(g);
        // unit lower-triangular
        for (size_t i = 0; i < n; ++i) {
            CHECK(lu.lower.at(i, i).identical(PadicScalar::one(c2)));
            for (size_t j = i + 1; j < n; ++j) CHECK(lu.lower.at(i, j).is_zero());
            for (size_t j = 0; j < i; ++j) CHECK(lu.upper.at(i, j).is_zero());
        }
        PMatrix rec = lu.permuted_input();
        PMatrix want(c2, n, n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) want.at(i, j) = g.at(lu.perm[i], j);
        CHECK(matrix_agreement_digits(rec, want) >= c2->precision - 6);
    }
}

TEST_CASE("plu keeps factors integral on integral input") {
    auto rng = derive_stream(0x91a7, {3});
    for (int iter = 0; iter < 40; ++iter) {
        long p = 3 + 2 * (iter % 3 == 2 ? 2 : iter % 3);  // 3, 5, 7
        auto ctx = PrimeContext::make(p);
        size_t n = 2 + rng.below(3);
        std::vector<std::vector<mpq_class>> m(n, std::vector<mpq_class>(n));
        for (auto& row : m)
            for (auto& x : row) x = mpz_class(rng.range(-40, 41));
        if (oracles::det_mpq(m) == 0) continue;
        PLUFactors lu = plu_eliminate(from_rows(ctx, m));
        CHECK(lu.lower.is_integral());
        CHECK(lu.upper.is_integral());
    }
}

TEST_CASE("smith decomposition: frozen examples") {
    auto ctx = PrimeContext::make(5);

    CartanFactors id = smith_cartan(PMatrix::identity(ctx, 3));
    CHECK(id.exponents == std::vector<long>{0, 0, 0});
    CHECK(id.k1.identical(PMatrix::identity(ctx, 3)));
    CHECK(id.k2.identical(PMatrix::identity(ctx, 3)));

    CartanFactors d = smith_cartan(from_rows(ctx, {{25, 0}, {0, 1}}));
    CHECK(d.exponents == std::vector<long>{0, 2});
    CHECK(is_permutation_matrix(d.k1));
    CHECK(is_permutation_matrix(d.k2));

    PMatrix g = from_rows(ctx, {{5, 0}, {1, 1}});
    CartanFactors f = smith_cartan(g);
    CHECK(f.exponents == std::vector<long>{0, 1});
    CHECK(f.k1.is_integral_unit());
    CHECK(f.k2.is_integral_unit());
    CHECK(g.identical(f.reconstruct()));  // exact data reconstructs exactly here

    CartanFactors r = smith_cartan(g, false);
    CHECK(r.exponents == std::vector<long>{1, 0});
    CHECK(r.k1.is_integral_unit());
    CHECK(r.k2.is_integral_unit());
    CHECK(g.identical(r.reconstruct()));
}

TEST_CASE("smith round trip on random invertible matrices") {
    auto rng = derive_stream(0x91a7, {4});
    const long primes[] = {3, 5, 7};
    for (int iter = 0; iter < 150; ++iter) {
        long p = primes[iter % 3];
        auto ctx = PrimeContext::make(p);
        size_t n = 1 + rng.below(5);
        PMatrix g = from_rows(ctx, random_invertible(rng, p, n));
        CartanFactors f = smith_cartan(g);
        CHECK(f.k1.is_integral_unit());
        CHECK(f.k2.is_integral_unit());
        for (size_t i = 1; i < n; ++i) CHECK(f.exponents[i - 1] <= f.exponents[i]);
        CHECK(matrix_agreement_digits(g, f.reconstruct()) >= ctx->precision - 8);
    }
}

TEST_CASE("smith exponents match the minor-gcd oracle") {
    auto rng = derive_stream(0x91a7, {5});
    const long primes[] = {3, 5, 7};
    int done = 0;
    while (done < 200) {
        long p = primes[rng.below(3)];
        auto ctx = PrimeContext::make(p);
        size_t n = 1 + rng.below(3);
        const mpq_class pool[] = {0, 1, -1, mpq_class(p), mpq_class(-p), mpq_class(p * p),
                                  mpq_class(-p * p)};
        std::vector<std::vector<mpq_class>> m(n, std::vector<mpq_class>(n));
        for (auto& row : m)
            for (auto& x : row) x = pool[rng.below(7)];
        if (oracles::det_mpq(m) == 0) continue;
        CartanFactors f = smith_cartan(from_rows(ctx, m));
        CHECK(f.exponents == oracles::minor_gcd_exponents(m, p));
        ++done;
    }
}

TEST_CASE("lattice hermite form") {
    auto ctx = PrimeContext::make(5);

    CHECK(hnf_lattice(PMatrix::identity(ctx, 3)).identical(PMatrix::identity(ctx, 3)));

    // columns p*e1 and e1+e2: already reduced
    PMatrix g = from_rows(ctx, {{5, 1}, {0, 1}});
    PMatrix h = hnf_lattice(g);
    CHECK(h.identical(g));
    CHECK(hnf_lattice(h).identical(h));

    // columns (p,1) and (0,1) span the diagonal lattice diag(p,1)
    PMatrix q = hnf_lattice(from_rows(ctx, {{5, 0}, {1, 1}}));
    CHECK(q.identical(from_rows(ctx, {{5, 0}, {0, 1}})));

    CHECK_THROWS_AS(hnf_lattice(from_rows(ctx, {{1, 1}, {1, 1}})), RankDeficientError);
    CHECK_THROWS_AS(hnf_lattice(PMatrix(ctx, 2, 1)), RankDeficientError);
}

TEST_CASE("hermite form is generator-independent") {
    auto rng = derive_stream(0x91a7, {6});
    const long primes[] = {3, 5, 7};
    for (int iter = 0; iter < 60; ++iter) {
        long p = primes[iter % 3];
        auto ctx = PrimeContext::make(p);
        size_t n = 1 + rng.below(4);
        PMatrix g = from_rows(ctx, random_invertible(rng, p, n));
        PMatrix h = hnf_lattice(g);

        // canonical shape: upper triangular, p-power diagonal, reduced entries
        for (size_t i = 0; i < n; ++i) {
            CHECK(h.at(i, i).unit() == 1);
            for (size_t r = i + 1; r < n; ++r) CHECK(h.at(r, i).is_zero());
            for (size_t j = i + 1; j < n; ++j) {
                const auto& x = h.at(i, j);
                if (!x.is_zero()) CHECK(x.abs_precision() >= h.at(i, i).valuation());
                if (!x.is_zero()) CHECK(x.valuation() < h.at(i, i).valuation());
            }
        }
        CHECK(hnf_lattice(h).identical(h));

        // right multiplication by a unimodular matrix fixes the lattice
        PMatrix u(ctx, n, n);
        for (;;) {
            std::vector<std::vector<mpq_class>> um(n, std::vector<mpq_class>(n));
            for (auto& row : um)
                for (auto& x : row) x = mpz_class(rng.range(-p * p, p * p + 1));
            u = from_rows(ctx, um);
            if (oracles::det_mpq(um) != 0 && u.is_integral_unit()) break;
        }
        CHECK(hnf_lattice(g * u).identical(h));

        // redundant extra generator column changes nothing
        PMatrix wide(ctx, n, n + 1);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) wide.at(i, j) = g.at(i, j);
        std::vector<PadicScalar> comb(n, PadicScalar::zero(ctx));
        for (size_t j = 0; j < n; ++j) comb[j] = PadicScalar::embed_int(ctx, rng.range(0, p));
        auto extra = g.apply(comb);
        for (size_t i = 0; i < n; ++i) wide.at(i, n) = extra[i];
        CHECK(hnf_lattice(wide).identical(h));
    }
}

TEST_CASE("ultrametric norms and simultaneous diagonalization") {
    auto ctx = PrimeContext::make(5);
    UltraNorm sup = UltraNorm::sup_norm(ctx, 2);

    std::vector<PadicScalar> x = {PadicScalar::embed_int(ctx, 25), PadicScalar::embed_int(ctx, 3)};
    CHECK(sup.evaluate_log(x) == 0);
    std::vector<PadicScalar> y = {PadicScalar::embed_int(ctx, 25),
                                  PadicScalar::embed_int(ctx, 125)};
    CHECK(sup.evaluate_log(y) == -2);
    std::vector<PadicScalar> z = {PadicScalar::zero(ctx), PadicScalar::zero(ctx)};
    CHECK(sup.evaluate_log(z) == -kInfValuation);

    // same norm written in the effective basis with flat weights
    UltraNorm scaled{PMatrix::identity(ctx, 2), {-1, 0}};
    UltraNorm flat{scaled.effective_basis(), {0, 0}};
    auto rng = derive_stream(0x91a7, {7});
    for (int iter = 0; iter < 30; ++iter) {
        std::vector<PadicScalar> v = {
            oracles::embed_mpq(ctx, oracles::random_rational(rng, 5, -2, 2)),
            oracles::embed_mpq(ctx, oracles::random_rational(rng, 5, -2, 2))};
        CHECK(scaled.evaluate_log(v) == flat.evaluate_log(v));
    }

    NormPairDiagonal same = diagonalize_norm_pair(sup, sup);
    CHECK(same.w1 == std::vector<long>{0, 0});
    CHECK(same.w2 == std::vector<long>{0, 0});

    NormPairDiagonal easy = diagonalize_norm_pair(sup, scaled);
    CHECK(easy.w1 == std::vector<long>{0, 0});
    CHECK(easy.w2 == std::vector<long>{-1, 0});

    UltraNorm skew{from_rows(ctx, {{5, 0}, {1, 1}}), {0, 0}};
    NormPairDiagonal pair = diagonalize_norm_pair(sup, skew);
    CHECK(pair.w2 == std::vector<long>{0, 1});
    UltraNorm o1{pair.basis, pair.w1};
    UltraNorm o2{pair.basis, pair.w2};
    for (int iter = 0; iter < 40; ++iter) {
        std::vector<PadicScalar> v = {
            oracles::embed_mpq(ctx, oracles::random_rational(rng, 5, -2, 2)),
            oracles::embed_mpq(ctx, oracles::random_rational(rng, 5, -2, 2))};
        CHECK(o1.evaluate_log(v) == sup.evaluate_log(v));
        CHECK(o2.evaluate_log(v) == skew.evaluate_log(v));
    }
}

TEST_CASE("centered exponent geometry") {
    CHECK(centered_sq_times_n({0, 1}) == 1);
    CHECK(centered_sq_times_n({3, 3, 3}) == 0);
    CHECK(centered_sq_times_n({2, 3}) == centered_sq_times_n({0, 1}));  // shift invariance
    CHECK(centered_sq_times_n({0, 1, 2}) == 6);
    CHECK(centered_norm({0, 1}) == doctest::Approx(std::sqrt(0.5)));
    CHECK(centered_norm({1, 1}) == 0.0);
}

TEST_CASE("cartan factors serialize") {
    auto ctx = PrimeContext::make(5);
    CartanFactors f = smith_cartan(from_rows(ctx, {{5, 0}, {1, 1}}));
    nlohmann::json j = f.to_json();
    CHECK(j["exponents"] == nlohmann::json({0, 1}));
    PMatrix k1 = PMatrix::from_json(ctx, j["k1"]);
    CHECK(k1.identical(f.k1));
}
