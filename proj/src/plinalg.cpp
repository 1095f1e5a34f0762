#include "ppolar/plinalg.hpp"

#include <algorithm>
#include <cmath>

namespace ppolar {

PMatrix CartanFactors::reconstruct() const {
    return k1 * PMatrix::diagonal_p_powers(k1.ctx(), exponents) * k2;
}

nlohmann::json CartanFactors::to_json() const {
    nlohmann::json j;
    j["k1"] = k1.to_json();
    j["exponents"] = exponents;
    j["k2"] = k2.to_json();
    return j;
}

CartanFactors smith_cartan(const PMatrix& g, bool increasing) {
    if (!g.square()) throw UsageError("smith elimination needs a square matrix");
    const Ctx& ctx = g.ctx();
    const size_t n = g.rows();
    PMatrix a = g;
    PMatrix k1 = PMatrix::identity(ctx, n);
    PMatrix k2 = PMatrix::identity(ctx, n);
    std::vector<long> e(n, 0);

    for (size_t t = 0; t < n; ++t) {
        // global min-valuation pivot in the trailing block; ties broken by
        // lowest row, then lowest column
        size_t pr = n, pc = n;
        long best = kInfValuation;
        for (size_t r = t; r < n; ++r)
            for (size_t c = t; c < n; ++c) {
                const auto& x = a.at(r, c);
                if (!x.is_zero() && x.valuation() < best) {
                    best = x.valuation();
                    pr = r;
                    pc = c;
                }
            }
        if (pr == n) throw SingularToPrecisionError("no pivot left in smith elimination");

        if (pr != t) {  // row swap on a <-> column swap on k1
            for (size_t j = 0; j < n; ++j) std::swap(a.at(t, j), a.at(pr, j));
            for (size_t i = 0; i < n; ++i) std::swap(k1.at(i, t), k1.at(i, pr));
        }
        if (pc != t) {  // column swap on a <-> row swap on k2
            for (size_t i = 0; i < n; ++i) std::swap(a.at(i, t), a.at(i, pc));
            for (size_t j = 0; j < n; ++j) std::swap(k2.at(t, j), k2.at(pc, j));
        }

        // absorb the pivot unit into k1 so the diagonal entry is exactly p^e
        e[t] = a.at(t, t).valuation();
        PadicScalar u = PadicScalar::from_unit(ctx, 0, a.at(t, t).unit(), a.at(t, t).precision());
        PadicScalar uinv = u.inv();
        for (size_t j = t + 1; j < n; ++j)
            if (!a.at(t, j).is_zero()) a.at(t, j) = a.at(t, j) * uinv;
        a.at(t, t) = PadicScalar::from_unit(ctx, e[t], 1, a.at(t, t).precision());
        for (size_t i = 0; i < n; ++i)
            if (!k1.at(i, t).is_zero()) k1.at(i, t) = k1.at(i, t) * u;

        // clear below the pivot; multipliers lie in O because the pivot
        // valuation is minimal
        for (size_t r = t + 1; r < n; ++r) {
            if (a.at(r, t).is_zero()) continue;
            PadicScalar m = a.at(r, t).mul_p_power(-e[t]);
            PadicScalar neg = m.negate();
            for (size_t j = t + 1; j < n; ++j)
                a.at(r, j) = collapsed_add_mul(a.at(r, j), neg, a.at(t, j));
            a.at(r, t) = PadicScalar::zero(ctx);
            for (size_t i = 0; i < n; ++i)
                k1.at(i, t) = collapsed_add_mul(k1.at(i, t), m, k1.at(i, r));
        }
        // clear to the right; the column below the pivot is already zero, so
        // only the row-t entry changes
        for (size_t c = t + 1; c < n; ++c) {
            if (a.at(t, c).is_zero()) continue;
            PadicScalar m = a.at(t, c).mul_p_power(-e[t]);
            a.at(t, c) = PadicScalar::zero(ctx);
            for (size_t j = 0; j < n; ++j)
                k2.at(t, j) = collapsed_add_mul(k2.at(t, j), m, k2.at(c, j));
        }
    }

    if (!increasing) {
        std::reverse(e.begin(), e.end());
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n / 2; ++j) std::swap(k1.at(i, j), k1.at(i, n - 1 - j));
        for (size_t i = 0; i < n / 2; ++i)
            for (size_t j = 0; j < n; ++j) std::swap(k2.at(i, j), k2.at(n - 1 - i, j));
    }
    return {std::move(k1), std::move(e), std::move(k2)};
}

PMatrix PLUFactors::permuted_input() const { return lower * upper; }

PLUFactors plu_eliminate(const PMatrix& m) {
    if (!m.square()) throw UsageError("plu elimination needs a square matrix");
    const Ctx& ctx = m.ctx();
    const size_t n = m.rows();
    PMatrix u = m;
    PMatrix l = PMatrix::identity(ctx, n);
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;

    for (size_t t = 0; t < n; ++t) {
        size_t pick = n;
        long best = kInfValuation;
        for (size_t r = t; r < n; ++r) {
            const auto& x = u.at(r, t);
            if (!x.is_zero() && x.valuation() < best) {
                best = x.valuation();
                pick = r;
            }
        }
        if (pick == n) throw SingularToPrecisionError("no pivot in plu elimination");
        if (pick != t) {
            std::swap(perm[t], perm[pick]);
            for (size_t j = 0; j < n; ++j) std::swap(u.at(t, j), u.at(pick, j));
            for (size_t j = 0; j < t; ++j) std::swap(l.at(t, j), l.at(pick, j));
        }
        for (size_t r = t + 1; r < n; ++r) {
            if (u.at(r, t).is_zero()) continue;
            PadicScalar mul = u.at(r, t) / u.at(t, t);  // in O: pivot has min valuation
            l.at(r, t) = mul;
            PadicScalar neg = mul.negate();
            for (size_t j = t + 1; j < n; ++j)
                u.at(r, j) = collapsed_add_mul(u.at(r, j), neg, u.at(t, j));
            u.at(r, t) = PadicScalar::zero(ctx);
        }
    }
    return {std::move(perm), std::move(l), std::move(u)};
}

namespace {

// digits of x strictly below p^e — the canonical residue mod p^e
PadicScalar truncate_below(const Ctx& ctx, const PadicScalar& x, long e) {
    if (x.is_zero() || x.valuation() >= e) return PadicScalar::zero(ctx);
    if (x.abs_precision() < e)
        throw InsufficientPrecisionError("hermite reduction below the known digits");
    mpz_class r = x.unit() % ctx->pow_p(e - x.valuation());
    return PadicScalar::from_unit(ctx, x.valuation(), r, ctx->precision);
}

}  // namespace

PMatrix hnf_lattice(const PMatrix& gens) {
    const Ctx& ctx = gens.ctx();
    const size_t n = gens.rows();
    const size_t m = gens.cols();
    if (m < n) throw RankDeficientError("fewer generators than the dimension");
    PMatrix w = gens;
    std::vector<bool> used(m, false);
    std::vector<size_t> pivot_col(n, m);

    // bottom-up: each row claims a min-valuation pivot column, that row is
    // cleared from every still-free column
    for (size_t i = n; i-- > 0;) {
        size_t pick = m;
        long best = kInfValuation;
        for (size_t c = 0; c < m; ++c) {
            if (used[c]) continue;
            const auto& x = w.at(i, c);
            if (!x.is_zero() && x.valuation() < best) {
                best = x.valuation();
                pick = c;
            }
        }
        if (pick == m) throw RankDeficientError("generators do not span a full lattice");
        used[pick] = true;
        pivot_col[i] = pick;

        // unit-normalize the pivot column (rows below i are already zero)
        PadicScalar piv = w.at(i, pick);
        PadicScalar uinv = PadicScalar::from_unit(ctx, 0, piv.unit(), piv.precision()).inv();
        for (size_t r = 0; r < i; ++r)
            if (!w.at(r, pick).is_zero()) w.at(r, pick) = w.at(r, pick) * uinv;
        w.at(i, pick) = PadicScalar::from_unit(ctx, piv.valuation(), 1, piv.precision());

        for (size_t c = 0; c < m; ++c) {
            if (used[c] || w.at(i, c).is_zero()) continue;
            PadicScalar mul = w.at(i, c).mul_p_power(-piv.valuation()).negate();  // in O
            for (size_t r = 0; r < i; ++r)
                w.at(r, c) = collapsed_add_mul(w.at(r, c), mul, w.at(r, pick));
            w.at(i, c) = PadicScalar::zero(ctx);
        }
    }

    PMatrix h(ctx, n, n);
    for (size_t j = 0; j < n; ++j)
        for (size_t r = 0; r < n; ++r) h.at(r, j) = w.at(r, pivot_col[j]);
    // the diagonal is exactly p^e by construction; store it at canonical
    // precision so equal lattices give bitwise-equal forms
    for (size_t i = 0; i < n; ++i)
        h.at(i, i) = PadicScalar::from_unit(ctx, h.at(i, i).valuation(), 1, ctx->precision);

    // reduction pass: entry (i, j), j > i, becomes its canonical residue mod
    // the diagonal p-power of row i; subtracting the correction times column
    // i only touches rows above i
    PadicScalar minus_one = PadicScalar::one(ctx).negate();
    for (size_t j = 1; j < n; ++j)
        for (size_t i = j; i-- > 0;) {
            const PadicScalar x = h.at(i, j);
            if (x.is_zero()) continue;
            long ei = h.at(i, i).valuation();
            PadicScalar res = truncate_below(ctx, x, ei);
            PadicScalar c = collapsed_add_mul(x, minus_one, res).mul_p_power(-ei);
            if (!c.is_zero()) {
                PadicScalar neg = c.negate();
                for (size_t r = 0; r < i; ++r)
                    h.at(r, j) = collapsed_add_mul(h.at(r, j), neg, h.at(r, i));
            }
            h.at(i, j) = res;
        }
    return h;
}

UltraNorm UltraNorm::sup_norm(const Ctx& ctx, size_t n) {
    return {PMatrix::identity(ctx, n), std::vector<long>(n, 0)};
}

long UltraNorm::evaluate_log(const std::vector<PadicScalar>& x) const {
    if (weights.size() != basis.rows() || !basis.square())
        throw UsageError("malformed ultrametric norm");
    std::vector<PadicScalar> c = basis.inverse().apply(x);
    long best = -kInfValuation;
    for (size_t i = 0; i < c.size(); ++i)
        if (!c[i].is_zero()) best = std::max(best, weights[i] - c[i].valuation());
    return best;
}

PMatrix UltraNorm::effective_basis() const {
    return basis * PMatrix::diagonal_p_powers(basis.ctx(), weights);
}

NormPairDiagonal diagonalize_norm_pair(const UltraNorm& n1, const UltraNorm& n2) {
    if (n1.basis.ctx()->p != n2.basis.ctx()->p || n1.basis.rows() != n2.basis.rows())
        throw UsageError("norms live on different spaces");
    PMatrix b1 = n1.effective_basis();
    PMatrix b2 = n2.effective_basis();
    CartanFactors cf = smith_cartan(b1.inverse() * b2);
    PMatrix basis = b1 * cf.k1;
    return {std::move(basis), std::vector<long>(n1.basis.rows(), 0), cf.exponents};
}

long centered_sq_times_n(const std::vector<long>& a) {
    long n = static_cast<long>(a.size()), s = 0, q = 0;
    for (long x : a) {
        s += x;
        q += x * x;
    }
    return n * q - s * s;
}

double centered_norm(const std::vector<long>& a) {
    if (a.empty()) return 0.0;
    return std::sqrt(static_cast<double>(centered_sq_times_n(a)) / static_cast<double>(a.size()));
}

}  // namespace ppolar
