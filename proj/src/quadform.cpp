#include "ppolar/quadform.hpp"

#include <algorithm>
#include <optional>
#include <utility>

namespace ppolar {

namespace {

PadicScalar entry_sum(const Ctx& ctx, const std::vector<PadicScalar>& terms) {
    SumResult r = sum_scalars_detail(ctx, terms);
    return r.cancelled_to_precision ? PadicScalar::zero(ctx) : r.value;
}

// lowest-index unit diagonal entry, else lexicographically first unit
// off-diagonal pair; the gram block must already have minimum valuation 0
std::pair<size_t, size_t> pick_unit_pivot(const PMatrix& b) {
    const size_t n = b.rows();
    for (size_t i = 0; i < n; ++i)
        if (!b.at(i, i).is_zero() && b.at(i, i).valuation() == 0) return {i, i};
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (!b.at(i, j).is_zero() && b.at(i, j).valuation() == 0) return {i, j};
    throw InternalInvariantError("no unit entry in a scaled gram block");
}

// u^T b u = diag(d) with u in GL(n, O): scale the block to minimum valuation
// zero, move a unit value to the corner (q(e_i) or q(e_i + e_j), the latter a
// unit because p != 2), clear the first row and column with integral
// multipliers, recurse on the complement
std::pair<PMatrix, std::vector<PadicScalar>> diag_sup_gram(const PMatrix& bin) {
    const Ctx& ctx = bin.ctx();
    const size_t n = bin.rows();
    long scale = bin.min_valuation();
    if (scale == kInfValuation) throw DegenerateFormError("zero gram block");
    PMatrix b = bin.mul_p_power(-scale);
    auto [pi, pj] = pick_unit_pivot(b);

    PMatrix m(ctx, n, n);
    m.at(pi, 0) = PadicScalar::one(ctx);
    m.at(pj, 0) = PadicScalar::one(ctx);
    size_t col = 1;
    for (size_t k = 0; k < n; ++k) {
        if (k == pj) continue;  // drop e_j (equals e_i in the diagonal case)
        m.at(k, col) = PadicScalar::one(ctx);
        ++col;
    }

    PMatrix b1 = m.transpose() * b * m;
    if (n == 1) return {std::move(m), {b1.at(0, 0).mul_p_power(scale)}};

    PMatrix nm = PMatrix::identity(ctx, n);
    const PadicScalar q0 = b1.at(0, 0);
    for (size_t k = 1; k < n; ++k)
        if (!b1.at(0, k).is_zero()) nm.at(0, k) = (b1.at(0, k) / q0).negate();
    PMatrix b2 = nm.transpose() * b1 * nm;

    PMatrix sub(ctx, n - 1, n - 1);
    for (size_t i = 1; i < n; ++i)
        for (size_t j = 1; j < n; ++j) sub.at(i - 1, j - 1) = b2.at(i, j);
    auto [usub, dsub] = diag_sup_gram(sub);

    PMatrix blk = PMatrix::identity(ctx, n);
    for (size_t i = 0; i + 1 < n; ++i)
        for (size_t j = 0; j + 1 < n; ++j) blk.at(i + 1, j + 1) = usub.at(i, j);

    std::vector<PadicScalar> d;
    d.reserve(n);
    d.push_back(q0.mul_p_power(scale));
    for (const auto& x : dsub) d.push_back(x.mul_p_power(scale));
    return {m * nm * blk, std::move(d)};
}

}  // namespace

nlohmann::json FormInvariants::to_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    j["disc"] = {{"unit_class", disc.unit_nonresidue}, {"parity", disc.odd_valuation ? 1 : 0}};
    j["hasse"] = hasse;
    return j;
}

QuadraticForm::QuadraticForm(PMatrix gram) : gram_(std::move(gram)) {
    if (!gram_.square()) throw UsageError("gram matrix must be square");
    const size_t n = gram_.rows();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            long ad = agreement_digits(gram_.at(i, j), gram_.at(j, i));
            long need = std::min(gram_.at(i, j).precision(), gram_.at(j, i).precision());
            if (ad != kInfValuation && ad < need)
                throw UsageError("gram matrix must be symmetric");
        }
    PadicScalar det = gram_.determinant();
    if (det.is_zero()) throw DegenerateFormError("gram determinant vanishes to precision");
    auto [u, d] = diag_sup_gram(gram_);
    (void)u;
    int eps = 1;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) eps *= hilbert_symbol(d[i], d[j]);
    inv_ = {n, unit_square_class(det), eps};
}

QuadraticForm QuadraticForm::diagonal_form(const Ctx& ctx, const std::vector<PadicScalar>& d) {
    return QuadraticForm(PMatrix::diagonal(ctx, d));
}

QuadraticForm QuadraticForm::standard(const Ctx& ctx, size_t n) {
    return QuadraticForm(PMatrix::identity(ctx, n));
}

PadicScalar QuadraticForm::evaluate(const std::vector<PadicScalar>& x) const {
    return bilinear(x, x);
}

PadicScalar QuadraticForm::bilinear(const std::vector<PadicScalar>& x,
                                    const std::vector<PadicScalar>& y) const {
    const size_t n = dim();
    if (x.size() != n || y.size() != n) throw UsageError("vector dimension mismatch");
    std::vector<PadicScalar> terms;
    for (size_t i = 0; i < n; ++i) {
        if (x[i].is_zero()) continue;
        for (size_t j = 0; j < n; ++j) {
            if (y[j].is_zero() || gram_.at(i, j).is_zero()) continue;
            terms.push_back(gram_.at(i, j) * x[i] * y[j]);
        }
    }
    return entry_sum(ctx(), terms);
}

QuadraticForm QuadraticForm::congruent(const PMatrix& g) const {
    return QuadraticForm(g.transpose() * gram_ * g);
}

nlohmann::json QuadraticForm::to_json() const {
    nlohmann::json j;
    j["p"] = ctx()->p;
    j["gram"] = gram_.to_json();
    return j;
}

QuadraticForm QuadraticForm::from_json(const Ctx& ctx, const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("p") || !j.contains("gram"))
        throw UsageError("form json: missing fields");
    if (j["p"].get<long>() != ctx->p) throw UsageError("form json: prime mismatch");
    return QuadraticForm(PMatrix::from_json(ctx, j["gram"]));
}

MaxVector find_max_vector(const QuadraticForm& q) {
    const Ctx& ctx = q.ctx();
    long scale = q.gram().min_valuation();
    PMatrix b = q.gram().mul_p_power(-scale);
    auto [i, j] = pick_unit_pivot(b);
    std::vector<PadicScalar> e(q.dim(), PadicScalar::zero(ctx));
    e[i] = PadicScalar::one(ctx);
    e[j] = PadicScalar::one(ctx);
    return {std::move(e), scale};
}

SupDiagonalization diagonalize_sup(const QuadraticForm& q) {
    auto [u, d] = diag_sup_gram(q.gram());
    return {std::move(u), std::move(d)};
}

SquareClassSplit square_class_split(const std::vector<PadicScalar>& d) {
    SquareClassSplit out;
    out.s.reserve(d.size());
    out.t.reserve(d.size());
    for (const auto& x : d) {
        if (x.is_zero()) throw UsageError("square class split of zero");
        SquareClass c = unit_square_class(x);
        out.s.push_back(c);
        out.t.push_back(hensel_sqrt(x / class_representative(x.ctx(), c)));
    }
    return out;
}

FormInvariants form_invariants(const QuadraticForm& q) { return q.invariants(); }

bool represents_diag(const Ctx& ctx, const std::vector<PadicScalar>& d, const PadicScalar& c) {
    if (c.is_zero()) throw UsageError("representation target must be nonzero");
    const size_t n = d.size();
    if (n == 0) return false;
    for (const auto& x : d)
        if (x.is_zero()) throw UsageError("degenerate diagonal form");
    if (n == 1) return unit_square_class(c) == unit_square_class(d[0]);
    if (n >= 4) return true;
    PadicScalar prod = PadicScalar::one(ctx);
    for (const auto& x : d) prod = prod * x;
    if (n == 2)  // binary form represents c iff (c, -disc) equals the Hasse symbol
        return hilbert_symbol(c, prod.negate()) == hilbert_symbol(d[0], d[1]);
    // ternary: represents everything outside the class of -disc; inside it,
    // exactly when the form is isotropic
    if (!(unit_square_class(c) == unit_square_class(prod.negate()))) return true;
    int eps = hilbert_symbol(d[0], d[1]) * hilbert_symbol(d[0], d[2]) * hilbert_symbol(d[1], d[2]);
    return hilbert_symbol(PadicScalar::one(ctx).negate(), prod.negate()) == eps;
}

namespace {

// exact solutions of u_0 x_0^2 (+ u_1 x_1^2) = t over unit coefficients and a
// unit target, written into out at the listed global positions.  A binary
// unit form represents every unit, so with two coefficients this cannot fail.
bool try_unit_target(const Ctx& ctx, const std::vector<size_t>& idx,
                     const std::vector<PadicScalar>& u, const PadicScalar& t,
                     std::vector<PadicScalar>& out) {
    if (idx.empty()) return false;
    if (unit_square_class(t / u[0]).trivial()) {
        out[idx[0]] = hensel_sqrt(t / u[0]);
        return true;
    }
    if (idx.size() == 1) return false;
    if (unit_square_class(t / u[1]).trivial()) {
        out[idx[1]] = hensel_sqrt(t / u[1]);
        return true;
    }
    // both coordinates of a true solution are units mod p here: sweep the
    // residue of x_1, the leftover is then a unit square times u_0
    PadicScalar minus_one = PadicScalar::one(ctx).negate();
    for (long r = 1; r < ctx->p; ++r) {
        PadicScalar x1 = PadicScalar::embed_int(ctx, r);
        PadicScalar rem = collapsed_add_mul(t, minus_one, u[1] * x1 * x1);
        if (rem.is_zero() || rem.valuation() != 0) continue;
        PadicScalar arg = rem / u[0];
        if (!unit_square_class(arg).trivial()) continue;
        out[idx[0]] = hensel_sqrt(arg);
        out[idx[1]] = x1;
        return true;
    }
    throw InternalInvariantError("binary unit form failed to represent a unit");
}

bool unit_diag_isotropic(const std::vector<PadicScalar>& w) {
    if (w.size() >= 3) return true;  // rank-3 unit forms are isotropic, p odd
    if (w.size() < 2) return false;
    return unit_square_class((w[0] * w[1]).negate()).trivial();
}

// y with sum w_i y_i^2 = c for an isotropic unit diagonal form: build an
// exact isotropic vector v with v_{i0} = 1, then q(t v + e_{i0}) is linear
// in t and any target is one exact division away
std::vector<PadicScalar> universal_solve(const Ctx& ctx, const std::vector<PadicScalar>& w,
                                         const PadicScalar& c) {
    const size_t s = w.size();
    std::vector<PadicScalar> v(s, PadicScalar::zero(ctx));
    size_t i0;
    if (s == 2) {
        v[0] = PadicScalar::one(ctx);
        v[1] = hensel_sqrt((w[0] / w[1]).negate());
        i0 = 0;
    } else {
        if (!try_unit_target(ctx, {0, 1}, {w[0], w[1]}, w[2].negate(), v))
            throw InternalInvariantError("binary unit form must represent every unit");
        v[2] = PadicScalar::one(ctx);
        i0 = 2;
    }
    PadicScalar minus_one = PadicScalar::one(ctx).negate();
    PadicScalar num = collapsed_add_mul(c, minus_one, w[i0]);
    std::vector<PadicScalar> y(s, PadicScalar::zero(ctx));
    y[i0] = PadicScalar::one(ctx);
    if (num.is_zero()) return y;
    PadicScalar t = num / (PadicScalar::embed_int(ctx, 2) * w[i0]);
    for (size_t i = 0; i < s; ++i) y[i] = collapsed_add_mul(y[i], t, v[i]);
    return y;
}

// witnesses for a target that is a square-class representative, over
// coefficients that are square-class representatives
std::optional<std::vector<PadicScalar>> represent_reps(const Ctx& ctx,
                                                       const std::vector<PadicScalar>& reps,
                                                       const PadicScalar& b) {
    const size_t n = reps.size();
    std::vector<size_t> unit_idx, odd_idx;
    for (size_t i = 0; i < n; ++i)
        (reps[i].valuation() == 0 ? unit_idx : odd_idx).push_back(i);
    std::vector<PadicScalar> units, odds;  // odds divided by p
    for (size_t i : unit_idx) units.push_back(reps[i]);
    for (size_t i : odd_idx) odds.push_back(reps[i].mul_p_power(-1));

    std::vector<PadicScalar> out(n, PadicScalar::zero(ctx));
    auto place = [&](const std::vector<size_t>& idx, const std::vector<PadicScalar>& y) {
        for (size_t k = 0; k < idx.size(); ++k) out[idx[k]] = y[k];
    };

    if (b.valuation() == 0) {
        if (try_unit_target(ctx, unit_idx, units, b, out)) return out;
        if (unit_diag_isotropic(odds)) {  // p * (odd part)(y) = b
            place(odd_idx, universal_solve(ctx, odds, b.mul_p_power(-1)));
            return out;
        }
        return std::nullopt;
    }
    PadicScalar bu = b.mul_p_power(-1);  // unit target for the odd part
    if (try_unit_target(ctx, odd_idx, odds, bu, out)) return out;
    if (unit_diag_isotropic(units)) {
        place(unit_idx, universal_solve(ctx, units, b));
        return out;
    }
    return std::nullopt;
}

}  // namespace

std::vector<PadicScalar> represent_value(const QuadraticForm& q, const PadicScalar& c) {
    const Ctx& ctx = q.ctx();
    if (!q.gram().is_diagonal()) throw UsageError("represent_value expects a diagonal form");
    if (c.is_zero()) throw UsageError("representation target must be nonzero");
    const size_t n = q.dim();
    std::vector<PadicScalar> d(n);
    for (size_t i = 0; i < n; ++i) d[i] = q.gram().at(i, i);
    if (!represents_diag(ctx, d, c))
        throw NotRepresentedError("value is not represented by the form");

    // strip squares: d_i = rep(s_i) t_i^2, c = rep(s_c) t_c^2, solve in reps
    SquareClassSplit ds = square_class_split(d);
    SquareClassSplit cs = square_class_split({c});
    std::vector<PadicScalar> reps(n);
    for (size_t i = 0; i < n; ++i) reps[i] = class_representative(ctx, ds.s[i]);
    auto z = represent_reps(ctx, reps, class_representative(ctx, cs.s[0]));
    if (!z) throw InternalInvariantError("representability criteria and witness search disagree");
    std::vector<PadicScalar> v(n, PadicScalar::zero(ctx));
    for (size_t i = 0; i < n; ++i)
        if (!(*z)[i].is_zero()) v[i] = (*z)[i] * cs.t[0] / ds.t[i];
    return v;
}

namespace {

// gamma with gamma^T diag(a) gamma = diag(b), given the two diagonals are
// forms with equal invariants (Witt chaining)
PMatrix witt_diag(const Ctx& ctx, const std::vector<PadicScalar>& a,
                  const std::vector<PadicScalar>& b) {
    const size_t n = a.size();
    if (n == 1) {
        PMatrix g(ctx, 1, 1);
        g.at(0, 0) = hensel_sqrt(b[0] / a[0]);
        return g;
    }
    QuadraticForm qa = QuadraticForm::diagonal_form(ctx, a);
    std::vector<PadicScalar> v = represent_value(qa, b[0]);

    size_t i0 = n;
    long best = kInfValuation;
    for (size_t i = 0; i < n; ++i)
        if (!v[i].is_zero() && v[i].valuation() < best) {
            best = v[i].valuation();
            i0 = i;
        }
    if (i0 == n) throw InternalInvariantError("representation witness is zero");

    // basis: v first, then e_j - (B(v,e_j)/q(v)) v over j != i0 (orthogonal
    // to v by construction)
    PMatrix m(ctx, n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, 0) = v[i];
    size_t col = 1;
    for (size_t j = 0; j < n; ++j) {
        if (j == i0) continue;
        PadicScalar base = (a[j] * v[j] / b[0]).negate();
        for (size_t i = 0; i < n; ++i) {
            PadicScalar e = (i == j) ? PadicScalar::one(ctx) : PadicScalar::zero(ctx);
            m.at(i, col) = collapsed_add_mul(e, base, v[i]);
        }
        ++col;
    }

    PMatrix b1 = m.transpose() * PMatrix::diagonal(ctx, a) * m;
    PMatrix sub(ctx, n - 1, n - 1);
    for (size_t i = 1; i < n; ++i)
        for (size_t j = 1; j < n; ++j) sub.at(i - 1, j - 1) = b1.at(i, j);
    auto [usub, dsub] = diag_sup_gram(sub);
    PMatrix delta = witt_diag(ctx, dsub, std::vector<PadicScalar>(b.begin() + 1, b.end()));

    PMatrix blk = PMatrix::identity(ctx, n);
    PMatrix w = usub * delta;
    for (size_t i = 0; i + 1 < n; ++i)
        for (size_t j = 0; j + 1 < n; ++j) blk.at(i + 1, j + 1) = w.at(i, j);
    return m * blk;
}

}  // namespace

PMatrix witt_isometry(const QuadraticForm& q1, const QuadraticForm& q2) {
    if (q1.ctx()->p != q2.ctx()->p) throw UsageError("forms live over different primes");
    if (!(q1.invariants() == q2.invariants()))
        throw InvariantMismatchError("forms are not equivalent");
    if (q1.gram().identical(q2.gram())) return PMatrix::identity(q1.ctx(), q1.dim());
    auto [u1, d1] = diag_sup_gram(q1.gram());
    auto [u2, d2] = diag_sup_gram(q2.gram());
    return u1 * witt_diag(q1.ctx(), d1, d2) * u2.inverse();
}

}  // namespace ppolar
