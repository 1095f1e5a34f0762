#include "ppolar/pmatrix.hpp"

#include <algorithm>

namespace ppolar {

PMatrix::PMatrix(Ctx ctx, size_t rows, size_t cols)
    : ctx_(std::move(ctx)), rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) throw UsageError("matrix dimensions must be positive");
    data_.assign(rows * cols, PadicScalar::zero(ctx_));
}

PMatrix PMatrix::identity(const Ctx& ctx, size_t n, int prec) {
    PMatrix m(ctx, n, n);
    for (size_t i = 0; i < n; ++i)
        m.at(i, i) = PadicScalar::from_unit(ctx, 0, 1, prec < 0 ? ctx->precision : prec);
    return m;
}

PMatrix PMatrix::diagonal(const Ctx& ctx, const std::vector<PadicScalar>& d) {
    PMatrix m(ctx, d.size(), d.size());
    for (size_t i = 0; i < d.size(); ++i) m.at(i, i) = d[i];
    return m;
}

PMatrix PMatrix::diagonal_p_powers(const Ctx& ctx, const std::vector<long>& e, int prec) {
    PMatrix m(ctx, e.size(), e.size());
    for (size_t i = 0; i < e.size(); ++i)
        m.at(i, i) = PadicScalar::from_unit(ctx, e[i], 1, prec < 0 ? ctx->precision : prec);
    return m;
}

PMatrix PMatrix::transpose() const {
    PMatrix t(ctx_, cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
}

PMatrix PMatrix::with_precision(int prec) const {
    PMatrix t = *this;
    for (auto& x : t.data_) x = x.with_precision(prec);
    return t;
}

PMatrix PMatrix::lifted(const Ctx& to, int prec) const {
    PMatrix t(to, rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) t.data_[i] = data_[i].lifted(to, prec);
    return t;
}

PMatrix PMatrix::mul_p_power(long k) const {
    PMatrix t = *this;
    for (auto& x : t.data_) x = x.mul_p_power(k);
    return t;
}

namespace {
// entry sums collapse full cancellation to exact zero: matrix data here is
// exact by construction, so a window-complete cancellation is a true zero
PadicScalar entry_sum(const Ctx& ctx, const std::vector<PadicScalar>& terms) {
    SumResult r = sum_scalars_detail(ctx, terms);
    return r.cancelled_to_precision ? PadicScalar::zero(ctx) : r.value;
}
}  // namespace

PMatrix operator*(const PMatrix& a, const PMatrix& b) {
    if (a.cols_ != b.rows_) throw UsageError("matrix product shape mismatch");
    PMatrix r(a.ctx_, a.rows_, b.cols_);
    std::vector<PadicScalar> terms;
    for (size_t i = 0; i < a.rows_; ++i)
        for (size_t j = 0; j < b.cols_; ++j) {
            terms.clear();
            for (size_t k = 0; k < a.cols_; ++k) {
                const auto& x = a.at(i, k);
                const auto& y = b.at(k, j);
                if (!x.is_zero() && !y.is_zero()) terms.push_back(x * y);
            }
            r.at(i, j) = entry_sum(a.ctx_, terms);
        }
    return r;
}

PMatrix operator-(const PMatrix& a, const PMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw UsageError("matrix shape mismatch");
    PMatrix r(a.ctx_, a.rows_, a.cols_);
    for (size_t i = 0; i < a.data_.size(); ++i)
        r.data_[i] = entry_sum(a.ctx_, {a.data_[i], b.data_[i].negate()});
    return r;
}

PMatrix PMatrix::scaled(const PadicScalar& s) const {
    PMatrix t = *this;
    for (auto& x : t.data_) x = x * s;
    return t;
}

std::vector<PadicScalar> PMatrix::apply(const std::vector<PadicScalar>& x) const {
    if (x.size() != cols_) throw UsageError("matrix-vector shape mismatch");
    std::vector<PadicScalar> r(rows_, PadicScalar::zero(ctx_));
    std::vector<PadicScalar> terms;
    for (size_t i = 0; i < rows_; ++i) {
        terms.clear();
        for (size_t j = 0; j < cols_; ++j)
            if (!at(i, j).is_zero() && !x[j].is_zero()) terms.push_back(at(i, j) * x[j]);
        r[i] = entry_sum(ctx_, terms);
    }
    return r;
}

PadicScalar PMatrix::determinant() const {
    if (!square()) throw UsageError("determinant of a non-square matrix");
    PMatrix a = *this;
    const size_t n = rows_;
    bool flip = false;
    std::vector<PadicScalar> diag;
    for (size_t t = 0; t < n; ++t) {
        size_t pick = n;
        long best = kInfValuation;
        for (size_t r = t; r < n; ++r) {
            const auto& x = a.at(r, t);
            if (!x.is_zero() && x.valuation() < best) {
                best = x.valuation();
                pick = r;
            }
        }
        if (pick == n) return PadicScalar::zero(ctx_);
        if (pick != t) {
            for (size_t j = t; j < n; ++j) std::swap(a.at(t, j), a.at(pick, j));
            flip = !flip;
        }
        const PadicScalar& piv = a.at(t, t);
        for (size_t r = t + 1; r < n; ++r) {
            if (a.at(r, t).is_zero()) continue;
            PadicScalar m = (a.at(r, t) / piv).negate();
            for (size_t j = t + 1; j < n; ++j)
                a.at(r, j) = collapsed_add_mul(a.at(r, j), m, a.at(t, j));
            a.at(r, t) = PadicScalar::zero(ctx_);
        }
        diag.push_back(piv);
    }
    PadicScalar d = flip ? PadicScalar::one(ctx_).negate() : PadicScalar::one(ctx_);
    for (const auto& x : diag) d = d * x;
    return d;
}

PMatrix PMatrix::inverse() const {
    if (!square()) throw UsageError("inverse of a non-square matrix");
    const size_t n = rows_;
    PMatrix a = *this;
    PMatrix inv = identity(ctx_, n);
    for (size_t t = 0; t < n; ++t) {
        size_t pick = n;
        long best = kInfValuation;
        for (size_t r = t; r < n; ++r) {
            const auto& x = a.at(r, t);
            if (!x.is_zero() && x.valuation() < best) {
                best = x.valuation();
                pick = r;
            }
        }
        if (pick == n) throw SingularToPrecisionError("no pivot in column while inverting");
        if (pick != t)
            for (size_t j = 0; j < n; ++j) {
                std::swap(a.at(t, j), a.at(pick, j));
                std::swap(inv.at(t, j), inv.at(pick, j));
            }
        PadicScalar piv = a.at(t, t);
        for (size_t j = 0; j < n; ++j) {
            if (!a.at(t, j).is_zero()) a.at(t, j) = a.at(t, j) / piv;
            if (!inv.at(t, j).is_zero()) inv.at(t, j) = inv.at(t, j) / piv;
        }
        a.at(t, t) = PadicScalar::one(ctx_);
        for (size_t r = 0; r < n; ++r) {
            if (r == t || a.at(r, t).is_zero()) continue;
            PadicScalar m = a.at(r, t).negate();
            for (size_t j = 0; j < n; ++j) {
                if (j != t) a.at(r, j) = collapsed_add_mul(a.at(r, j), m, a.at(t, j));
                inv.at(r, j) = collapsed_add_mul(inv.at(r, j), m, inv.at(t, j));
            }
            a.at(r, t) = PadicScalar::zero(ctx_);
        }
    }
    return inv;
}

bool PMatrix::is_integral() const {
    for (const auto& x : data_)
        if (!x.is_zero() && x.valuation() < 0) return false;
    return true;
}

bool PMatrix::is_integral_unit() const {
    if (!square() || !is_integral()) return false;
    PadicScalar d = determinant();
    return !d.is_zero() && d.valuation() == 0;
}

bool PMatrix::is_diagonal() const {
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j)
            if (i != j && !at(i, j).is_zero()) return false;
    return true;
}

bool PMatrix::identical(const PMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) return false;
    for (size_t i = 0; i < data_.size(); ++i)
        if (!data_[i].identical(o.data_[i])) return false;
    return true;
}

long PMatrix::min_valuation() const {
    long v = kInfValuation;
    for (const auto& x : data_)
        if (!x.is_zero()) v = std::min(v, x.valuation());
    return v;
}

nlohmann::json PMatrix::to_json() const {
    nlohmann::json j;
    j["rows"] = rows_;
    j["cols"] = cols_;
    auto arr = nlohmann::json::array();
    for (const auto& x : data_) arr.push_back(x.to_json());
    j["entries"] = arr;
    return j;
}

PMatrix PMatrix::from_json(const Ctx& ctx, const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
        throw UsageError("matrix json: missing fields");
    size_t rows = j["rows"].get<size_t>(), cols = j["cols"].get<size_t>();
    const auto& es = j["entries"];
    if (!es.is_array() || es.size() != rows * cols)
        throw UsageError("matrix json: entry count mismatch");
    PMatrix m(ctx, rows, cols);
    for (size_t i = 0; i < rows; ++i)
        for (size_t k = 0; k < cols; ++k)
            m.at(i, k) = PadicScalar::from_json(ctx, es[i * cols + k]);
    return m;
}

long matrix_agreement_digits(const PMatrix& a, const PMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw UsageError("agreement on mismatched shapes");
    long worst = kInfValuation;
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < a.cols(); ++j)
            worst = std::min(worst, agreement_digits(a.at(i, j), b.at(i, j)));
    return worst;
}

long matrix_agreement_abs_valuation(const PMatrix& a, const PMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw UsageError("agreement on mismatched shapes");
    long worst = kInfValuation;
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < a.cols(); ++j)
            worst = std::min(worst, agreement_abs_valuation(a.at(i, j), b.at(i, j)));
    return worst;
}

}  // namespace ppolar
