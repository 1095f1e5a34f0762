#pragma once

#include <json.hpp>

#include <vector>

#include "ppolar/padic.hpp"

namespace ppolar {

// Dense matrix over Q_p, row-major.  Entries carry their own precision;
// valuations are exact, so pivoting and integrality checks are decisions,
// not guesses.  Matrix-level arithmetic collapses window-complete
// cancellation to an exact zero (matrix data is exact by construction, so a
// sum whose retained digits all vanish is a true zero); the scalar binary
// ops keep the strict throwing semantics.
class PMatrix {
  public:
    PMatrix() = default;
    PMatrix(Ctx ctx, size_t rows, size_t cols);  // exact zeros
    static PMatrix identity(const Ctx& ctx, size_t n, int prec = -1);
    static PMatrix diagonal(const Ctx& ctx, const std::vector<PadicScalar>& d);
    // diag(p^e) as exact scalars
    static PMatrix diagonal_p_powers(const Ctx& ctx, const std::vector<long>& e, int prec = -1);

    const Ctx& ctx() const { return ctx_; }
    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    PadicScalar& at(size_t i, size_t j) { return data_[i * cols_ + j]; }
    const PadicScalar& at(size_t i, size_t j) const { return data_[i * cols_ + j]; }

    PMatrix transpose() const;
    PMatrix with_precision(int prec) const;  // entrywise exact reinterpretation
    PMatrix lifted(const Ctx& to, int prec = -1) const;  // entrywise lift, same prime
    PMatrix mul_p_power(long k) const;

    friend PMatrix operator*(const PMatrix& a, const PMatrix& b);
    friend PMatrix operator-(const PMatrix& a, const PMatrix& b);
    PMatrix scaled(const PadicScalar& s) const;

    std::vector<PadicScalar> apply(const std::vector<PadicScalar>& x) const;  // m * x

    PadicScalar determinant() const;  // exact zero when singular-to-precision
    PMatrix inverse() const;          // SingularToPrecision when no pivot survives

    bool is_integral() const;       // every entry valuation >= 0
    bool is_integral_unit() const;  // integral and det a unit
    bool is_diagonal() const;       // off-diagonal entries exact zero
    bool identical(const PMatrix& o) const;

    long min_valuation() const;  // over nonzero entries; kInfValuation if none

    nlohmann::json to_json() const;
    static PMatrix from_json(const Ctx& ctx, const nlohmann::json& j);

  private:
    Ctx ctx_;
    size_t rows_ = 0, cols_ = 0;
    std::vector<PadicScalar> data_;
};

// worst entrywise agreement, relative digits (see agreement_digits)
long matrix_agreement_digits(const PMatrix& a, const PMatrix& b);
// worst entrywise absolute valuation of provable agreement: the right
// measure when the expected matrix has exact-zero entries
long matrix_agreement_abs_valuation(const PMatrix& a, const PMatrix& b);

}  // namespace ppolar
