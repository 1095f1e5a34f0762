#pragma once

#include <gmpxx.h>

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ppolar/errors.hpp"

namespace ppolar {

// valuation of an exact zero
inline constexpr long kInfValuation = std::numeric_limits<long>::max() / 4;

inline constexpr int kMinPrecision = 1;
inline constexpr int kMaxPrecision = 1024;  // global retry cap
inline constexpr int kDefaultPrecision = 64;

// Immutable per-prime data shared by every scalar built over it.
struct PrimeContext {
    long p;
    int precision;    // default working precision, in base-p digits
    long nonresidue;  // smallest positive quadratic non-residue mod p
    mpz_class pz;     // p as an mpz, for arithmetic

    // validates p odd prime >= 3, precision within [1, 1024]
    static std::shared_ptr<const PrimeContext> make(long p, int precision = kDefaultPrecision);

    mpz_class pow_p(long k) const;  // p^k, k >= 0
};

using Ctx = std::shared_ptr<const PrimeContext>;

// Scalar in Q_p with capped relative precision: value = p^val * unit where
// the unit (coprime to p) is known modulo p^prec.  The valuation is exact.
// Exact zero is its own state (valuation +infinity, no digits) and behaves
// as infinitely precise.
class PadicScalar {
  public:
    PadicScalar() = default;

    static PadicScalar zero(const Ctx& ctx);
    static PadicScalar one(const Ctx& ctx);
    // unit is reduced mod p^prec and must stay coprime to p
    static PadicScalar from_unit(const Ctx& ctx, long val, mpz_class unit, int prec);
    // exact embedding of num/den; prec < 0 means the context default
    static PadicScalar embed(const Ctx& ctx, const mpz_class& num, const mpz_class& den,
                             int prec = -1);
    static PadicScalar embed_int(const Ctx& ctx, long num, long den = 1, int prec = -1);

    const Ctx& ctx() const { return ctx_; }
    bool is_zero() const { return val_ == kInfValuation; }
    long valuation() const { return val_; }          // kInfValuation for zero
    int precision() const { return prec_; }          // digit count of the unit
    long abs_precision() const;                      // val + prec, kInfValuation for zero
    const mpz_class& unit() const { return unit_; }
    long leading_digit() const;                      // unit mod p; error on zero

    // the same exact digits reinterpreted at a new precision (zero-extended
    // upward); only meaningful when the scalar is held as exact data
    PadicScalar with_precision(int prec) const;
    // the same digits carried into another context over the same prime,
    // zero-extended to prec (default: the target's precision); same caveat
    PadicScalar lifted(const Ctx& to, int prec = -1) const;

    PadicScalar negate() const;
    PadicScalar inv() const;  // DivisionByZero on zero

    friend PadicScalar operator+(const PadicScalar& a, const PadicScalar& b);
    friend PadicScalar operator-(const PadicScalar& a, const PadicScalar& b);
    friend PadicScalar operator*(const PadicScalar& a, const PadicScalar& b);
    friend PadicScalar operator/(const PadicScalar& a, const PadicScalar& b);

    PadicScalar mul_p_power(long k) const;  // exact scale by p^k

    // identical stored representation (context, valuation, digits, precision)
    bool identical(const PadicScalar& b) const;

    std::vector<long> digits() const;  // base-p digits of the unit, length == prec

    std::string text() const;
    static PadicScalar parse_text(const Ctx& ctx, const std::string& s);

    nlohmann::json to_json() const;
    static PadicScalar from_json(const Ctx& ctx, const nlohmann::json& j);

  private:
    Ctx ctx_;
    long val_ = kInfValuation;
    mpz_class unit_ = 0;
    int prec_ = 0;

    void canonicalize_();
};

// exact n-ary sum evaluated in one absolute-precision window so that partial
// cancellation mid-sum cannot abort a sum whose total is determinate
struct SumResult {
    PadicScalar value;               // meaningful unless cancelled_to_precision
    bool cancelled_to_precision;     // every retained digit cancelled
    long floor_abs_valuation;        // the window floor that was cancelled to
};

SumResult sum_scalars_detail(const Ctx& ctx, const std::vector<PadicScalar>& terms);
// throwing flavor: raises InsufficientPrecision on full cancellation
PadicScalar sum_scalars(const Ctx& ctx, const std::vector<PadicScalar>& terms);

// a + m·b with full cancellation collapsed to an exact zero.  Elimination
// update for exact pipeline data: a window-complete cancellation of values
// that are exact by construction is a true zero, and recording it as such is
// what keeps integer instances (1 - 1 = 0 mid-elimination) computable.
PadicScalar collapsed_add_mul(const PadicScalar& a, const PadicScalar& m, const PadicScalar& b);

// Absolute valuation up to which a and b provably agree (kInfValuation when
// both are exact zero or representations are identical beyond precision).
long agreement_abs_valuation(const PadicScalar& a, const PadicScalar& b);
// Relative form: digits of agreement measured from min(val a, val b).
long agreement_digits(const PadicScalar& a, const PadicScalar& b);

// ---- square classes and symbols ------------------------------------------

// Q_p^* / (Q_p^*)^2 for odd p has four classes indexed by (unit residue
// class, valuation parity).
struct SquareClass {
    bool unit_nonresidue = false;
    bool odd_valuation = false;

    bool operator==(const SquareClass&) const = default;
    SquareClass operator*(const SquareClass& o) const {
        return {unit_nonresidue != o.unit_nonresidue, odd_valuation != o.odd_valuation};
    }
    bool trivial() const { return !unit_nonresidue && !odd_valuation; }
    const char* name() const {
        return unit_nonresidue ? (odd_valuation ? "up" : "u") : (odd_valuation ? "p" : "1");
    }
    static SquareClass from_name(const std::string& s);
};

int legendre_unit(const PrimeContext& ctx, const mpz_class& u);  // +-1, u coprime to p

SquareClass unit_square_class(const PadicScalar& x);  // error on zero
// 1, u, p, or up as an exact scalar
PadicScalar class_representative(const Ctx& ctx, SquareClass c, int prec = -1);

// Hilbert symbol (a, b)_p for odd p, +-1.
int hilbert_symbol(const PadicScalar& a, const PadicScalar& b);

// Square root with the leading digit normalized into [1, (p-1)/2];
// NotASquare if the square class is nontrivial.  sqrt(0) = 0.
PadicScalar hensel_sqrt(const PadicScalar& a);

}  // namespace ppolar
