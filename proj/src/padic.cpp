#include "ppolar/padic.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace ppolar {

namespace {

bool is_odd_prime(long p) {
    if (p < 3 || p % 2 == 0) return false;
    mpz_class z = p;
    return mpz_probab_prime_p(z.get_mpz_t(), 32) != 0;
}

long mod2_nonneg(long v) { return ((v % 2) + 2) % 2; }

void require_same_prime(const PadicScalar& a, const PadicScalar& b) {
    if (!a.ctx() || !b.ctx() || a.ctx()->p != b.ctx()->p)
        throw UsageError("scalars from different prime contexts");
}

// inverse of u mod p^k
mpz_class inv_mod(const mpz_class& u, const mpz_class& mod) {
    mpz_class r;
    if (mpz_invert(r.get_mpz_t(), u.get_mpz_t(), mod.get_mpz_t()) == 0)
        throw InternalInvariantError("non-invertible unit in inv_mod");
    return r;
}

// square root of a QR a mod p (a a unit), Tonelli-Shanks
mpz_class sqrt_mod_p(const PrimeContext& ctx, const mpz_class& a0) {
    const mpz_class& p = ctx.pz;
    mpz_class a = a0 % p;
    if (a < 0) a += p;
    if (ctx.p % 4 == 3) {
        mpz_class e = (p + 1) / 4, r;
        mpz_powm(r.get_mpz_t(), a.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
        return r;
    }
    mpz_class q = p - 1;
    unsigned long s = mpz_remove(q.get_mpz_t(), q.get_mpz_t(), mpz_class(2).get_mpz_t());
    mpz_class z = ctx.nonresidue;
    mpz_class c, t, r, e;
    mpz_powm(c.get_mpz_t(), z.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    mpz_powm(t.get_mpz_t(), a.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    e = (q + 1) / 2;
    mpz_powm(r.get_mpz_t(), a.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
    unsigned long m = s;
    while (t != 1) {
        mpz_class tt = t;
        unsigned long i = 0;
        while (tt != 1) {
            tt = tt * tt % p;
            ++i;
            if (i == m) throw InternalInvariantError("sqrt_mod_p: not a residue");
        }
        mpz_class b = c;
        for (unsigned long j = 0; j + i + 1 < m; ++j) b = b * b % p;
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    return r;
}

}  // namespace

std::shared_ptr<const PrimeContext> PrimeContext::make(long p, int precision) {
    if (!is_odd_prime(p)) throw UsageError("p must be an odd prime >= 3");
    if (precision < kMinPrecision || precision > kMaxPrecision)
        throw UsageError("precision out of range [1, 1024]");
    auto ctx = std::make_shared<PrimeContext>();
    ctx->p = p;
    ctx->precision = precision;
    ctx->pz = p;
    long nr = 2;
    while (true) {
        mpz_class n = nr;
        if (mpz_legendre(n.get_mpz_t(), ctx->pz.get_mpz_t()) == -1) break;
        ++nr;
    }
    ctx->nonresidue = nr;
    return ctx;
}

mpz_class PrimeContext::pow_p(long k) const {
    if (k < 0) throw InternalInvariantError("pow_p with negative exponent");
    mpz_class r;
    mpz_pow_ui(r.get_mpz_t(), pz.get_mpz_t(), static_cast<unsigned long>(k));
    return r;
}

void PadicScalar::canonicalize_() {
    if (is_zero()) {
        unit_ = 0;
        prec_ = 0;
        return;
    }
    if (prec_ < kMinPrecision) throw UsageError("scalar precision must be >= 1");
    mpz_class mod = ctx_->pow_p(prec_);
    unit_ %= mod;
    if (unit_ < 0) unit_ += mod;
    if (unit_ % ctx_->pz == 0)
        throw InternalInvariantError("unit part divisible by p");
}

PadicScalar PadicScalar::zero(const Ctx& ctx) {
    PadicScalar x;
    x.ctx_ = ctx;
    return x;
}

PadicScalar PadicScalar::one(const Ctx& ctx) { return from_unit(ctx, 0, 1, ctx->precision); }

PadicScalar PadicScalar::from_unit(const Ctx& ctx, long val, mpz_class unit, int prec) {
    PadicScalar x;
    x.ctx_ = ctx;
    x.val_ = val;
    x.unit_ = std::move(unit);
    x.prec_ = prec;
    x.canonicalize_();
    return x;
}

PadicScalar PadicScalar::embed(const Ctx& ctx, const mpz_class& num, const mpz_class& den,
                               int prec) {
    if (den == 0) throw DivisionByZeroError("rational with zero denominator");
    if (prec < 0) prec = ctx->precision;
    if (num == 0) return zero(ctx);
    mpz_class n = num, d = den;
    long v = 0;
    v += static_cast<long>(mpz_remove(n.get_mpz_t(), n.get_mpz_t(), ctx->pz.get_mpz_t()));
    v -= static_cast<long>(mpz_remove(d.get_mpz_t(), d.get_mpz_t(), ctx->pz.get_mpz_t()));
    mpz_class mod = ctx->pow_p(prec);
    mpz_class u = n % mod * inv_mod(d % mod, mod) % mod;
    return from_unit(ctx, v, u, prec);
}

PadicScalar PadicScalar::embed_int(const Ctx& ctx, long num, long den, int prec) {
    return embed(ctx, mpz_class(num), mpz_class(den), prec);
}

long PadicScalar::abs_precision() const {
    if (is_zero()) return kInfValuation;
    return val_ + prec_;
}

long PadicScalar::leading_digit() const {
    if (is_zero()) throw UsageError("leading digit of zero");
    mpz_class d = unit_ % ctx_->pz;
    return d.get_si();
}

PadicScalar PadicScalar::with_precision(int prec) const {
    if (is_zero()) return *this;
    return from_unit(ctx_, val_, unit_, prec);
}

PadicScalar PadicScalar::lifted(const Ctx& to, int prec) const {
    if (to->p != ctx_->p) throw UsageError("lift across different primes");
    if (prec < 0) prec = to->precision;
    if (is_zero()) return zero(to);
    return from_unit(to, val_, unit_, prec);
}

PadicScalar PadicScalar::negate() const {
    if (is_zero()) return *this;
    return from_unit(ctx_, val_, ctx_->pow_p(prec_) - unit_, prec_);
}

PadicScalar PadicScalar::inv() const {
    if (is_zero()) throw DivisionByZeroError("inverse of zero");
    mpz_class mod = ctx_->pow_p(prec_);
    return from_unit(ctx_, -val_, inv_mod(unit_, mod), prec_);
}

PadicScalar operator*(const PadicScalar& a, const PadicScalar& b) {
    require_same_prime(a, b);
    if (a.is_zero() || b.is_zero()) return PadicScalar::zero(a.ctx_);
    int prec = std::min(a.prec_, b.prec_);
    mpz_class mod = a.ctx_->pow_p(prec);
    return PadicScalar::from_unit(a.ctx_, a.val_ + b.val_, a.unit_ * b.unit_ % mod, prec);
}

PadicScalar operator/(const PadicScalar& a, const PadicScalar& b) {
    require_same_prime(a, b);
    if (b.is_zero()) throw DivisionByZeroError("division by zero");
    if (a.is_zero()) return PadicScalar::zero(a.ctx_);
    int prec = std::min(a.prec_, b.prec_);
    mpz_class mod = a.ctx_->pow_p(prec);
    return PadicScalar::from_unit(a.ctx_, a.val_ - b.val_,
                                  a.unit_ % mod * inv_mod(b.unit_ % mod, mod) % mod, prec);
}

PadicScalar operator+(const PadicScalar& a, const PadicScalar& b) {
    require_same_prime(a, b);
    return sum_scalars(a.ctx(), {a, b});
}

PadicScalar operator-(const PadicScalar& a, const PadicScalar& b) {
    require_same_prime(a, b);
    return sum_scalars(a.ctx(), {a, b.negate()});
}

PadicScalar PadicScalar::mul_p_power(long k) const {
    if (is_zero()) return *this;
    return from_unit(ctx_, val_ + k, unit_, prec_);
}

bool PadicScalar::identical(const PadicScalar& b) const {
    if (!ctx_ || !b.ctx_) return false;
    return ctx_->p == b.ctx_->p && val_ == b.val_ && prec_ == b.prec_ && unit_ == b.unit_;
}

SumResult sum_scalars_detail(const Ctx& ctx, const std::vector<PadicScalar>& terms) {
    long v0 = kInfValuation;   // window base
    long floor = kInfValuation;  // common absolute precision
    for (const auto& t : terms) {
        if (!t.ctx() || t.ctx()->p != ctx->p)
            throw UsageError("sum over mismatched prime contexts");
        if (t.is_zero()) continue;
        v0 = std::min(v0, t.valuation());
        floor = std::min(floor, t.abs_precision());
    }
    if (v0 == kInfValuation)  // all terms exact zero
        return {PadicScalar::zero(ctx), false, kInfValuation};

    const long window = floor - v0;  // >= 1 since floor > v0
    mpz_class mod = ctx->pow_p(window);
    mpz_class acc = 0;
    for (const auto& t : terms) {
        if (t.is_zero()) continue;
        acc += t.unit() * ctx->pow_p(t.valuation() - v0);
    }
    acc %= mod;
    if (acc < 0) acc += mod;
    if (acc == 0) return {PadicScalar::zero(ctx), true, floor};

    long vs = static_cast<long>(mpz_remove(acc.get_mpz_t(), acc.get_mpz_t(), ctx->pz.get_mpz_t()));
    long prec = window - vs;
    return {PadicScalar::from_unit(ctx, v0 + vs, acc, static_cast<int>(prec)), false, floor};
}

PadicScalar sum_scalars(const Ctx& ctx, const std::vector<PadicScalar>& terms) {
    SumResult r = sum_scalars_detail(ctx, terms);
    if (r.cancelled_to_precision)
        throw InsufficientPrecisionError("all retained digits cancelled in a sum");
    return r.value;
}

PadicScalar collapsed_add_mul(const PadicScalar& a, const PadicScalar& m, const PadicScalar& b) {
    if (m.is_zero() || b.is_zero()) return a;
    PadicScalar t = m * b;
    if (a.is_zero()) return t;
    SumResult r = sum_scalars_detail(a.ctx(), {a, t});
    if (r.cancelled_to_precision) return PadicScalar::zero(a.ctx());
    return r.value;
}

long agreement_abs_valuation(const PadicScalar& a, const PadicScalar& b) {
    require_same_prime(a, b);
    SumResult d = sum_scalars_detail(a.ctx(), {a, b.negate()});
    if (d.cancelled_to_precision) return d.floor_abs_valuation;
    if (d.value.is_zero()) return kInfValuation;  // both exact zero
    return d.value.valuation();
}

long agreement_digits(const PadicScalar& a, const PadicScalar& b) {
    long abs = agreement_abs_valuation(a, b);
    if (abs == kInfValuation) return kInfValuation;
    long ref = std::min(a.is_zero() ? kInfValuation : a.valuation(),
                        b.is_zero() ? kInfValuation : b.valuation());
    if (ref == kInfValuation) return abs;  // one side exact zero: absolute scale
    return abs - ref;
}

std::vector<long> PadicScalar::digits() const {
    std::vector<long> out;
    out.reserve(static_cast<size_t>(prec_));
    mpz_class u = unit_, q, r;
    for (int i = 0; i < prec_; ++i) {
        mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), u.get_mpz_t(), ctx_->pz.get_mpz_t());
        out.push_back(r.get_si());
        u = q;
    }
    return out;
}

std::string PadicScalar::text() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    os << ctx_->p << "^" << val_ << " * (";
    auto ds = digits();
    for (size_t i = 0; i < ds.size(); ++i) {
        if (i) os << " + ";
        os << ds[i];
        if (i == 1) os << "*" << ctx_->p;
        if (i >= 2) os << "*" << ctx_->p << "^" << i;
    }
    os << ") [prec " << prec_ << "]";
    return os.str();
}

namespace {

void skip_ws(const std::string& s, size_t& i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

long parse_long(const std::string& s, size_t& i) {
    skip_ws(s, i);
    size_t start = i;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start) throw UsageError("scalar text: expected integer");
    return std::stol(s.substr(start, i - start));
}

void expect(const std::string& s, size_t& i, const std::string& tok) {
    skip_ws(s, i);
    if (s.compare(i, tok.size(), tok) != 0)
        throw UsageError("scalar text: expected '" + tok + "'");
    i += tok.size();
}

}  // namespace

PadicScalar PadicScalar::parse_text(const Ctx& ctx, const std::string& s) {
    size_t i = 0;
    skip_ws(s, i);
    if (s.compare(i, 1, "0") == 0 && i + 1 >= s.size()) return zero(ctx);

    long p = parse_long(s, i);
    if (p != ctx->p) throw UsageError("scalar text: prime mismatch");
    expect(s, i, "^");
    long val = parse_long(s, i);
    expect(s, i, "*");
    expect(s, i, "(");
    std::vector<long> ds;
    while (true) {
        long d = parse_long(s, i);
        if (d < 0 || d >= ctx->p) throw UsageError("scalar text: digit out of range");
        size_t order = ds.size();
        skip_ws(s, i);
        if (i < s.size() && s[i] == '*') {
            ++i;
            long pp = parse_long(s, i);
            if (pp != ctx->p) throw UsageError("scalar text: prime mismatch in digit term");
            long e = 1;
            skip_ws(s, i);
            if (i < s.size() && s[i] == '^') {
                ++i;
                e = parse_long(s, i);
            }
            if (e != static_cast<long>(order))
                throw UsageError("scalar text: digit exponent out of order");
        } else if (order != 0) {
            throw UsageError("scalar text: missing power on digit term");
        }
        ds.push_back(d);
        skip_ws(s, i);
        if (i < s.size() && s[i] == '+') {
            ++i;
            continue;
        }
        break;
    }
    expect(s, i, ")");
    expect(s, i, "[prec");
    long prec = parse_long(s, i);
    expect(s, i, "]");
    if (prec < kMinPrecision || prec > kMaxPrecision || static_cast<long>(ds.size()) > prec)
        throw UsageError("scalar text: bad precision");
    if (ds.empty() || ds[0] == 0) throw UsageError("scalar text: unit must have nonzero lead digit");
    mpz_class u = 0;
    for (size_t k = ds.size(); k-- > 0;) u = u * ctx->pz + ds[k];
    return from_unit(ctx, val, u, static_cast<int>(prec));
}

nlohmann::json PadicScalar::to_json() const {
    nlohmann::json j;
    j["p"] = ctx_->p;
    if (is_zero()) {
        j["valuation"] = nullptr;
        j["digits"] = nlohmann::json::array();
        j["precision"] = nullptr;
    } else {
        j["valuation"] = val_;
        j["digits"] = digits();
        j["precision"] = prec_;
    }
    return j;
}

PadicScalar PadicScalar::from_json(const Ctx& ctx, const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("p") || !j.contains("valuation"))
        throw UsageError("scalar json: missing fields");
    if (j["p"].get<long>() != ctx->p) throw UsageError("scalar json: prime mismatch");
    if (j["valuation"].is_null()) return zero(ctx);
    long val = j["valuation"].get<long>();
    int prec = j.at("precision").get<int>();
    if (prec < kMinPrecision || prec > kMaxPrecision) throw UsageError("scalar json: bad precision");
    const auto& ds = j.at("digits");
    if (!ds.is_array() || ds.size() > static_cast<size_t>(prec))
        throw UsageError("scalar json: bad digits");
    mpz_class u = 0;
    for (size_t k = ds.size(); k-- > 0;) {
        long d = ds[k].get<long>();
        if (d < 0 || d >= ctx->p) throw UsageError("scalar json: digit out of range");
        u = u * ctx->pz + d;
    }
    if (u % ctx->pz == 0) throw UsageError("scalar json: unit must be coprime to p");
    return from_unit(ctx, val, u, prec);
}

// ---- square classes and symbols ------------------------------------------

SquareClass SquareClass::from_name(const std::string& s) {
    if (s == "1") return {false, false};
    if (s == "u") return {true, false};
    if (s == "p") return {false, true};
    if (s == "up") return {true, true};
    throw UsageError("unknown square class name: " + s);
}

int legendre_unit(const PrimeContext& ctx, const mpz_class& u) {
    int r = mpz_legendre(u.get_mpz_t(), ctx.pz.get_mpz_t());
    if (r == 0) throw InternalInvariantError("legendre_unit on a non-unit");
    return r;
}

SquareClass unit_square_class(const PadicScalar& x) {
    if (x.is_zero()) throw UsageError("square class of zero");
    return {legendre_unit(*x.ctx(), x.unit()) == -1, mod2_nonneg(x.valuation()) == 1};
}

PadicScalar class_representative(const Ctx& ctx, SquareClass c, int prec) {
    if (prec < 0) prec = ctx->precision;
    return PadicScalar::from_unit(ctx, c.odd_valuation ? 1 : 0,
                                  c.unit_nonresidue ? ctx->nonresidue : 1, prec);
}

int hilbert_symbol(const PadicScalar& a, const PadicScalar& b) {
    require_same_prime(a, b);
    if (a.is_zero() || b.is_zero()) throw UsageError("hilbert symbol needs nonzero arguments");
    const PrimeContext& c = *a.ctx();
    long alpha = mod2_nonneg(a.valuation());
    long beta = mod2_nonneg(b.valuation());
    int leg_m1 = legendre_unit(c, c.pz - 1);
    int leg_ua = legendre_unit(c, a.unit());
    int leg_ub = legendre_unit(c, b.unit());
    int r = 1;
    if (alpha && beta) r *= leg_m1;
    if (beta) r *= leg_ua;
    if (alpha) r *= leg_ub;
    return r;
}

PadicScalar hensel_sqrt(const PadicScalar& a) {
    if (a.is_zero()) return a;
    const Ctx& ctx = a.ctx();
    if (mod2_nonneg(a.valuation()) == 1) throw NotASquareError("odd valuation");
    if (legendre_unit(*ctx, a.unit()) == -1) throw NotASquareError("unit part is a non-residue");

    const int prec = a.precision();
    mpz_class u = a.unit();
    mpz_class r = sqrt_mod_p(*ctx, u);
    int have = 1;
    while (have < prec) {
        have = std::min(2 * have, prec);
        mpz_class mod = ctx->pow_p(have);
        mpz_class ru = u % mod;
        r = (r + ru * inv_mod(r, mod)) % mod * inv_mod(mpz_class(2), mod) % mod;
    }
    mpz_class mod = ctx->pow_p(prec);
    if (r % ctx->pz > (ctx->p - 1) / 2) r = mod - r;
    return PadicScalar::from_unit(ctx, a.valuation() / 2, r, prec);
}

}  // namespace ppolar
