#pragma once

#include <vector>

#include "ppolar/pmatrix.hpp"

namespace ppolar {

// g = k1 · diag(p^e) · k2 with k1, k2 in GL(n, O).  The exponent vector is
// the elementary-divisor data of g, unique once an order is fixed; we store
// it non-decreasing (a flag on smith_cartan reverses it).
struct CartanFactors {
    PMatrix k1;
    std::vector<long> exponents;
    PMatrix k2;

    PMatrix reconstruct() const;  // k1 · diag(p^e) · k2
    nlohmann::json to_json() const;
};

CartanFactors smith_cartan(const PMatrix& g, bool increasing = true);

// P·m = lower·upper; perm[i] is the input row sitting at slot i.  Pivots are
// min-valuation (largest |.|), so lower stays unit lower-triangular over O
// whenever m is over O.
struct PLUFactors {
    std::vector<size_t> perm;
    PMatrix lower;
    PMatrix upper;

    PMatrix permuted_input() const;  // lower · upper
};

PLUFactors plu_eliminate(const PMatrix& m);

// Canonical column Hermite form over the valuation ring of the lattice
// spanned by the columns of gens: square upper triangular, diagonal p^{e_i},
// entries right of the diagonal reduced mod the diagonal p-power of their
// row.  Same lattice in, identical matrix out.  RankDeficient when the
// columns do not span a full lattice.
PMatrix hnf_lattice(const PMatrix& gens);

// Ultrametric norm N(x) = sup_i p^{w_i} |c_i| where c = basis^{-1} x; the
// weights carry the per-coordinate scale as exponents of p (the lattice
// norms; arbitrary real scales are out of scope).
struct UltraNorm {
    PMatrix basis;
    std::vector<long> weights;

    static UltraNorm sup_norm(const Ctx& ctx, size_t n);

    // log_p N(x); the zero vector reports -kInfValuation
    long evaluate_log(const std::vector<PadicScalar>& x) const;
    // basis · diag(p^w): N is the plain sup-norm of coordinates in this basis
    PMatrix effective_basis() const;
};

// Common basis in which both norms read sup_i p^{w_i}|c_i|.  w1 is zero by
// construction (the basis is adapted to n1); w2 is the Cartan exponent vector
// of the transition matrix.
struct NormPairDiagonal {
    PMatrix basis;
    std::vector<long> w1;
    std::vector<long> w2;
};

NormPairDiagonal diagonalize_norm_pair(const UltraNorm& n1, const UltraNorm& n2);

// Squared euclidean length of the mean-centered exponent vector, times n:
// n·Σa² − (Σa)².  Integer-exact; the distance downstream is sqrt(of this / n).
long centered_sq_times_n(const std::vector<long>& a);
double centered_norm(const std::vector<long>& a);

}  // namespace ppolar
