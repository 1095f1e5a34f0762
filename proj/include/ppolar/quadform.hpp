#pragma once

#include <vector>

#include "ppolar/pmatrix.hpp"

namespace ppolar {

// (dim, discriminant class, Hasse symbol): a complete equivalence invariant
// for nondegenerate forms over Q_p, p odd
struct FormInvariants {
    size_t dim = 0;
    SquareClass disc;
    int hasse = 1;

    bool operator==(const FormInvariants&) const = default;
    nlohmann::json to_json() const;
};

// q(x) = x^T B x with B symmetric nondegenerate.  Invariants are computed at
// construction and cached; the value never mutates.
class QuadraticForm {
  public:
    explicit QuadraticForm(PMatrix gram);
    static QuadraticForm diagonal_form(const Ctx& ctx, const std::vector<PadicScalar>& d);
    static QuadraticForm standard(const Ctx& ctx, size_t n);  // x_1^2 + ... + x_n^2

    const Ctx& ctx() const { return gram_.ctx(); }
    const PMatrix& gram() const { return gram_; }
    size_t dim() const { return gram_.rows(); }
    const FormInvariants& invariants() const { return inv_; }

    PadicScalar evaluate(const std::vector<PadicScalar>& x) const;  // q(x), one sum window
    PadicScalar bilinear(const std::vector<PadicScalar>& x,
                         const std::vector<PadicScalar>& y) const;  // x^T B y
    QuadraticForm congruent(const PMatrix& g) const;                // Gram g^T B g

    nlohmann::json to_json() const;
    static QuadraticForm from_json(const Ctx& ctx, const nlohmann::json& j);

  private:
    PMatrix gram_;
    FormInvariants inv_;
};

// |q| maximizer on the unit ball, after scaling the Gram matrix to minimum
// entry valuation 0 (scale reports that valuation): either a basis vector
// with unit diagonal (lowest index) or e_i + e_j for the lexicographically
// first unit off-diagonal — q(e_i+e_j) is then a unit because p != 2.
struct MaxVector {
    std::vector<PadicScalar> e;
    long scale;
};
MaxVector find_max_vector(const QuadraticForm& q);

// sup-norm-preserving diagonalization: u integral with unit determinant and
// u^T B u = diag(d) to working precision
struct SupDiagonalization {
    PMatrix u;
    std::vector<PadicScalar> d;
};
SupDiagonalization diagonalize_sup(const QuadraticForm& q);

// c_i = representative(s_i) * t_i^2 with representatives from {1, u, p, up}
struct SquareClassSplit {
    std::vector<SquareClass> s;
    std::vector<PadicScalar> t;
};
SquareClassSplit square_class_split(const std::vector<PadicScalar>& d);

FormInvariants form_invariants(const QuadraticForm& q);

// does the diagonal form <d_1,...,d_n> represent c?  classical rank-wise
// criteria via Hilbert symbols; the basis of represent_value's NotRepresented
bool represents_diag(const Ctx& ctx, const std::vector<PadicScalar>& d, const PadicScalar& c);

// v with q(v) = c to working precision; NotRepresented when the criteria say
// no.  q must be diagonal.
std::vector<PadicScalar> represent_value(const QuadraticForm& q, const PadicScalar& c);

// gamma with gamma^T gram(q1) gamma = gram(q2); InvariantMismatch when the
// forms are not equivalent
PMatrix witt_isometry(const QuadraticForm& q1, const QuadraticForm& q2);

}  // namespace ppolar
