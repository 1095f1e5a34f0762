#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "ppolar/plinalg.hpp"
#include "ppolar/quadform.hpp"

namespace ppolar {

// joined class names, e.g. "1,u" — map key and JSON form of a class vector
std::string class_vector_key(const std::vector<SquareClass>& s);
std::vector<SquareClass> class_vector_from_key(const std::string& key);

// GL(n, Q_p) acting on the forms equivalent to a fixed unit-diagonal q0.
// Caches one isometry witness per square-class vector s:
//   gamma_s^T diag(rep(s)) gamma_s = B0.
// The table stays finite (at most 4^n keys) and every entry is checked
// against its defining identity when created.
//
// All pipeline arithmetic runs in an elevated working context (ambient
// precision + work_pad digits), treating input digits as exact data of
// record; window truncation through the product chain then cannot eat into
// the certified digits.  Witnesses are returned in the working context.
class SymmetricSpaceContext {
  public:
    explicit SymmetricSpaceContext(QuadraticForm q0, int work_pad = 96);

    const Ctx& ctx() const { return q0_.ctx(); }
    size_t n() const { return q0_.dim(); }
    const QuadraticForm& q0() const { return q0_; }
    const Ctx& work_ctx() const { return work_ctx_; }
    const QuadraticForm& q0_work() const { return q0w_; }

    PMatrix witness_for(const std::vector<SquareClass>& s) const;  // lazy, thread-safe
    size_t witness_count() const;

  private:
    QuadraticForm q0_;
    Ctx work_ctx_;
    QuadraticForm q0w_;
    mutable std::mutex mu_;
    mutable std::map<std::string, PMatrix> table_;
};

// g = k * (gamma_s^-1 a gamma_s) * h with k inside the compact set
// (union of K0 gamma_s), a diagonal, and h an isometry of q0
struct KAHWitness {
    PMatrix k;                   // k0 * gamma_s with k0 integral unit
    std::vector<SquareClass> s;  // index of the witness torus
    PMatrix a;                   // diagonal, entries 1/t_i from the square split
    PMatrix h;

    nlohmann::json to_json() const;
    static KAHWitness from_json(const Ctx& ctx, const nlohmann::json& j);
};

KAHWitness kah_decompose(const PMatrix& g, const SymmetricSpaceContext& ssc);

// k * (gamma_s^-1 a gamma_s) * h
PMatrix kah_reconstruct(const KAHWitness& w, const SymmetricSpaceContext& ssc);

// the four witness invariants; the two residual checks report the worst
// absolute valuation of the difference (entries of the targets can be exact
// zeros, where relative digits are meaningless)
struct WitnessReport {
    long reconstruct_valuation = 0;   // entry valuations of reconstruction - g
    bool k_integral = false;          // k gamma_s^-1 in GL(n, O)
    bool a_diagonal = false;
    long h_membership_valuation = 0;  // entry valuations of h^T B0 h - B0

    bool pass(long min_valuation) const {
        return k_integral && a_diagonal && reconstruct_valuation >= min_valuation &&
               h_membership_valuation >= min_valuation;
    }
    nlohmann::json to_json() const;
};

WitnessReport verify_witness(const PMatrix& g, const KAHWitness& w,
                             const SymmetricSpaceContext& ssc);

// vertex distance moved by m at the base point: euclidean norm of the
// mean-centered elementary divisor exponents; 0 iff m is p-power * unit
double displacement(const PMatrix& m);

struct ClassUsage {
    std::uint64_t count = 0;
    double max_k_displacement = 0.0;
};
// class-index tally over kah_decompose outputs; distinct keys are distinct
// as indices only (torus conjugacy between them is not decided here)
std::map<std::string, ClassUsage> witness_usage_stats(const std::vector<PMatrix>& samples,
                                                      const SymmetricSpaceContext& ssc);

}  // namespace ppolar
