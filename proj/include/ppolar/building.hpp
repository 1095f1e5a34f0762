#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ppolar/polar.hpp"

namespace ppolar {

// Homothety class of a full-rank lattice in Q_p^n, held as its canonical
// representative: the column Hermite form of any generator matrix, scaled by
// the overall p-power that puts the minimum diagonal exponent at 0.  Two
// classes are equal iff the representatives are bitwise identical (within
// one context; the canonicalization precision is the context default).
class LatticeClass {
  public:
    explicit LatticeClass(const PMatrix& generators);

    const Ctx& ctx() const { return hnf_.ctx(); }
    size_t n() const { return hnf_.rows(); }
    const PMatrix& hnf() const { return hnf_; }

    bool operator==(const LatticeClass& o) const { return hnf_.identical(o.hnf_); }
    bool operator!=(const LatticeClass& o) const { return !(*this == o); }

  private:
    PMatrix hnf_;
};

// Elementary-divisor exponents of hnf(x)^-1 hnf(y), sorted non-decreasing.
// Invariant under simultaneous left multiplication of both classes and
// symmetric up to negation-and-reversal.
std::vector<long> relative_position(const LatticeClass& x, const LatticeClass& y);

// Vertex metric: euclidean norm of the mean-centered relative position.
// Centering quotients out the homothety direction, so this is well defined
// on classes.
double distance(const LatticeClass& x, const LatticeClass& y);

// Class of the B0-dual lattice {v : B0(v, L) integral}, i.e. of the columns
// of B0^-1 hnf(x)^-T.  Requires the gram of q0 to lie in GL(n, O); then the
// map is an involution on classes and an isometry.
LatticeClass sigma_dual(const LatticeClass& x, const QuadraticForm& q0);

// A flat of diagonal-torus type: the vertex set {[conjugator diag(p^a) L0]}
// over integer exponent vectors a.  From a KAH witness the conjugator is
// (gamma_s h)^-1, which places the sample point g^-1 L0 on the flat (at
// a = valuations of the square-split t).
struct SigmaApartmentRef {
    PMatrix conjugator;
    std::vector<SquareClass> class_index;
};

SigmaApartmentRef sigma_apartment_from_witness(const KAHWitness& w,
                                               const SymmetricSpaceContext& ssc);

// Minimum distance from x to the apartment vertices written with SUM-ZERO
// exponent vectors.  The enumeration box is derived from d(x, base vertex)
// via the triangle inequality, so the reported minimum is exact.  Vertices
// whose exponent sum is not divisible by n are deliberately outside the
// candidate set; their distance to it is at most sum_zero_covering_radius.
double distance_to_sigma_apartment(const LatticeClass& x, const SigmaApartmentRef& apt);

// Covering radius of the sum-zero integer lattice inside its hyperplane
// (sqrt(a(n-a)/n) with a = floor(n/2)): the discretization slack of the
// sum-zero vertex model above, stated in experiment reports.
double sum_zero_covering_radius(size_t n);

struct ClassBoundStat {
    std::uint64_t count = 0;
    double max_disp = 0.0;
};

struct SampleRecord {
    std::uint64_t index = 0;
    std::string class_key;
    double bound = 0.0;  // displacement(k), certified up to the additive slack
    bool has_exact = false;
    double exact = 0.0;  // n = 2 only: exact distance to the witnessed flat
};

struct ExperimentReport {
    long p = 0;
    size_t n = 0;
    int val_bound = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    double c_emp = 0.0;  // max displacement(k) over all samples
    double additive_constant = 0.0;
    std::map<std::string, ClassBoundStat> per_class;
    std::vector<SampleRecord> rows;

    nlohmann::json to_json() const;  // includes a bound histogram; sorted keys
    std::string to_csv() const;      // "index,class,bound,exact" per sample
};

// Seeded quasi-density probe: samples g = (random unimodular) * diag(p^e),
// e_i uniform in [-val_bound, val_bound], runs the KAH pipeline on each and
// records the per-sample certified distance bound displacement(k); for n = 2
// also the exact distance to the witnessed flat.  Draws come from per-sample
// derived streams, so the report is byte-identical for a fixed seed at any
// jobs value (jobs = 1 is the serial reference path; 0 means all cores).
ExperimentReport quasi_density_experiment(const SymmetricSpaceContext& ssc,
                                          std::uint64_t samples, int val_bound,
                                          std::uint64_t seed, int jobs = 1);

}  // namespace ppolar
