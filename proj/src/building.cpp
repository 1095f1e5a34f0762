#include "ppolar/building.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "ppolar/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ppolar {

namespace {

PMatrix canonical_class_rep(const PMatrix& gens) {
    if (!gens.square() || gens.rows() == 0)
        throw UsageError("lattice generators must form a square nonempty matrix");
    PMatrix h = hnf_lattice(gens);
    long e = h.at(0, 0).valuation();
    for (size_t i = 1; i < h.rows(); ++i) e = std::min(e, h.at(i, i).valuation());
    if (e == 0) return h;
    // rescale the lattice itself, then re-canonicalize so the stored residue
    // precisions are the context-default ones again
    return hnf_lattice(h.mul_p_power(-e));
}

}  // namespace

LatticeClass::LatticeClass(const PMatrix& generators) : hnf_(canonical_class_rep(generators)) {}

std::vector<long> relative_position(const LatticeClass& x, const LatticeClass& y) {
    if (x.ctx()->p != y.ctx()->p || x.n() != y.n())
        throw UsageError("relative position needs classes of one prime and rank");
    return smith_cartan(x.hnf().inverse() * y.hnf()).exponents;
}

double distance(const LatticeClass& x, const LatticeClass& y) {
    return centered_norm(relative_position(x, y));
}

LatticeClass sigma_dual(const LatticeClass& x, const QuadraticForm& q0) {
    if (x.ctx()->p != q0.ctx()->p || x.n() != q0.dim())
        throw UsageError("dual needs a form of the class's prime and rank");
    const PMatrix& b0 = q0.gram();
    if (!b0.is_integral_unit()) throw UsageError("dual needs a gram in GL(n, O)");
    return LatticeClass(b0.inverse() * x.hnf().inverse().transpose());
}

SigmaApartmentRef sigma_apartment_from_witness(const KAHWitness& w,
                                               const SymmetricSpaceContext& ssc) {
    PMatrix gamma = ssc.witness_for(w.s);
    return {(gamma * w.h).inverse(), w.s};
}

double sum_zero_covering_radius(size_t n) {
    if (n == 0) throw UsageError("covering radius needs rank >= 1");
    const double a = static_cast<double>(n / 2);
    return std::sqrt(a * (static_cast<double>(n) - a) / static_cast<double>(n));
}

double distance_to_sigma_apartment(const LatticeClass& x, const SigmaApartmentRef& apt) {
    const size_t n = x.n();
    if (!apt.conjugator.square() || apt.conjugator.rows() != n ||
        apt.conjugator.ctx()->p != x.ctx()->p)
        throw UsageError("apartment conjugator does not match the class");
    const Ctx& cctx = apt.conjugator.ctx();

    LatticeClass base(apt.conjugator);
    const double d0 = distance(x, base);
    if (d0 == 0.0) return 0.0;

    // Any sum-zero a outside |a_i| <= R has d(x, [c diag(p^a) L0]) >=
    // ||a|| - d0 > d0 >= best, since d(base, that vertex) = ||a||; so the
    // box scan below is an exact minimization.
    const long box = static_cast<long>(std::ceil(2.0 * d0)) + 1;
    double best = d0;
    std::vector<long> prefix(n - 1, -box);
    for (;;) {
        long sum = 0;
        for (long v : prefix) sum += v;
        const long last = -sum;
        if (std::labs(last) <= box) {
            std::vector<long> a(prefix);
            a.push_back(last);
            LatticeClass cand(apt.conjugator * PMatrix::diagonal_p_powers(cctx, a));
            best = std::min(best, distance(x, cand));
        }
        size_t i = 0;
        while (i < prefix.size() && prefix[i] == box) {
            prefix[i] = -box;
            ++i;
        }
        if (i == prefix.size()) break;
        ++prefix[i];
    }
    return best;
}

// ---- quasi-density experiment ----------------------------------------------

namespace {

long det_mod_p(std::vector<long> m, size_t n, long p) {
    auto pow_mod = [p](long b, long e) {
        long r = 1 % p;
        b %= p;
        while (e > 0) {
            if (e & 1) r = r * b % p;
            b = b * b % p;
            e >>= 1;
        }
        return r;
    };
    long det = 1;
    for (size_t c = 0; c < n; ++c) {
        size_t piv = c;
        while (piv < n && m[piv * n + c] % p == 0) ++piv;
        if (piv == n) return 0;
        if (piv != c) {
            for (size_t j = 0; j < n; ++j) std::swap(m[piv * n + j], m[c * n + j]);
            det = (p - det) % p;
        }
        const long d = ((m[c * n + c] % p) + p) % p;
        det = det * d % p;
        const long inv = pow_mod(d, p - 2);
        for (size_t r = c + 1; r < n; ++r) {
            const long f = ((m[r * n + c] % p) + p) % p * inv % p;
            if (f == 0) continue;
            for (size_t j = c; j < n; ++j)
                m[r * n + j] = ((m[r * n + j] - f * m[c * n + j]) % p + p) % p;
        }
    }
    return det;
}

PadicScalar random_padic_integer(const Ctx& ctx, SplitMix64& rng, long& first_digit) {
    std::vector<long> digits(static_cast<size_t>(ctx->precision));
    for (long& d : digits) d = static_cast<long>(rng.below(static_cast<std::uint64_t>(ctx->p)));
    first_digit = digits[0];
    mpz_class acc = 0;
    for (size_t k = digits.size(); k-- > 0;) acc = acc * ctx->p + digits[k];
    return PadicScalar::embed(ctx, acc, 1);
}

// diag(p^e) * (unimodular with uniform digit entries), e uniform in [-V, V].
// The p-power factor sits on the LEFT: with it on the right the straightened
// points g^-1 L0 all collapse onto the diagonal apartment and every class
// vector has even parity, so the probe would never leave the trivial stratum.
// Rejected digit draws burn a whole derived stream so parallel schedules
// cannot perturb later samples.
PMatrix random_sample(const Ctx& ctx, size_t n, int val_bound, std::uint64_t seed,
                      std::uint64_t index) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        SplitMix64 rng = derive_stream(seed, {index, attempt});
        PMatrix u(ctx, n, n);
        std::vector<long> residues(n * n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                u.at(i, j) = random_padic_integer(ctx, rng, residues[i * n + j]);
        if (det_mod_p(residues, n, ctx->p) == 0) continue;
        std::vector<long> e(n);
        for (long& v : e)
            v = -val_bound + static_cast<long>(rng.below(static_cast<std::uint64_t>(2 * val_bound + 1)));
        return PMatrix::diagonal_p_powers(ctx, e) * u;
    }
}

SampleRecord run_sample(const SymmetricSpaceContext& ssc, int val_bound, std::uint64_t seed,
                        std::uint64_t index) {
    PMatrix g = random_sample(ssc.ctx(), ssc.n(), val_bound, seed, index);
    KAHWitness w = kah_decompose(g, ssc);
    SampleRecord rec;
    rec.index = index;
    rec.class_key = class_vector_key(w.s);
    rec.bound = displacement(w.k);
    // k = k0 gamma_s with k0 unimodular, so k and the table witness move the
    // base vertex equally; anything else is a pipeline bug
    if (rec.bound != displacement(ssc.witness_for(w.s)))
        throw InternalInvariantError("compact factor displacement differs from its class witness");
    if (ssc.n() == 2) {
        SigmaApartmentRef apt = sigma_apartment_from_witness(w, ssc);
        LatticeClass x(g.lifted(ssc.work_ctx()).inverse());
        rec.exact = distance_to_sigma_apartment(x, apt);
        rec.has_exact = true;
    }
    return rec;
}

}  // namespace

ExperimentReport quasi_density_experiment(const SymmetricSpaceContext& ssc,
                                          std::uint64_t samples, int val_bound,
                                          std::uint64_t seed, int jobs) {
    if (ssc.n() < 2 || ssc.n() > 3) throw UsageError("experiment is desk scale: n in {2, 3}");
    if (val_bound < 0 || val_bound > 10) throw UsageError("valuation bound must lie in [0, 10]");
    if (samples == 0) throw UsageError("experiment needs at least one sample");

    ExperimentReport rep;
    rep.p = ssc.ctx()->p;
    rep.n = ssc.n();
    rep.val_bound = val_bound;
    rep.samples = samples;
    rep.seed = seed;
    rep.additive_constant = sum_zero_covering_radius(ssc.n());
    rep.rows.resize(samples);

    if (jobs == 1) {
        for (std::uint64_t i = 0; i < samples; ++i)
            rep.rows[i] = run_sample(ssc, val_bound, seed, i);
    } else {
#ifdef _OPENMP
        const int threads = jobs > 0 ? jobs : omp_get_max_threads();
        std::exception_ptr err;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (long long i = 0; i < static_cast<long long>(samples); ++i) {
            try {
                rep.rows[static_cast<size_t>(i)] =
                    run_sample(ssc, val_bound, seed, static_cast<std::uint64_t>(i));
            } catch (...) {
#pragma omp critical
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
#else
        for (std::uint64_t i = 0; i < samples; ++i)
            rep.rows[i] = run_sample(ssc, val_bound, seed, i);
#endif
    }

    for (const SampleRecord& r : rep.rows) {
        rep.c_emp = std::max(rep.c_emp, r.bound);
        ClassBoundStat& st = rep.per_class[r.class_key];
        ++st.count;
        st.max_disp = std::max(st.max_disp, r.bound);
    }
    return rep;
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json j;
    j["p"] = p;
    j["n"] = n;
    j["V"] = val_bound;
    j["samples"] = samples;
    j["seed"] = seed;
    j["C_emp"] = c_emp;
    j["additive_constant"] = additive_constant;
    nlohmann::json pc(nlohmann::json::value_t::object);
    for (const auto& [key, st] : per_class)
        pc[key] = {{"count", st.count}, {"max_disp", st.max_disp}};
    j["per_class"] = pc;
    std::map<double, std::uint64_t> hist;
    for (const SampleRecord& r : rows) ++hist[r.bound];
    nlohmann::json ha = nlohmann::json::array();
    for (const auto& [b, c] : hist) ha.push_back({{"bound", b}, {"count", c}});
    j["histogram"] = ha;
    if (!rows.empty() && rows.front().has_exact) {
        double max_exact = 0.0, slack_min = 0.0, slack_max = 0.0, slack_sum = 0.0;
        bool first = true;
        for (const SampleRecord& r : rows) {
            max_exact = std::max(max_exact, r.exact);
            const double slack = r.bound + additive_constant - r.exact;
            slack_min = first ? slack : std::min(slack_min, slack);
            slack_max = first ? slack : std::max(slack_max, slack);
            slack_sum += slack;
            first = false;
        }
        j["exact_stats"] = {{"max_exact", max_exact},
                            {"slack_min", slack_min},
                            {"slack_max", slack_max},
                            {"slack_mean", slack_sum / static_cast<double>(rows.size())}};
    }
    return j;
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "index,class,bound,exact\n";
    for (const SampleRecord& r : rows) {
        os << r.index << ",\"" << r.class_key << "\"," << r.bound << ',';
        if (r.has_exact) os << r.exact;
        os << '\n';
    }
    return os.str();
}

}  // namespace ppolar
