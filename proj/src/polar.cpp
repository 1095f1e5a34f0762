#include "ppolar/polar.hpp"

#include <sstream>
#include <utility>

namespace ppolar {

std::string class_vector_key(const std::vector<SquareClass>& s) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ',';
        out += s[i].name();
    }
    return out;
}

std::vector<SquareClass> class_vector_from_key(const std::string& key) {
    std::vector<SquareClass> out;
    std::stringstream ss(key);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(SquareClass::from_name(tok));
    return out;
}

namespace {

QuadraticForm validate_base(QuadraticForm q0) {
    if (!q0.gram().is_diagonal()) throw UsageError("base form must have a diagonal gram matrix");
    for (size_t i = 0; i < q0.dim(); ++i)
        if (q0.gram().at(i, i).valuation() != 0)
            throw UsageError("base form entries must be units");
    return q0;
}

}  // namespace

SymmetricSpaceContext::SymmetricSpaceContext(QuadraticForm q0, int work_pad)
    : q0_(validate_base(std::move(q0))),
      work_ctx_(PrimeContext::make(
          q0_.ctx()->p, std::min(q0_.ctx()->precision + std::max(work_pad, 0), kMaxPrecision))),
      q0w_(q0_.gram().lifted(work_ctx_)) {}

PMatrix SymmetricSpaceContext::witness_for(const std::vector<SquareClass>& s) const {
    if (s.size() != n()) throw UsageError("class vector dimension mismatch");
    const std::string key = class_vector_key(s);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = table_.find(key);
        if (it != table_.end()) return it->second;
    }
    std::vector<PadicScalar> reps(n());
    for (size_t i = 0; i < n(); ++i) reps[i] = class_representative(work_ctx_, s[i]);
    PMatrix gamma = [&] {
        try {
            return witt_isometry(QuadraticForm::diagonal_form(work_ctx_, reps), q0w_);
        } catch (const InvariantMismatchError&) {
            // callers only reach here with class vectors of forms congruent
            // to q0, so a mismatch means the pipeline itself is broken
            throw InternalInvariantError("witness class vector is not equivalent to the base form");
        }
    }();
    PMatrix check = gamma.transpose() * PMatrix::diagonal(work_ctx_, reps) * gamma;
    if (matrix_agreement_abs_valuation(check, q0w_.gram()) < work_ctx_->precision - 16)
        throw InternalInvariantError("witness fails its defining identity");
    std::lock_guard<std::mutex> lock(mu_);
    table_.insert_or_assign(key, gamma);
    return gamma;
}

size_t SymmetricSpaceContext::witness_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return table_.size();
}

nlohmann::json KAHWitness::to_json() const {
    nlohmann::json j;
    j["k"] = k.to_json();
    nlohmann::json names = nlohmann::json::array();
    for (const auto& c : s) names.push_back(c.name());
    j["s"] = names;
    j["a"] = a.to_json();
    j["h"] = h.to_json();
    return j;
}

KAHWitness KAHWitness::from_json(const Ctx& ctx, const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("k") || !j.contains("s") || !j.contains("a") ||
        !j.contains("h"))
        throw UsageError("witness json: missing fields");
    KAHWitness w{PMatrix::from_json(ctx, j["k"]),
                 {},
                 PMatrix::from_json(ctx, j["a"]),
                 PMatrix::from_json(ctx, j["h"])};
    for (const auto& name : j["s"]) w.s.push_back(SquareClass::from_name(name.get<std::string>()));
    return w;
}

KAHWitness kah_decompose(const PMatrix& g, const SymmetricSpaceContext& ssc) {
    if (!g.square() || g.rows() != ssc.n()) throw UsageError("group element dimension mismatch");
    const Ctx& wc = ssc.work_ctx();
    PMatrix gw = g.lifted(wc);
    // Gram of q0 composed with g^-1: the form the decomposition straightens
    QuadraticForm qb = ssc.q0_work().congruent(gw.inverse());
    SupDiagonalization sd = diagonalize_sup(qb);
    SquareClassSplit sp = square_class_split(sd.d);
    PMatrix gamma = ssc.witness_for(sp.s);

    std::vector<PadicScalar> tinv(ssc.n());
    for (size_t i = 0; i < ssc.n(); ++i) tinv[i] = sp.t[i].inv();
    PMatrix a = PMatrix::diagonal(wc, tinv);
    PMatrix h = gamma.inverse() * PMatrix::diagonal(wc, sp.t) * sd.u.inverse() * gw;
    return {sd.u * gamma, std::move(sp.s), std::move(a), std::move(h)};
}

PMatrix kah_reconstruct(const KAHWitness& w, const SymmetricSpaceContext& ssc) {
    const Ctx& wc = ssc.work_ctx();
    PMatrix gamma = ssc.witness_for(w.s);
    return w.k.lifted(wc) * gamma.inverse() * w.a.lifted(wc) * gamma * w.h.lifted(wc);
}

nlohmann::json WitnessReport::to_json() const {
    nlohmann::json j;
    j["reconstruct"] = reconstruct_valuation;
    j["integral"] = k_integral;
    j["diagonal"] = a_diagonal;
    j["H_membership"] = h_membership_valuation;
    return j;
}

WitnessReport verify_witness(const PMatrix& g, const KAHWitness& w,
                             const SymmetricSpaceContext& ssc) {
    WitnessReport r;
    const Ctx& wc = ssc.work_ctx();
    PMatrix gamma = ssc.witness_for(w.s);
    r.reconstruct_valuation =
        matrix_agreement_abs_valuation(kah_reconstruct(w, ssc), g.lifted(wc));
    r.k_integral = (w.k.lifted(wc) * gamma.inverse()).is_integral_unit();
    r.a_diagonal = w.a.square() && w.a.rows() == ssc.n() && w.a.is_diagonal();
    const PMatrix& b0 = ssc.q0_work().gram();
    PMatrix hw = w.h.lifted(wc);
    r.h_membership_valuation = matrix_agreement_abs_valuation(hw.transpose() * b0 * hw, b0);
    return r;
}

double displacement(const PMatrix& m) {
    return centered_norm(smith_cartan(m).exponents);
}

std::map<std::string, ClassUsage> witness_usage_stats(const std::vector<PMatrix>& samples,
                                                      const SymmetricSpaceContext& ssc) {
    std::map<std::string, ClassUsage> out;
    for (const auto& g : samples) {
        KAHWitness w = kah_decompose(g, ssc);
        ClassUsage& u = out[class_vector_key(w.s)];
        ++u.count;
        u.max_k_displacement = std::max(u.max_k_displacement, displacement(w.k));
    }
    return out;
}

}  // namespace ppolar
