#include "qlock/prep.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qlock/parallel.hpp"
#include "qlock/rng.hpp"

namespace qlock {

void StarkJumpSpec::validate(int n_atoms) const {
    if (target_atom < 0 || target_atom >= n_atoms)
        throw std::invalid_argument("stark jump: target atom out of range");
    if (!(hold_time_max > 0))
        throw std::invalid_argument("stark jump: hold_time_max must be positive");
    if (!std::isfinite(ds) || !std::isfinite(dg))
        throw std::invalid_argument("stark jump: shifts must be finite");
}

double default_hold_time_max(const ModelParams& params) {
    const auto g = params.couplings();
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    if (!(mean > 0)) throw std::domain_error("mean coupling must be positive");
    return 20.0 * std::numbers::pi / mean;
}

ModelParams shifted_params(const ModelParams& params, const StarkJumpSpec& spec) {
    spec.validate(params.n_atoms());
    ModelParams out = params;
    AtomConfig& a = out.atoms[spec.target_atom];
    a.delta += spec.ds;
    if (spec.dg != 0.0) a.g_override = params.coupling(spec.target_atom) + spec.dg;
    return out;
}

PairPrepSystem::PairPrepSystem(const ModelParams& params, const StarkJumpSpec& spec)
    : spec_(spec),
      sector_(Space::sector(2, 1, 1)),
      evolver_(build_hamiltonian(shifted_params(params, spec), Space::sector(2, 1, 1))) {
    if (params.n_atoms() != 2)
        throw std::invalid_argument("pair preparation expects exactly two atoms");
    spec_.validate(2);

    psi0_ = Eigen::VectorXcd::Zero(3);
    BasisState photon_in;
    photon_in.photon = 1;
    photon_in.bits = {0, 0};
    psi0_[static_cast<Eigen::Index>(sector_.index_of(photon_in))] = 1.0;

    // dark singlet of the *unshifted* couplings, vacuum photon slot
    const auto g = params.couplings();
    const StateVector s = singlet_pair(0, 1, g);
    target_ = Eigen::VectorXcd::Zero(3);
    for (std::size_t i = 0; i < s.dim(); ++i) {
        BasisState b = s.space().basis_at(i);
        b.photon = 0;
        target_[static_cast<Eigen::Index>(sector_.index_of(b))] = s[i];
    }

    const Eigen::MatrixXcd& v = evolver_.eigenvectors();
    overlap_coeffs_ = (v.adjoint() * target_).conjugate().cwiseProduct(v.adjoint() * psi0_);
}

double PairPrepSystem::singlet_probability(double dt) const {
    cdouble acc = 0.0;
    const Eigen::VectorXd& e = evolver_.eigenvalues();
    for (Eigen::Index k = 0; k < 3; ++k)
        acc += overlap_coeffs_[k] * std::exp(cdouble(0.0, -e[k] * dt));
    return std::norm(acc);
}

PrepOutcome PairPrepSystem::trajectory(double dt) const {
    if (dt < 0) throw std::invalid_argument("hold time must be non-negative");
    PrepOutcome out;
    out.hold_time = dt;
    const StateVector psi(sector_, evolver_.evolve(psi0_, dt));
    out.singlet_probability = std::norm(target_.dot(psi.amplitudes()));
    PhotonProjection proj = project_photon_number(psi, 0);
    out.post_state = std::move(proj.atomic_state);
    out.zero_photon_probability = proj.probability;
    out.empty = proj.empty;
    return out;
}

double PairPrepSystem::yield_quadrature() const {
    // mean over [0,T] of |sum_k a_k e^{-i E_k t}|^2
    //   = sum_{k,l} a_k conj(a_l) * phi((E_k - E_l) T),  phi(x) = (1 - e^{-ix}) / (ix)
    const double T = spec_.hold_time_max;
    const Eigen::VectorXd& e = evolver_.eigenvalues();
    cdouble acc = 0.0;
    for (Eigen::Index k = 0; k < 3; ++k) {
        for (Eigen::Index l = 0; l < 3; ++l) {
            const double d = e[k] - e[l];
            cdouble phi;
            if (std::abs(d * T) < 1e-12) {
                phi = 1.0;
            } else {
                phi = (1.0 - std::exp(cdouble(0.0, -d * T))) / cdouble(0.0, d * T);
            }
            acc += overlap_coeffs_[k] * std::conj(overlap_coeffs_[l]) * phi;
        }
    }
    return std::max(0.0, acc.real());
}

double PairPrepSystem::infinite_time_average() const {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < 3; ++k) acc += std::norm(overlap_coeffs_[k]);
    return acc;
}

PrepOutcome prep_trajectory(const ModelParams& params, const StarkJumpSpec& spec, double dt) {
    return PairPrepSystem(params, spec).trajectory(dt);
}

YieldEstimate prep_yield_mc(const ModelParams& params, const StarkJumpSpec& spec,
                            std::uint64_t n_samples, std::uint64_t seed, int threads) {
    if (n_samples == 0) throw std::invalid_argument("prep_yield_mc: need at least one sample");
    const PairPrepSystem sys(params, spec);
    const double T = spec.hold_time_max;

    std::vector<double> values(n_samples);
    parallel_for_indexed(n_samples, threads, [&](std::size_t i) {
        StreamRng rng(seed, "prep-yield", i);
        values[i] = sys.singlet_probability(rng.uniform(0.0, T));
    });

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n_samples);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var = n_samples > 1 ? var / (static_cast<double>(n_samples) - 1.0) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n_samples)), n_samples};
}

double prep_yield_quadrature(const ModelParams& params, const StarkJumpSpec& spec) {
    return PairPrepSystem(params, spec).yield_quadrature();
}

nlohmann::json prep_log_to_json(const std::vector<PairAttempts>& log) {
    auto j = nlohmann::json::array();
    for (const auto& a : log)
        j.push_back({{"pair", {a.pair[0], a.pair[1]}}, {"attempts", a.attempts}});
    return j;
}

ModelParams params_for_pair(const ModelParams& params, int i, int j) {
    if (i < 0 || j < 0 || i >= params.n_atoms() || j >= params.n_atoms() || i == j)
        throw std::invalid_argument("params_for_pair: bad atom pair");
    ModelParams out;
    out.cavity = params.cavity;
    out.atoms = {params.atoms[std::min(i, j)], params.atoms[std::max(i, j)]};
    return out;
}

PrepRun prepare_splitting(const ModelParams& params, const PairSplitting& k,
                          const StarkJumpSpec& spec_template, std::uint64_t seed,
                          int max_attempts_per_pair) {
    PairSplitting kk = k;
    kk.canonicalize();
    if (!kk.complete())
        throw std::invalid_argument("prepare_splitting requires a complete splitting");
    if (params.n_atoms() != kk.n_atoms)
        throw std::invalid_argument("params and splitting disagree on atom count");

    PrepRun run;
    for (std::size_t pi = 0; pi < kk.pairs.size(); ++pi) {
        const auto& p = kk.pairs[pi];
        ModelParams pair_params = params_for_pair(params, p[0], p[1]);
        StarkJumpSpec spec = spec_template;
        spec.target_atom = 0;
        const PairPrepSystem sys(pair_params, spec);

        StreamRng rng(seed, "prep-pair", pi);
        int attempts = 0;
        for (;;) {
            if (attempts >= max_attempts_per_pair)
                throw std::runtime_error("prepare_splitting: attempt cap reached for pair " +
                                         std::to_string(p[0]) + "-" + std::to_string(p[1]) +
                                         " (yield too small or zero)");
            ++attempts;
            const double dt = rng.uniform(0.0, spec.hold_time_max);
            if (rng.bernoulli(sys.singlet_probability(dt))) break;
        }
        run.attempts_log.push_back({{p[0], p[1]}, attempts});
    }
    run.state = splitting_state(kk, params.couplings());
    return run;
}

} // namespace qlock
