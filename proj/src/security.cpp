#include "qlock/security.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qlock/parallel.hpp"

namespace qlock {

BigInt matchings_count(int n_atoms) {
    if (n_atoms < 2 || n_atoms % 2 != 0)
        throw std::invalid_argument("matchings_count requires even n >= 2");
    BigInt acc = 1;
    for (int k = 1; k < n_atoms; k += 2) acc *= k;
    return acc;
}

double guess_probability(int n_atoms) {
    return 1.0 / matchings_count(n_atoms).convert_to<double>();
}

int key_length_for_target(double p_target) {
    if (!(p_target > 0.0) || !(p_target < 1.0))
        throw std::invalid_argument("target probability must lie in (0, 1)");
    for (int n = 2;; n += 2) {
        if (guess_probability(n) <= p_target) return n;
        if (n > 1000) throw std::runtime_error("key length search ran away");
    }
}

std::string to_string(AdversaryModel a) {
    return a == AdversaryModel::RandomPassword ? "random-password" : "one-pair-off";
}

namespace {

RateEstimate binomial_estimate(std::uint64_t successes, std::uint64_t trials) {
    RateEstimate e;
    e.successes = successes;
    e.trials = trials;
    e.rate = static_cast<double>(successes) / static_cast<double>(trials);
    e.std_error = std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(trials));
    return e;
}

PairSplitting one_pair_off(const PairSplitting& key, StreamRng& rng) {
    // swap partners between two distinct key pairs: minimal wrong password
    PairSplitting pw = key;
    const std::size_t np = pw.pairs.size();
    if (np < 2) throw std::invalid_argument("one-pair-off needs at least two pairs");
    const std::size_t i = rng.uniform_int(np);
    std::size_t j = rng.uniform_int(np - 1);
    if (j >= i) ++j;
    auto& a = pw.pairs[i];
    auto& b = pw.pairs[j];
    if (rng.bernoulli(0.5)) std::swap(a[1], b[1]);
    else std::swap(a[1], b[0]);
    pw.canonicalize();
    return pw;
}

} // namespace

RateEstimate false_accept_rate(int n_atoms, const ModelParams& params,
                               const DetectorModel& det, AdversaryModel adversary,
                               std::uint64_t n_trials, std::uint64_t seed, VerifyMode mode,
                               const ProtocolOptions& opts, int threads) {
    if (n_trials == 0) throw std::invalid_argument("need at least one trial");
    std::vector<std::uint8_t> accepted(n_trials, 0);
    parallel_for_indexed(n_trials, threads, [&](std::size_t i) {
        StreamRng rng(seed, "far-trial", i);
        LockInstance lock = forge_lock(n_atoms, params, rng.bits(), /*build_state=*/false);
        PairSplitting password;
        if (adversary == AdversaryModel::RandomPassword) {
            password = random_matching(n_atoms, rng);
        } else {
            password = one_pair_off(lock.secret_key, rng);
        }
        const Transcript t = verify(lock, password, det, mode, opts, rng.bits());
        accepted[i] = t.decision == Decision::Accept ? 1 : 0;
    });
    std::uint64_t hits = 0;
    for (auto a : accepted) hits += a;
    return binomial_estimate(hits, n_trials);
}

RateEstimate false_reject_rate(int n_atoms, const ModelParams& params,
                               const DetectorModel& det, std::uint64_t n_trials,
                               std::uint64_t seed, VerifyMode mode,
                               const ProtocolOptions& opts, int threads) {
    if (n_trials == 0) throw std::invalid_argument("need at least one trial");
    std::vector<std::uint8_t> rejected(n_trials, 0);
    parallel_for_indexed(n_trials, threads, [&](std::size_t i) {
        StreamRng rng(seed, "frr-trial", i);
        LockInstance lock = forge_lock(n_atoms, params, rng.bits(), /*build_state=*/false);
        const Transcript t = verify(lock, lock.secret_key, det, mode, opts, rng.bits());
        rejected[i] = t.decision == Decision::Reject ? 1 : 0;
    });
    std::uint64_t hits = 0;
    for (auto r : rejected) hits += r;
    return binomial_estimate(hits, n_trials);
}

ResamplingSummary resampling_attempts(int n_atoms, const ModelParams& params,
                                      const DetectorModel& det, std::uint64_t n_trials,
                                      std::uint64_t seed, std::uint64_t attempt_cap) {
    if (n_trials == 0) throw std::invalid_argument("need at least one trial");
    ResamplingSummary out;
    out.trials = n_trials;
    double total = 0.0;
    for (std::uint64_t i = 0; i < n_trials; ++i) {
        StreamRng rng(seed, "resample-trial", i);
        LockInstance lock = forge_lock(n_atoms, params, rng.bits(), /*build_state=*/false);
        std::uint64_t attempts = 0;
        for (;;) {
            if (++attempts > attempt_cap)
                throw std::runtime_error("resampling adversary exceeded the attempt cap");
            const PairSplitting password = random_matching(n_atoms, rng);
            const Transcript t =
                verify(lock, password, det, VerifyMode::Abstract, {}, rng.bits());
            if (t.decision == Decision::Accept) break;
        }
        total += static_cast<double>(attempts);
        out.max_attempts = std::max(out.max_attempts, attempts);
    }
    out.mean_attempts = total / static_cast<double>(n_trials);
    return out;
}

SecurityReport security_report(int n_atoms, const ModelParams& params,
                               const std::vector<DetectorModel>& grid,
                               std::uint64_t n_trials, std::uint64_t seed, double target,
                               AdversaryModel adversary, int threads) {
    SecurityReport r;
    r.n_atoms = n_atoms;
    r.matchings = matchings_count(n_atoms);
    r.guess_prob = guess_probability(n_atoms);
    r.target = target;
    r.meets_target = r.guess_prob <= target;
    r.minimal_n_for_target = key_length_for_target(target);
    r.trials = n_trials;
    r.seed = seed;
    std::uint64_t grid_index = 0;
    for (const auto& det : grid) {
        SecurityGridPoint p;
        p.eta1 = det.eta1;
        p.eta2 = det.eta2;
        p.p_loss = det.p_transit_loss;
        p.epsilon = det.asynchrony_epsilon;
        const std::uint64_t far_seed = derive_stream_seed(seed, "far-grid", grid_index);
        const std::uint64_t frr_seed = derive_stream_seed(seed, "frr-grid", grid_index);
        p.far = false_accept_rate(n_atoms, params, det, adversary, n_trials, far_seed,
                                  VerifyMode::Abstract, {}, threads);
        p.frr = false_reject_rate(n_atoms, params, det, n_trials, frr_seed,
                                  VerifyMode::Abstract, {}, threads);
        r.grid.push_back(p);
        ++grid_index;
    }
    return r;
}

nlohmann::json report_to_json(const SecurityReport& r) {
    nlohmann::json j;
    j["n_atoms"] = r.n_atoms;
    j["matchings_count"] = r.matchings.str();  // exact decimal string
    j["guess_probability"] = r.guess_prob;
    j["target"] = r.target;
    j["meets_target"] = r.meets_target;
    j["minimal_n_for_target"] = r.minimal_n_for_target;
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    auto grid = nlohmann::json::array();
    for (const auto& p : r.grid) {
        nlohmann::json jp;
        jp["eta1"] = p.eta1;
        jp["eta2"] = p.eta2;
        jp["p_loss"] = p.p_loss;
        jp["epsilon"] = p.epsilon;
        jp["far"] = p.far.rate;
        jp["far_stderr"] = p.far.std_error;
        jp["frr"] = p.frr.rate;
        jp["frr_stderr"] = p.frr.std_error;
        grid.push_back(std::move(jp));
    }
    j["grid"] = std::move(grid);
    return j;
}

std::string report_grid_csv(const SecurityReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "eta1,eta2,p_loss,epsilon,n,far,far_stderr,frr,frr_stderr,trials,seed\n";
    for (const auto& p : r.grid) {
        os << p.eta1 << ',' << p.eta2 << ',' << p.p_loss << ',' << p.epsilon << ','
           << r.n_atoms << ',' << p.far.rate << ',' << p.far.std_error << ',' << p.frr.rate
           << ',' << p.frr.std_error << ',' << r.trials << ',' << r.seed << '\n';
    }
    return os.str();
}

} // namespace qlock
