#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "qlock/model.hpp"
#include "qlock/protocol.hpp"

namespace qlock {

using BigInt = boost::multiprecision::cpp_int;

// Number of perfect matchings of n atoms: (n-1)!! = 1 * 3 * ... * (n-1),
// exact integer arithmetic.
BigInt matchings_count(int n_atoms);

// 1 / matchings_count as a double.
double guess_probability(int n_atoms);

// Minimal even n with guess_probability(n) <= p_target.
int key_length_for_target(double p_target);

struct RateEstimate {
    double rate = 0.0;
    double std_error = 0.0;  // binomial formula
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
};

enum class AdversaryModel { RandomPassword, OnePairOff };

std::string to_string(AdversaryModel a);

// Monte Carlo false-accept rate: fresh lock and adversary password per trial.
// Per-trial RNG streams keyed by (seed, "far-trial", index); aggregation is an
// integer sum, so results are identical at any thread count.
RateEstimate false_accept_rate(int n_atoms, const ModelParams& params,
                               const DetectorModel& det, AdversaryModel adversary,
                               std::uint64_t n_trials, std::uint64_t seed,
                               VerifyMode mode = VerifyMode::Abstract,
                               const ProtocolOptions& opts = {}, int threads = 1);

// Monte Carlo false-reject rate with password = key.
RateEstimate false_reject_rate(int n_atoms, const ModelParams& params,
                               const DetectorModel& det, std::uint64_t n_trials,
                               std::uint64_t seed, VerifyMode mode = VerifyMode::Abstract,
                               const ProtocolOptions& opts = {}, int threads = 1);

struct ResamplingSummary {
    double mean_attempts = 0.0;
    std::uint64_t max_attempts = 0;
    std::uint64_t trials = 0;
};

// Attempts-to-success distribution of a resampling random-password adversary
// (fresh password per attempt against a fixed fresh lock, ideal-model attacks
// succeed only by guessing the key).
ResamplingSummary resampling_attempts(int n_atoms, const ModelParams& params,
                                      const DetectorModel& det, std::uint64_t n_trials,
                                      std::uint64_t seed, std::uint64_t attempt_cap = 1u << 24);

struct SecurityGridPoint {
    double eta1 = 1, eta2 = 1, p_loss = 0, epsilon = 0;
    RateEstimate far;
    RateEstimate frr;
};

struct SecurityReport {
    int n_atoms = 0;
    BigInt matchings;
    double guess_prob = 0.0;
    double target = 1e-8;
    bool meets_target = false;
    int minimal_n_for_target = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<SecurityGridPoint> grid;
};

SecurityReport security_report(int n_atoms, const ModelParams& params,
                               const std::vector<DetectorModel>& grid, std::uint64_t n_trials,
                               std::uint64_t seed, double target = 1e-8,
                               AdversaryModel adversary = AdversaryModel::RandomPassword,
                               int threads = 1);

nlohmann::json report_to_json(const SecurityReport& r);
// columns: eta1,eta2,p_loss,epsilon,n,far,far_stderr,frr,frr_stderr,trials,seed
std::string report_grid_csv(const SecurityReport& r);

} // namespace qlock
