#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qlock/dark.hpp"
#include "qlock/hamiltonian.hpp"
#include "qlock/model.hpp"
#include "qlock/state.hpp"

namespace qlock {

// The S jump: hold the target atom at (omega + ds, g + dg) for a random time,
// then abruptly restore the unshifted parameters.
struct StarkJumpSpec {
    int target_atom = 0;
    double ds = 0.0;            // detuning added during the hold
    double dg = 0.0;            // coupling added during the hold
    double hold_time_max = 0.0; // hold time ~ Uniform[0, hold_time_max]

    void validate(int n_atoms) const;
};

// 20 pi / g-bar: several vacuum-Rabi periods at the mean coupling.
double default_hold_time_max(const ModelParams& params);

// Copy of params with the target atom's delta += ds and coupling += dg.
ModelParams shifted_params(const ModelParams& params, const StarkJumpSpec& spec);

struct PrepOutcome {
    double singlet_probability = 0.0;  // |<singlet x vac|psi(dt)>|^2, post-jump couplings
    double hold_time = 0.0;
    StateVector post_state;            // conditional atomic state given zero photons
    double zero_photon_probability = 0.0;
    bool empty = false;                // no zero-photon component at all
};

// Single-excitation machinery for one atom pair: |psi(0)> = |1>_p |00>_a
// evolving under the shifted Hamiltonian in the 3-dimensional sector
// span{|1,00>, |0,10>, |0,01>}.
class PairPrepSystem {
public:
    PairPrepSystem(const ModelParams& two_atom_params, const StarkJumpSpec& spec);

    // squared overlap with the dark singlet of the *unshifted* couplings
    double singlet_probability(double dt) const;
    PrepOutcome trajectory(double dt) const;

    // exact mean of singlet_probability over Uniform[0, hold_time_max]
    double yield_quadrature() const;

    double hold_time_max() const { return spec_.hold_time_max; }
    const Eigen::VectorXd& shifted_eigenvalues() const { return evolver_.eigenvalues(); }
    // |<singlet|v_k>|^2 |<v_k|psi0>|^2 summed: the infinite-time average
    double infinite_time_average() const;

private:
    StarkJumpSpec spec_;
    Space sector_;
    SpectralEvolver evolver_;
    Eigen::VectorXcd psi0_;
    Eigen::VectorXcd target_;           // singlet x vac in sector coordinates
    Eigen::VectorXcd overlap_coeffs_;   // a_k = <s|v_k><v_k|psi0>
};

PrepOutcome prep_trajectory(const ModelParams& two_atom_params, const StarkJumpSpec& spec,
                            double dt);

struct YieldEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
};

// Monte Carlo mean over the hold-time distribution; per-sample RNG streams
// derived from (seed, "prep-yield", sample index), bit-identical for a fixed
// seed at any thread count.
YieldEstimate prep_yield_mc(const ModelParams& two_atom_params, const StarkJumpSpec& spec,
                            std::uint64_t n_samples, std::uint64_t seed, int threads = 1);

double prep_yield_quadrature(const ModelParams& two_atom_params, const StarkJumpSpec& spec);

struct PairAttempts {
    std::array<int, 2> pair;
    int attempts = 0;
};

struct PrepRun {
    StateVector state;                 // splitting_state(K, g), by construction
    std::vector<PairAttempts> attempts_log;
};

// Rejection-sampling preparation of a complete splitting: per pair, repeat the
// S-jump procedure until the no-photon post-selection lands on the singlet.
// The template spec's ds/dg/hold_time_max apply to each pair's first atom.
PrepRun prepare_splitting(const ModelParams& params, const PairSplitting& k,
                          const StarkJumpSpec& spec_template, std::uint64_t seed,
                          int max_attempts_per_pair = 1'000'000);

// Restriction of params to the two atoms of one pair (preserves positions,
// detunings and overrides).
ModelParams params_for_pair(const ModelParams& params, int i, int j);

// Prep log wire format: [{"pair": [i, j], "attempts": int}, ...]
nlohmann::json prep_log_to_json(const std::vector<PairAttempts>& log);

} // namespace qlock
