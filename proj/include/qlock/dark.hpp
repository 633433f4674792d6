#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qlock/model.hpp"
#include "qlock/rng.hpp"
#include "qlock/state.hpp"

namespace qlock {

// A partial matching of the atom index set: every atom in at most one pair.
// A complete splitting covers all n_atoms (n even). Serves as both the secret
// key and candidate passwords.
struct PairSplitting {
    int n_atoms = 0;
    std::vector<std::array<int, 2>> pairs;  // stored with i < j, sorted by first element

    // sorts into canonical form and checks the matching invariants
    void canonicalize();

    bool complete() const;
    bool covers(int atom) const;
    // partner of `atom`, or -1 when unmatched
    int partner(int atom) const;

    bool operator==(const PairSplitting&) const = default;
};

// Secret-key file format and password wire format:
// {"n_atoms": int, "pairs": [[i, j], ...]} with i < j, sorted by first element.
nlohmann::json splitting_to_json(const PairSplitting& k);
PairSplitting splitting_from_json(const nlohmann::json& j);

// All perfect matchings of {0..n-1}; (n-1)!! of them.
std::vector<PairSplitting> enumerate_matchings(int n_atoms);

// Uniformly random perfect matching: shuffle, then pair consecutive entries.
PairSplitting random_matching(int n_atoms, StreamRng& rng);

// sigma-bar = sum_i g_i sigma_i applied to an atomic state. A sector-m input
// yields a sector-(m-1) output; unrestricted inputs stay unrestricted.
StateVector apply_lowering(const StateVector& atomic, std::span<const double> g);
// The raising counterpart sum_i g_i sigma_i+ (no-absorption checks).
StateVector apply_raising(const StateVector& atomic, std::span<const double> g);

// Matrix of sigma-bar from the given atomic space into its image space
// (the same space when unrestricted, sector m-1 when restricted).
Eigen::MatrixXcd collective_lowering_matrix(std::span<const double> g, const Space& from);

struct DarknessCheck {
    bool dark = false;
    double residual = 0.0;  // ||sigma-bar psi|| / ||psi||
};

// Dark iff the state cannot emit: ||sigma-bar psi|| <= tol relative to norm.
DarknessCheck is_dark(const StateVector& atomic, std::span<const double> g,
                      double tol = 1e-10);

// Normalized two-atom singlet g_i|0_i 1_j> - g_j|1_i 0_j> over atoms {i, j}
// (the pairwise-equivalent reduction of the gamma-weighted form; swapping the
// arguments flips the global sign). Zero couplings are refused.
StateVector singlet_pair(int i, int j, std::span<const double> g);

// Tensor product of singlet factors over the pairs of K; unmatched atoms are
// appended as |0> spectators when requested. Result is dark by construction
// and carries a sector restriction (one excitation per pair).
StateVector splitting_state(const PairSplitting& k, std::span<const double> g,
                            bool include_spectators = true);

// dim Ker(sigma-bar) restricted to the m-excitation atomic subspace, by
// singular values with threshold 1e-10 * max.
int dark_dimension(std::span<const double> g, int n_atoms, int m);

struct EigenstateCheck {
    bool is_eigenstate = false;
    double eigenvalue = 0.0;   // Rayleigh quotient <psi|H|psi>
    double residual = 0.0;     // ||H psi - E psi||
    double dark_residual = 0.0;
};

// Verifies H (psi_at x |0>_ph) = E (psi_at x |0>_ph); for delta = 0 and a
// definite excitation m the eigenvalue is m * omega. Non-dark inputs report
// failure with their residuals.
EigenstateCheck is_dark_eigenstate(const StateVector& atomic, const ModelParams& params,
                                   double tol = 1e-10);

} // namespace qlock
