#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlock/dark.hpp"
#include "qlock/model.hpp"
#include "qlock/rng.hpp"
#include "qlock/state.hpp"

namespace qlock {

enum class Region { Main, Transit, Control };
enum class DetectorId { D1, D2, Lost };
enum class VerifyMode { Abstract, Exact };
enum class Decision { Accept, Reject };

std::string to_string(Region r);
std::string to_string(DetectorId d);
std::string to_string(VerifyMode m);
std::string to_string(Decision d);

struct DetectorModel {
    double eta1 = 1.0;                // D1 (main cavity) efficiency
    double eta2 = 1.0;                // D2 (control cavity) efficiency
    double p_transit_loss = 0.0;      // transit emission escapes both cavities
    double asynchrony_epsilon = 0.0;  // correct pair emits during movement

    static DetectorModel ideal() { return {}; }
    void validate() const;
};

struct ProtocolOptions {
    // where a moving atom's photon is emitted: main / transit / control
    std::array<double, 3> location_split{0.4, 0.2, 0.4};
    int max_switchings = 16;
    // per-switching probability that an excitation-holding control pair emits
    double s_jump_bright_fraction = 1.0;
    bool early_exit = true;   // stop at the first failing pair
    int exact_steps = 32;     // schedule steps per movement phase (exact mode)

    void validate() const;
};

struct EmissionEvent {
    Region location = Region::Main;
    DetectorId detector = DetectorId::Lost;
};

struct PairTrialEvent {
    std::array<int, 2> pair{0, 0};
    bool match = false;  // pair belongs to the secret key
    std::vector<EmissionEvent> emissions;
    bool s_jump_click = false;
    int s_jump_switchings = 0;
    bool passed = false;
};

struct Transcript {
    Decision decision = Decision::Reject;
    VerifyMode mode = VerifyMode::Abstract;
    std::uint64_t seed = 0;
    std::vector<PairTrialEvent> events;
    int rejecting_pair_index = -1;  // -1 when accepted
};

nlohmann::json transcript_to_json(const Transcript& t);

// The lock: secret key, both cavities, and (optionally materialized) the
// public working state |Psi_K>.
struct LockInstance {
    PairSplitting secret_key;
    ModelParams main_params;
    ModelParams control_params;
    std::optional<StateVector> state;  // splitting_state(key, g), sector-restricted
};

// Uniformly random secret key plus its working state. The state is verified
// dark before returning; pass build_state = false for bulk statistics runs
// that never touch amplitudes.
LockInstance forge_lock(int n_atoms, const ModelParams& params, std::uint64_t seed,
                        bool build_state = true);

// One verification run (sampled). Deterministic for fixed inputs and seed.
Transcript verify(const LockInstance& lock, const PairSplitting& password,
                  const DetectorModel& det, VerifyMode mode, const ProtocolOptions& opts,
                  std::uint64_t seed);

// Exact accept probability over the full probabilistic event tree (no
// sampling). Zero-probability branches are pruned, so ideal-model runs
// resolve to exactly 0 or 1.
double enumerate_accept_probability(const PairSplitting& key, const ModelParams& main_params,
                                    const ModelParams& control_params,
                                    const PairSplitting& password, const DetectorModel& det,
                                    VerifyMode mode, const ProtocolOptions& opts);

// P(trial fails | a correct pair emitted during movement): the event tree over
// emission location and detection. Under the implemented semantics every such
// emission forfeits the pair (detected -> movement click; undetected -> both
// atoms ground, so the S-jump stays silent), hence 1 for every configuration.
double asynchrony_reject_probability(const DetectorModel& det, const ProtocolOptions& opts);

// Static bright fraction of a pair state against the instantaneous dark
// direction for couplings (g_first, g_second); used to exhibit the 1/2 limit
// as one coupling goes to zero.
double pair_bright_fraction(const StateVector& pair_state, double g_first, double g_second);

// One broken singlet resolved through the abstract movement model (the moving
// atom leaves, its partner stays behind).
struct BrokenSingletResolution {
    bool prompt_emission = false;
    bool excitation_on_moved = false;          // when no prompt emission fired
    std::optional<EmissionEvent> emission;     // prompt photon or entry radiation
};
BrokenSingletResolution sample_broken_singlet(const DetectorModel& det,
                                              const ProtocolOptions& opts, StreamRng& rng);

// S-jump confirmation on a control pair (abstract resolution).
struct SJumpResult {
    bool click = false;
    int switchings = 0;
};
SJumpResult sample_s_jump(bool excitation_present, const DetectorModel& det,
                          const ProtocolOptions& opts, StreamRng& rng);

// Exact-mode movement of one password pair out of the freshly forged lock
// state: emission probability accumulated along the no-jump trajectory and
// the conditional post-move state of the affected atoms (zero vector when the
// excitation is emitted with certainty).
struct ExactMoveResult {
    double emission_probability = 0.0;
    StateVector post_move_state;
};
ExactMoveResult move_pair_exact(const PairSplitting& key, const ModelParams& main_params,
                                const ModelParams& control_params,
                                std::array<int, 2> password_pair,
                                const ProtocolOptions& opts);

} // namespace qlock
