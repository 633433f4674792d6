#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

namespace qlock {

// Natural units: hbar = 1, energies in units of the photon frequency unless
// configured otherwise.
struct CavityParams {
    double omega = 1.0;  // photon angular frequency
    double L = 1.0;      // cavity length
    double V = 1.0;      // effective mode volume
    double d_a = 1.0;    // atomic dipole moment

    void validate() const;  // all strictly positive
};

struct AtomConfig {
    double x = 0.0;      // position along the main axis, 0 <= x <= L
    double delta = 0.0;  // detuning of the atomic transition from omega
    std::optional<double> g_override;  // explicit coupling (movement schedules)
};

struct ModelParams {
    CavityParams cavity;
    std::vector<AtomConfig> atoms;

    int n_atoms() const { return static_cast<int>(atoms.size()); }

    // g_i = sqrt(omega/V) * d_a * sin(pi x_i / L), unless overridden.
    double coupling(int atom_index) const;
    std::vector<double> couplings() const;

    // true when max g_i >= 0.1 * omega (outside the weak-interaction regime
    // the model was written for; warned, not enforced)
    bool rwa_warning() const;

    void validate() const;
};

// omega = V = d_a = L = 1, atoms evenly spaced on (0, L) excluding endpoints:
// x_i = (i+1)/(n+1).
ModelParams default_params(int n_atoms);

nlohmann::json params_to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

} // namespace qlock
