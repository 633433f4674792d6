#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace qlock {

using cdouble = std::complex<double>;

// Binomial coefficient with C(n,k) = 0 outside 0 <= k <= n. Exact for the
// space sizes handled here (n <= 40).
std::uint64_t binomial(int n, int k);

// One basis label: photon number plus one bit per atom (0 ground, 1 excited).
// bits[i] belongs to space.atoms()[i]; the "big-endian" integer value of the
// bit string (bits[0] most significant) orders states within a photon block.
struct BasisState {
    int photon = 0;
    std::vector<std::uint8_t> bits;

    int excitation() const;
    std::uint32_t mask() const;
    static BasisState from_mask(int photon, std::uint32_t mask, int n_atoms);

    bool operator==(const BasisState&) const = default;
};

// Joint Hilbert space of one bosonic register (photon number <= cutoff; a
// cutoff of 0 pins the register to vacuum, which is how atoms-only states are
// represented) and a set of atoms with global labels. An optional sector
// restricts the basis to total excitation photon + sum(bits) == m.
//
// Canonical ordering: photon-major, then atomic bit strings by ascending
// big-endian integer value. Serialized states rely on this order.
class Space {
public:
    Space() = default;

    static Space full(int n_atoms, int photon_cutoff);
    static Space atomic(int n_atoms);
    static Space sector(int n_atoms, int photon_cutoff, int total_excitation);
    static Space atomic_sector(int n_atoms, int total_excitation);
    static Space photon_only(int photon_cutoff, std::optional<int> sector = std::nullopt);
    // Subsystem space over explicitly labeled atoms (labels strictly increasing).
    static Space labeled(std::vector<int> atom_labels, int photon_cutoff,
                         std::optional<int> sector);

    int n_atoms() const { return static_cast<int>(atoms_.size()); }
    const std::vector<int>& atoms() const { return atoms_; }
    int photon_cutoff() const { return photon_cutoff_; }
    std::optional<int> sector() const { return sector_; }

    std::size_t dim() const;
    bool contains(const BasisState& b) const;

    // basis_index: bijective over the space, throws std::domain_error outside.
    std::size_t index_of(const BasisState& b) const;
    BasisState basis_at(std::size_t index) const;

    // true when atom labels are exactly 0..N-1 (required for serialization)
    bool canonical_atoms() const;

    bool operator==(const Space&) const = default;

private:
    std::vector<int> atoms_;
    int photon_cutoff_ = 0;
    std::optional<int> sector_;
};

// Complex amplitude vector over a Space, canonical ordering. Value semantics;
// all free operations are pure.
class StateVector {
public:
    StateVector() = default;
    explicit StateVector(Space space);
    StateVector(Space space, Eigen::VectorXcd amplitudes);

    static StateVector basis_vector(Space space, const BasisState& b);

    const Space& space() const { return space_; }
    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }

    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    Eigen::VectorXcd& amplitudes() { return amps_; }

    cdouble operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }
    cdouble& operator[](std::size_t i) { return amps_[static_cast<Eigen::Index>(i)]; }

    cdouble amplitude(const BasisState& b) const;
    void set_amplitude(const BasisState& b, cdouble v);

    double norm() const { return amps_.norm(); }
    double squared_norm() const { return amps_.squaredNorm(); }
    StateVector& normalize();  // throws std::domain_error on zero norm

    std::size_t nonzero_count(double tol = 0.0) const;

private:
    Space space_;
    Eigen::VectorXcd amps_;
};

// Tensor product of subsystem states. Atom label sets must be disjoint and at
// most one operand may carry a non-trivial photon register (cutoff > 0).
// Sector restrictions combine additively; mixing restricted and unrestricted
// operands is rejected.
StateVector tensor(const StateVector& a, const StateVector& b);

cdouble inner_product(const StateVector& a, const StateVector& b);

struct PhotonProjection {
    StateVector atomic_state;  // renormalized conditional state over atoms only
    double probability = 0.0;  // Born probability of the photon outcome
    bool empty = false;        // probability was zero; atomic_state is all-zero
};

// Post-selection on an exact photon number.
PhotonProjection project_photon_number(const StateVector& psi, int photon);

// JSON schema: {"n_atoms": int, "photon_cutoff": int, "sector": int|null,
// "amplitudes": [[re, im], ...]} in canonical order. Round-trips bit-exactly
// at double precision. Only canonical-atom spaces are serializable.
nlohmann::json state_to_json(const StateVector& psi);
StateVector state_from_json(const nlohmann::json& j);

} // namespace qlock
