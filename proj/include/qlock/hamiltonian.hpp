#pragma once

#include <Eigen/Dense>

#include "qlock/model.hpp"
#include "qlock/state.hpp"

namespace qlock {

// Tavis-Cummings Hamiltonian over the given space basis:
//   H = omega a+a  +  sum_i (omega + delta_i) s_i+ s_i
//     + sum_i g_i (a+ s_i + a s_i+)
// Hermitian and block-diagonal over excitation sectors by construction.
// The space's atoms must be labeled 0..N-1 matching the parameter list.
Eigen::MatrixXcd build_hamiltonian(const ModelParams& params, const Space& space);

// Diagonal matrix of N_exc = a+a + sum_i s_i+ s_i over the space basis.
Eigen::MatrixXcd excitation_operator(const Space& space);

// Expectation of N_exc.
double excitation_number(const StateVector& psi);

// psi(t) = exp(-i H t) psi0 via spectral decomposition.
StateVector evolve(const Eigen::MatrixXcd& hamiltonian, const StateVector& psi0, double t);

// Eigendecompose once, evolve many times.
class SpectralEvolver {
public:
    explicit SpectralEvolver(const Eigen::MatrixXcd& hamiltonian);

    StateVector evolve(const StateVector& psi0, double t) const;
    Eigen::VectorXcd evolve(const Eigen::VectorXcd& amps, double t) const;

    const Eigen::VectorXd& eigenvalues() const { return evals_; }
    const Eigen::MatrixXcd& eigenvectors() const { return evecs_; }

private:
    Eigen::VectorXd evals_;
    Eigen::MatrixXcd evecs_;
};

// Eigenvalues of the excitation-m block (diagnostics, CLI `spectrum`).
std::vector<double> sector_spectrum(const ModelParams& params, int photon_cutoff, int m);

} // namespace qlock
