#include "qlock/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

namespace qlock {

Eigen::MatrixXcd build_hamiltonian(const ModelParams& params, const Space& space) {
    params.validate();
    if (space.n_atoms() != params.n_atoms())
        throw std::invalid_argument("space and parameters disagree on atom count");
    if (!space.canonical_atoms())
        throw std::invalid_argument("build_hamiltonian expects canonical atom labels");

    const int n = space.n_atoms();
    const double omega = params.cavity.omega;
    const auto g = params.couplings();
    const auto d = static_cast<Eigen::Index>(space.dim());

    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index col = 0; col < d; ++col) {
        const BasisState b = space.basis_at(static_cast<std::size_t>(col));
        double diag = b.photon * omega;
        for (int i = 0; i < n; ++i)
            if (b.bits[i]) diag += omega + params.atoms[i].delta;
        H(col, col) = diag;

        // a+ s_i : |n, ...1_i...> -> sqrt(n+1) |n+1, ...0_i...>
        if (b.photon < space.photon_cutoff()) {
            const double amp = std::sqrt(static_cast<double>(b.photon) + 1.0);
            for (int i = 0; i < n; ++i) {
                if (!b.bits[i]) continue;
                BasisState t = b;
                t.photon += 1;
                t.bits[i] = 0;
                const auto row = static_cast<Eigen::Index>(space.index_of(t));
                H(row, col) += g[i] * amp;
                H(col, row) += g[i] * amp;
            }
        }
    }
    return H;
}

Eigen::MatrixXcd excitation_operator(const Space& space) {
    const auto d = static_cast<Eigen::Index>(space.dim());
    Eigen::MatrixXcd N = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        N(i, i) = space.basis_at(static_cast<std::size_t>(i)).excitation();
    return N;
}

double excitation_number(const StateVector& psi) {
    double acc = 0.0;
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        const double w = std::norm(psi[i]);
        if (w == 0.0) continue;
        acc += w * psi.space().basis_at(i).excitation();
    }
    return acc;
}

StateVector evolve(const Eigen::MatrixXcd& hamiltonian, const StateVector& psi0, double t) {
    return SpectralEvolver(hamiltonian).evolve(psi0, t);
}

SpectralEvolver::SpectralEvolver(const Eigen::MatrixXcd& hamiltonian) {
    if (hamiltonian.rows() != hamiltonian.cols())
        throw std::invalid_argument("Hamiltonian must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hamiltonian);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed");
    evals_ = solver.eigenvalues();
    evecs_ = solver.eigenvectors();
}

Eigen::VectorXcd SpectralEvolver::evolve(const Eigen::VectorXcd& amps, double t) const {
    if (amps.size() != evals_.size())
        throw std::invalid_argument("state dimension does not match Hamiltonian");
    Eigen::VectorXcd coeffs = evecs_.adjoint() * amps;
    for (Eigen::Index k = 0; k < coeffs.size(); ++k)
        coeffs[k] *= std::exp(cdouble(0.0, -evals_[k] * t));
    return evecs_ * coeffs;
}

StateVector SpectralEvolver::evolve(const StateVector& psi0, double t) const {
    return StateVector(psi0.space(), evolve(psi0.amplitudes(), t));
}

std::vector<double> sector_spectrum(const ModelParams& params, int photon_cutoff, int m) {
    const Space s = Space::sector(params.n_atoms(), photon_cutoff, m);
    if (s.dim() == 0) return {};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(build_hamiltonian(params, s));
    std::vector<double> out(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + solver.eigenvalues().size());
    return out;
}

} // namespace qlock
