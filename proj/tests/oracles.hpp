// Independent brute-force oracles for the test suites. These deliberately
// avoid the library's indexing/evolution code paths so they can catch
// systematic mistakes in them.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "qlock/state.hpp"

namespace oracle {

struct Label {
    int photon;
    std::uint32_t mask;  // big-endian atomic bits, bit (N-1-i) is atom i
};

inline int popcount32(std::uint32_t v) {
    int c = 0;
    while (v) { v &= v - 1; ++c; }
    return c;
}

// canonical order by direct nested loops: photon-major, mask ascending
inline std::vector<Label> enumerate_space(int n_atoms, int cutoff, int sector /*-1 = none*/) {
    std::vector<Label> out;
    for (int ph = 0; ph <= cutoff; ++ph)
        for (std::uint32_t mask = 0; mask < (1u << n_atoms); ++mask)
            if (sector < 0 || ph + popcount32(mask) == sector) out.push_back({ph, mask});
    return out;
}

inline qlock::BasisState to_basis(const Label& l, int n_atoms) {
    return qlock::BasisState::from_mask(l.photon, l.mask, n_atoms);
}

// exp(-i H t) psi via scaled-and-squared Taylor series (independent of the
// spectral route used by the library)
inline Eigen::VectorXcd taylor_evolve(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& psi,
                                      double t) {
    using Mat = Eigen::MatrixXcd;
    Mat A = std::complex<double>(0.0, -t) * H;
    int squarings = 0;
    double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.5) {
        A /= 2.0;
        norm /= 2.0;
        ++squarings;
    }
    Mat E = Mat::Identity(A.rows(), A.cols());
    Mat term = Mat::Identity(A.rows(), A.cols());
    for (int k = 1; k <= 24; ++k) {
        term = term * A / static_cast<double>(k);
        E += term;
    }
    for (int s = 0; s < squarings; ++s) E = E * E;
    return E * psi;
}

// number of perfect matchings by direct recursion
inline std::uint64_t count_matchings(std::uint64_t remaining_mask, int n) {
    if (remaining_mask == 0) return 1;
    int first = 0;
    while (!(remaining_mask & (1ull << first))) ++first;
    std::uint64_t acc = 0;
    for (int j = first + 1; j < n; ++j) {
        if (!(remaining_mask & (1ull << j))) continue;
        acc += count_matchings(remaining_mask & ~(1ull << first) & ~(1ull << j), n);
    }
    return acc;
}

inline std::uint64_t count_matchings(int n) {
    return count_matchings((1ull << n) - 1, n);
}

// sigma-bar on the full atomic space built from scratch; kernel dimension of
// the restriction to the m-excitation subspace via SVD
inline int kernel_dim_brute(const std::vector<double>& g, int n, int m) {
    std::vector<std::uint32_t> from, to;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (popcount32(mask) == m) from.push_back(mask);
        if (popcount32(mask) == m - 1) to.push_back(mask);
    }
    if (m == 0) return 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(to.size()),
                                              static_cast<Eigen::Index>(from.size()));
    for (std::size_t c = 0; c < from.size(); ++c) {
        for (int atom = 0; atom < n; ++atom) {
            const std::uint32_t bit = 1u << (n - 1 - atom);
            if (!(from[c] & bit)) continue;
            const std::uint32_t target = from[c] ^ bit;
            for (std::size_t r = 0; r < to.size(); ++r)
                if (to[r] == target) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += g[atom];
        }
    }
    if (M.size() == 0) return static_cast<int>(from.size());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    const double thresh = 1e-10 * sv.maxCoeff();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > thresh) ++rank;
    return static_cast<int>(from.size()) - rank;
}

} // namespace oracle
