#include "qlock/dark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qlock/hamiltonian.hpp"

namespace qlock {

void PairSplitting::canonicalize() {
    if (n_atoms < 0) throw std::invalid_argument("n_atoms must be non-negative");
    std::vector<int> seen(n_atoms, 0);
    for (auto& p : pairs) {
        if (p[0] == p[1]) throw std::invalid_argument("pair members must differ");
        if (p[0] > p[1]) std::swap(p[0], p[1]);
        for (int a : p) {
            if (a < 0 || a >= n_atoms)
                throw std::invalid_argument("pair member out of range");
            if (seen[a]++)
                throw std::invalid_argument("atom appears in more than one pair");
        }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a[0] < b[0]; });
}

bool PairSplitting::complete() const {
    return static_cast<int>(pairs.size()) * 2 == n_atoms;
}

bool PairSplitting::covers(int atom) const { return partner(atom) >= 0; }

int PairSplitting::partner(int atom) const {
    for (const auto& p : pairs) {
        if (p[0] == atom) return p[1];
        if (p[1] == atom) return p[0];
    }
    return -1;
}

nlohmann::json splitting_to_json(const PairSplitting& k) {
    nlohmann::json j;
    j["n_atoms"] = k.n_atoms;
    auto pairs = nlohmann::json::array();
    for (const auto& p : k.pairs) pairs.push_back({p[0], p[1]});
    j["pairs"] = std::move(pairs);
    return j;
}

PairSplitting splitting_from_json(const nlohmann::json& j) {
    PairSplitting k;
    k.n_atoms = j.at("n_atoms").get<int>();
    for (const auto& p : j.at("pairs"))
        k.pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    k.canonicalize();
    return k;
}

namespace {
void enumerate_rec(std::vector<int>& left, PairSplitting& cur,
                   std::vector<PairSplitting>& out) {
    if (left.empty()) {
        out.push_back(cur);
        return;
    }
    const int a = left.front();
    for (std::size_t k = 1; k < left.size(); ++k) {
        const int b = left[k];
        std::vector<int> rest;
        rest.reserve(left.size() - 2);
        for (std::size_t i = 1; i < left.size(); ++i)
            if (i != k) rest.push_back(left[i]);
        cur.pairs.push_back({a, b});
        enumerate_rec(rest, cur, out);
        cur.pairs.pop_back();
    }
}
} // namespace

std::vector<PairSplitting> enumerate_matchings(int n_atoms) {
    if (n_atoms < 2 || n_atoms % 2 != 0)
        throw std::invalid_argument("perfect matchings require even n >= 2");
    std::vector<int> items(n_atoms);
    std::iota(items.begin(), items.end(), 0);
    std::vector<PairSplitting> out;
    PairSplitting cur;
    cur.n_atoms = n_atoms;
    enumerate_rec(items, cur, out);
    for (auto& k : out) k.canonicalize();
    return out;
}

PairSplitting random_matching(int n_atoms, StreamRng& rng) {
    if (n_atoms < 2 || n_atoms % 2 != 0)
        throw std::invalid_argument("random matching requires even n >= 2");
    std::vector<int> order(n_atoms);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n_atoms - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
    PairSplitting k;
    k.n_atoms = n_atoms;
    for (int i = 0; i < n_atoms; i += 2) k.pairs.push_back({order[i], order[i + 1]});
    k.canonicalize();
    return k;
}

namespace {

void check_atomic(const StateVector& psi, std::span<const double> g) {
    if (psi.space().photon_cutoff() != 0)
        throw std::invalid_argument("expected an atoms-only state");
    if (static_cast<int>(g.size()) < psi.space().n_atoms())
        throw std::invalid_argument("coupling list shorter than atom count");
}

// shared ladder walker: lower = true applies sigma_i, false applies sigma_i+
StateVector apply_ladder(const StateVector& psi, std::span<const double> g, bool lower) {
    check_atomic(psi, g);
    const Space& s = psi.space();
    const int n = s.n_atoms();

    std::optional<int> out_sector;
    if (s.sector()) {
        const int m = *s.sector() + (lower ? -1 : +1);
        if (m < 0 || m > n) {
            // image is empty; represent it as a zero vector on a valid sector
            return StateVector(Space::labeled(s.atoms(), 0, std::clamp(m, 0, n)));
        }
        out_sector = m;
    }
    StateVector out(Space::labeled(s.atoms(), 0, out_sector));
    const Space& so = out.space();
    for (std::size_t idx = 0; idx < psi.dim(); ++idx) {
        const cdouble v = psi[idx];
        if (v == 0.0) continue;
        BasisState b = s.basis_at(idx);
        for (int i = 0; i < n; ++i) {
            // the coupling belongs to the atom's global label
            const double gi = g[static_cast<std::size_t>(s.atoms()[i])];
            if (lower ? !b.bits[i] : b.bits[i]) continue;
            BasisState t = b;
            t.bits[i] = lower ? 0 : 1;
            out[so.index_of(t)] += gi * v;
        }
    }
    return out;
}

} // namespace

StateVector apply_lowering(const StateVector& atomic, std::span<const double> g) {
    return apply_ladder(atomic, g, true);
}

StateVector apply_raising(const StateVector& atomic, std::span<const double> g) {
    return apply_ladder(atomic, g, false);
}

Eigen::MatrixXcd collective_lowering_matrix(std::span<const double> g, const Space& from) {
    if (from.photon_cutoff() != 0)
        throw std::invalid_argument("collective lowering acts on the atomic space");
    if (static_cast<int>(g.size()) < from.n_atoms())
        throw std::invalid_argument("coupling list shorter than atom count");
    Space to = from;
    if (from.sector()) {
        const int m = *from.sector() - 1;
        to = Space::labeled(from.atoms(), 0, std::max(m, 0));
        if (m < 0)
            return Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(to.dim()),
                                          static_cast<Eigen::Index>(from.dim()));
    }
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(to.dim()),
                                                static_cast<Eigen::Index>(from.dim()));
    for (std::size_t col = 0; col < from.dim(); ++col) {
        const BasisState b = from.basis_at(col);
        for (int i = 0; i < from.n_atoms(); ++i) {
            if (!b.bits[i]) continue;
            BasisState t = b;
            t.bits[i] = 0;
            M(static_cast<Eigen::Index>(to.index_of(t)), static_cast<Eigen::Index>(col)) +=
                g[static_cast<std::size_t>(from.atoms()[i])];
        }
    }
    return M;
}

DarknessCheck is_dark(const StateVector& atomic, std::span<const double> g, double tol) {
    const double n = atomic.norm();
    if (n == 0.0) return {true, 0.0};
    const double r = apply_lowering(atomic, g).norm() / n;
    return {r <= tol, r};
}

StateVector singlet_pair(int i, int j, std::span<const double> g) {
    if (i == j) throw std::invalid_argument("singlet_pair needs two distinct atoms");
    const int lim = static_cast<int>(g.size());
    if (i < 0 || j < 0 || i >= lim || j >= lim)
        throw std::out_of_range("singlet_pair: atom index out of range");
    const double gi = g[static_cast<std::size_t>(i)];
    const double gj = g[static_cast<std::size_t>(j)];
    if (gi <= 0.0 || gj <= 0.0)
        throw std::domain_error("singlet_pair: weights undefined for zero coupling");

    Space s = Space::labeled({std::min(i, j), std::max(i, j)}, 0, 1);
    StateVector v(s);
    BasisState b;
    b.bits = {0, 0};
    const double norm = std::hypot(gi, gj);
    // +g_i on |0_i 1_j>, -g_j on |1_i 0_j> (in the order the arguments came)
    b.bits[i < j ? 1 : 0] = 1;
    v.set_amplitude(b, gi / norm);
    b.bits = {0, 0};
    b.bits[i < j ? 0 : 1] = 1;
    v.set_amplitude(b, -gj / norm);
    return v;
}

StateVector splitting_state(const PairSplitting& k, std::span<const double> g,
                            bool include_spectators) {
    PairSplitting kk = k;
    kk.canonicalize();
    if (static_cast<int>(g.size()) < kk.n_atoms)
        throw std::invalid_argument("coupling list shorter than atom count");
    if (kk.pairs.empty() && !include_spectators)
        throw std::invalid_argument("empty splitting with no spectators has no atoms");

    std::optional<StateVector> acc;
    for (const auto& p : kk.pairs) {
        StateVector f = singlet_pair(p[0], p[1], g);
        acc = acc ? tensor(*acc, f) : std::move(f);
    }
    if (include_spectators) {
        for (int a = 0; a < kk.n_atoms; ++a) {
            if (kk.covers(a)) continue;
            StateVector ground(Space::labeled({a}, 0, 0));
            ground[0] = 1.0;
            acc = acc ? tensor(*acc, ground) : std::move(ground);
        }
    }
    return std::move(*acc);
}

int dark_dimension(std::span<const double> g, int n_atoms, int m) {
    if (m < 0 || m > n_atoms) throw std::invalid_argument("excitation out of range");
    if (m == 0) return 1;
    const Space from = Space::atomic_sector(n_atoms, m);
    const Eigen::MatrixXcd M = collective_lowering_matrix(g, from);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return static_cast<int>(from.dim());
    const double thresh = 1e-10 * sv.maxCoeff();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > thresh) ++rank;
    return static_cast<int>(from.dim()) - rank;
}

EigenstateCheck is_dark_eigenstate(const StateVector& atomic, const ModelParams& params,
                                   double tol) {
    if (!atomic.space().canonical_atoms() || atomic.space().n_atoms() != params.n_atoms())
        throw std::invalid_argument("state must cover exactly the model's atoms");
    const auto g = params.couplings();

    EigenstateCheck out;
    out.dark_residual = is_dark(atomic, g, tol).residual;

    // embed psi_at x |0>_ph with one photon slot so the coupling term can act
    const Space& sa = atomic.space();
    Space joint = sa.sector() ? Space::sector(sa.n_atoms(), 1, *sa.sector())
                              : Space::full(sa.n_atoms(), 1);
    StateVector psi(joint);
    for (std::size_t i = 0; i < atomic.dim(); ++i) {
        if (atomic[i] == 0.0) continue;
        BasisState b = sa.basis_at(i);
        psi[joint.index_of(b)] = atomic[i];  // b.photon == 0 already
    }
    psi.normalize();

    const Eigen::MatrixXcd H = build_hamiltonian(params, joint);
    const Eigen::VectorXcd h = H * psi.amplitudes();
    const double energy = psi.amplitudes().dot(h).real();
    const double residual = (h - energy * psi.amplitudes()).norm();

    out.eigenvalue = energy;
    out.residual = residual;
    out.is_eigenstate = (out.dark_residual <= tol) && (residual <= tol);
    return out;
}

} // namespace qlock
