#include "qlock/state.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <stdexcept>

namespace qlock {

namespace {

constexpr int kMaxAtoms = 32;

struct BinomialTable {
    std::array<std::array<std::uint64_t, 41>, 41> c{};
    constexpr BinomialTable() {
        for (int n = 0; n <= 40; ++n) {
            c[n][0] = 1;
            for (int k = 1; k <= n; ++k)
                c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0);
        }
    }
};
constexpr BinomialTable kBinom{};

// rank of `mask` among all popcount-k masks in ascending integer order:
// for set-bit positions p1 < p2 < ... < pk, rank = sum C(p_i, i).
std::uint64_t rank_mask(std::uint32_t mask) {
    std::uint64_t r = 0;
    int i = 0;
    while (mask) {
        const int p = std::countr_zero(mask);
        mask &= mask - 1;
        ++i;
        r += binomial(p, i);
    }
    return r;
}

std::uint32_t unrank_mask(std::uint64_t rank, int k, int width) {
    std::uint32_t mask = 0;
    for (int i = k; i >= 1; --i) {
        int p = i - 1;
        for (int q = width - 1; q >= i - 1; --q) {
            if (binomial(q, i) <= rank) { p = q; break; }
        }
        mask |= (1u << p);
        rank -= binomial(p, i);
    }
    return mask;
}

} // namespace

std::uint64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    if (n > 40) throw std::domain_error("binomial: n out of supported range");
    return kBinom.c[n][k];
}

int BasisState::excitation() const {
    int m = photon;
    for (auto b : bits) m += b;
    return m;
}

std::uint32_t BasisState::mask() const {
    std::uint32_t v = 0;
    const int n = static_cast<int>(bits.size());
    for (int i = 0; i < n; ++i)
        if (bits[i]) v |= 1u << (n - 1 - i);
    return v;
}

BasisState BasisState::from_mask(int photon, std::uint32_t mask, int n_atoms) {
    BasisState b;
    b.photon = photon;
    b.bits.resize(n_atoms);
    for (int i = 0; i < n_atoms; ++i)
        b.bits[i] = (mask >> (n_atoms - 1 - i)) & 1u;
    return b;
}

Space Space::full(int n_atoms, int photon_cutoff) {
    std::vector<int> labels(n_atoms);
    for (int i = 0; i < n_atoms; ++i) labels[i] = i;
    return labeled(std::move(labels), photon_cutoff, std::nullopt);
}

Space Space::atomic(int n_atoms) { return full(n_atoms, 0); }

Space Space::sector(int n_atoms, int photon_cutoff, int total_excitation) {
    std::vector<int> labels(n_atoms);
    for (int i = 0; i < n_atoms; ++i) labels[i] = i;
    return labeled(std::move(labels), photon_cutoff, total_excitation);
}

Space Space::atomic_sector(int n_atoms, int total_excitation) {
    return sector(n_atoms, 0, total_excitation);
}

Space Space::photon_only(int photon_cutoff, std::optional<int> sector) {
    return labeled({}, photon_cutoff, sector);
}

Space Space::labeled(std::vector<int> atom_labels, int photon_cutoff,
                     std::optional<int> sector) {
    if (photon_cutoff < 0) throw std::invalid_argument("photon_cutoff must be >= 0");
    if (static_cast<int>(atom_labels.size()) > kMaxAtoms)
        throw std::invalid_argument("too many atoms (max 32)");
    if (!std::is_sorted(atom_labels.begin(), atom_labels.end()) ||
        std::adjacent_find(atom_labels.begin(), atom_labels.end()) != atom_labels.end())
        throw std::invalid_argument("atom labels must be strictly increasing");
    if (sector && *sector < 0) throw std::invalid_argument("sector must be >= 0");
    Space s;
    s.atoms_ = std::move(atom_labels);
    s.photon_cutoff_ = photon_cutoff;
    s.sector_ = sector;
    return s;
}

std::size_t Space::dim() const {
    const int n = n_atoms();
    if (!sector_) return static_cast<std::size_t>(photon_cutoff_ + 1) << n;
    std::size_t d = 0;
    for (int ph = 0; ph <= std::min(photon_cutoff_, *sector_); ++ph)
        d += binomial(n, *sector_ - ph);
    return d;
}

bool Space::contains(const BasisState& b) const {
    if (static_cast<int>(b.bits.size()) != n_atoms()) return false;
    if (b.photon < 0 || b.photon > photon_cutoff_) return false;
    if (sector_ && b.excitation() != *sector_) return false;
    return true;
}

std::size_t Space::index_of(const BasisState& b) const {
    if (!contains(b))
        throw std::domain_error("basis state does not belong to the space");
    const int n = n_atoms();
    if (!sector_)
        return (static_cast<std::size_t>(b.photon) << n) + b.mask();
    std::size_t offset = 0;
    for (int ph = 0; ph < b.photon; ++ph)
        offset += binomial(n, *sector_ - ph);
    return offset + rank_mask(b.mask());
}

BasisState Space::basis_at(std::size_t index) const {
    if (index >= dim()) throw std::domain_error("basis index out of range");
    const int n = n_atoms();
    if (!sector_) {
        const std::size_t block = std::size_t{1} << n;
        return BasisState::from_mask(static_cast<int>(index / block),
                                     static_cast<std::uint32_t>(index % block), n);
    }
    for (int ph = 0; ph <= std::min(photon_cutoff_, *sector_); ++ph) {
        const std::uint64_t cnt = binomial(n, *sector_ - ph);
        if (index < cnt)
            return BasisState::from_mask(
                ph, unrank_mask(index, *sector_ - ph, n), n);
        index -= cnt;
    }
    throw std::logic_error("basis_at: unreachable");
}

bool Space::canonical_atoms() const {
    for (int i = 0; i < n_atoms(); ++i)
        if (atoms_[i] != i) return false;
    return true;
}

StateVector::StateVector(Space space)
    : space_(std::move(space)),
      amps_(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space_.dim()))) {}

StateVector::StateVector(Space space, Eigen::VectorXcd amplitudes)
    : space_(std::move(space)), amps_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amps_.size()) != space_.dim())
        throw std::invalid_argument("amplitude count does not match space dimension");
}

StateVector StateVector::basis_vector(Space space, const BasisState& b) {
    StateVector v(std::move(space));
    v[v.space().index_of(b)] = 1.0;
    return v;
}

cdouble StateVector::amplitude(const BasisState& b) const {
    return amps_[static_cast<Eigen::Index>(space_.index_of(b))];
}

void StateVector::set_amplitude(const BasisState& b, cdouble v) {
    amps_[static_cast<Eigen::Index>(space_.index_of(b))] = v;
}

StateVector& StateVector::normalize() {
    const double n = norm();
    if (n == 0.0) throw std::domain_error("cannot normalize a zero state");
    amps_ /= n;
    return *this;
}

std::size_t StateVector::nonzero_count(double tol) const {
    std::size_t c = 0;
    for (Eigen::Index i = 0; i < amps_.size(); ++i)
        if (std::abs(amps_[i]) > tol) ++c;
    return c;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
    const Space& sa = a.space();
    const Space& sb = b.space();
    if (sa.photon_cutoff() > 0 && sb.photon_cutoff() > 0)
        throw std::domain_error("tensor: at most one operand may carry a photon register");
    if (sa.sector().has_value() != sb.sector().has_value())
        throw std::domain_error("tensor: operands must agree on sector restriction");

    std::vector<int> merged(sa.atoms());
    merged.insert(merged.end(), sb.atoms().begin(), sb.atoms().end());
    std::sort(merged.begin(), merged.end());
    if (std::adjacent_find(merged.begin(), merged.end()) != merged.end())
        throw std::domain_error("tensor: overlapping atom index sets");

    std::optional<int> sector;
    if (sa.sector()) sector = *sa.sector() + *sb.sector();
    Space joint = Space::labeled(merged, sa.photon_cutoff() + sb.photon_cutoff(), sector);

    // position of each operand atom inside the merged label list
    auto positions = [&](const Space& s) {
        std::vector<int> pos(s.atoms().size());
        for (std::size_t i = 0; i < s.atoms().size(); ++i)
            pos[i] = static_cast<int>(
                std::lower_bound(merged.begin(), merged.end(), s.atoms()[i]) -
                merged.begin());
        return pos;
    };
    const auto pos_a = positions(sa);
    const auto pos_b = positions(sb);

    StateVector out(joint);
    BasisState jb;
    jb.bits.assign(merged.size(), 0);
    for (std::size_t ia = 0; ia < a.dim(); ++ia) {
        const cdouble va = a[ia];
        if (va == 0.0) continue;
        const BasisState ba = sa.basis_at(ia);
        for (std::size_t ib = 0; ib < b.dim(); ++ib) {
            const cdouble vb = b[ib];
            if (vb == 0.0) continue;
            const BasisState bb = sb.basis_at(ib);
            jb.photon = ba.photon + bb.photon;
            std::fill(jb.bits.begin(), jb.bits.end(), 0);
            for (std::size_t i = 0; i < pos_a.size(); ++i) jb.bits[pos_a[i]] = ba.bits[i];
            for (std::size_t i = 0; i < pos_b.size(); ++i) jb.bits[pos_b[i]] = bb.bits[i];
            out[joint.index_of(jb)] = va * vb;
        }
    }
    return out;
}

cdouble inner_product(const StateVector& a, const StateVector& b) {
    if (!(a.space() == b.space()))
        throw std::domain_error("inner_product: states live in different spaces");
    return a.amplitudes().dot(b.amplitudes());  // conjugates the left operand
}

PhotonProjection project_photon_number(const StateVector& psi, int photon) {
    const Space& s = psi.space();
    if (photon < 0 || photon > s.photon_cutoff())
        throw std::domain_error("project_photon_number: photon number beyond cutoff");

    std::optional<int> out_sector;
    if (s.sector()) {
        if (*s.sector() - photon < 0)
            return {StateVector(Space::labeled(s.atoms(), 0, 0)), 0.0, true};
        out_sector = *s.sector() - photon;
    }
    Space atomic = Space::labeled(s.atoms(), 0, out_sector);
    StateVector cond(atomic);
    double prob = 0.0;
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        const cdouble v = psi[i];
        if (v == 0.0) continue;
        BasisState b = s.basis_at(i);
        if (b.photon != photon) continue;
        prob += std::norm(v);
        b.photon = 0;
        cond[atomic.index_of(b)] = v;
    }
    if (prob == 0.0) return {std::move(cond), 0.0, true};
    cond.amplitudes() /= std::sqrt(prob);
    return {std::move(cond), prob, false};
}

nlohmann::json state_to_json(const StateVector& psi) {
    const Space& s = psi.space();
    if (!s.canonical_atoms())
        throw std::invalid_argument("state_to_json: only canonical atom labels (0..N-1)");
    nlohmann::json j;
    j["n_atoms"] = s.n_atoms();
    j["photon_cutoff"] = s.photon_cutoff();
    if (s.sector()) j["sector"] = *s.sector(); else j["sector"] = nullptr;
    auto amps = nlohmann::json::array();
    for (std::size_t i = 0; i < psi.dim(); ++i)
        amps.push_back({psi[i].real(), psi[i].imag()});
    j["amplitudes"] = std::move(amps);
    return j;
}

StateVector state_from_json(const nlohmann::json& j) {
    const int n = j.at("n_atoms").get<int>();
    const int cutoff = j.at("photon_cutoff").get<int>();
    std::optional<int> sector;
    if (!j.at("sector").is_null()) sector = j.at("sector").get<int>();
    Space s = sector ? Space::sector(n, cutoff, *sector) : Space::full(n, cutoff);
    const auto& amps = j.at("amplitudes");
    if (amps.size() != s.dim())
        throw std::invalid_argument("state_from_json: amplitude count mismatch");
    StateVector psi(s);
    for (std::size_t i = 0; i < amps.size(); ++i)
        psi[i] = cdouble(amps[i].at(0).get<double>(), amps[i].at(1).get<double>());
    return psi;
}

} // namespace qlock
