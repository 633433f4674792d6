#include "qlock/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qlock {

std::string to_string(Region r) {
    switch (r) {
        case Region::Main: return "main";
        case Region::Transit: return "transit";
        case Region::Control: return "control";
    }
    return "?";
}

std::string to_string(DetectorId d) {
    switch (d) {
        case DetectorId::D1: return "D1";
        case DetectorId::D2: return "D2";
        case DetectorId::Lost: return "lost";
    }
    return "?";
}

std::string to_string(VerifyMode m) {
    return m == VerifyMode::Abstract ? "abstract" : "exact";
}

std::string to_string(Decision d) {
    return d == Decision::Accept ? "accept" : "reject";
}

void DetectorModel::validate() const {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(eta1) || !in01(eta2) || !in01(p_transit_loss) || !in01(asynchrony_epsilon))
        throw std::invalid_argument("detector probabilities must lie in [0, 1]");
}

void ProtocolOptions::validate() const {
    double sum = 0.0;
    for (double q : location_split) {
        if (q < 0.0) throw std::invalid_argument("location split weights must be >= 0");
        sum += q;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("location split must have positive mass");
    if (max_switchings < 1) throw std::invalid_argument("max_switchings must be >= 1");
    if (s_jump_bright_fraction <= 0.0 || s_jump_bright_fraction > 1.0)
        throw std::invalid_argument("s_jump_bright_fraction must lie in (0, 1]");
    if (exact_steps < 1) throw std::invalid_argument("exact_steps must be >= 1");
}

namespace {

// A probabilistic branch point. The sampler draws it; the enumerator walks
// every positive-probability option, so both interpretations share one
// protocol implementation.
class BranchSource {
public:
    virtual ~BranchSource() = default;
    virtual std::size_t pick(std::span<const double> probs) = 0;

    bool bernoulli(double p) {
        const std::array<double, 2> pr{p, 1.0 - p};
        return pick(pr) == 0;
    }
};

class RngBranchSource final : public BranchSource {
public:
    explicit RngBranchSource(StreamRng rng) : rng_(rng) {}

    std::size_t pick(std::span<const double> probs) override {
        const double u = rng_.uniform();
        double acc = 0.0;
        std::size_t last_positive = probs.size() - 1;
        bool seen = false;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const double p = std::max(0.0, probs[i]);
            if (p > 0.0) { last_positive = i; seen = true; }
            acc += p;
            if (u < acc) return i;
        }
        (void)seen;
        return last_positive;
    }

private:
    StreamRng rng_;
};

class EnumBranchSource final : public BranchSource {
public:
    explicit EnumBranchSource(const std::vector<std::size_t>& script) : script_(script) {}

    std::size_t pick(std::span<const double> probs) override {
        std::size_t idx;
        if (cursor_ < script_.size()) {
            idx = script_[cursor_];
        } else {
            idx = 0;
            while (idx + 1 < probs.size() && !(probs[idx] > 0.0)) ++idx;
        }
        chosen_.push_back(idx);
        options_.emplace_back(probs.begin(), probs.end());
        path_prob_ *= std::max(0.0, probs[idx]);
        ++cursor_;
        return idx;
    }

    const std::vector<std::size_t>& chosen() const { return chosen_; }
    const std::vector<std::vector<double>>& options() const { return options_; }
    double path_probability() const { return path_prob_; }

private:
    const std::vector<std::size_t>& script_;
    std::size_t cursor_ = 0;
    std::vector<std::size_t> chosen_;
    std::vector<std::vector<double>> options_;
    double path_prob_ = 1.0;
};

// Depth-first exhaustion of the event tree; returns accumulated accept mass.
template <typename RunFn>
double enumerate_accept(RunFn&& run) {
    double p_accept = 0.0;
    std::vector<std::size_t> script;
    std::size_t leaves = 0;
    for (;;) {
        if (++leaves > 20'000'000)
            throw std::runtime_error("event-tree enumeration exceeded the leaf budget");
        EnumBranchSource src(script);
        const Decision d = run(src);
        if (d == Decision::Accept) p_accept += src.path_probability();

        std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(src.chosen().size()) - 1;
        for (; pos >= 0; --pos) {
            const auto& opts = src.options()[static_cast<std::size_t>(pos)];
            std::size_t next = src.chosen()[static_cast<std::size_t>(pos)] + 1;
            while (next < opts.size() && !(opts[next] > 0.0)) ++next;
            if (next < opts.size()) {
                script.assign(src.chosen().begin(), src.chosen().begin() + pos);
                script.push_back(next);
                break;
            }
        }
        if (pos < 0) break;
    }
    return p_accept;
}

// --- small 4-dim pair-state algebra (basis |00>, |01>, |10>, |11> over the
// pair's atoms in ascending label order) ---

using Vec4 = Eigen::Vector4cd;

struct PairCouplings {
    double main_a = 0.0, main_b = 0.0;  // couplings to the main cavity
    double ctrl_a = 0.0, ctrl_b = 0.0;  // couplings to the control cavity
};

Vec4 apply_pair_lowering(const Vec4& psi, double g_a, double g_b) {
    Vec4 out = Vec4::Zero();
    out[0] = g_b * psi[1] + g_a * psi[2];
    out[1] = g_a * psi[3];
    out[2] = g_b * psi[3];
    return out;
}

// Projection onto Ker(sigma_main) ∩ Ker(sigma_ctrl) of the pair subsystem.
Vec4 project_joint_dark(const Vec4& psi, const PairCouplings& c) {
    const double scale = std::max({std::abs(c.main_a), std::abs(c.main_b),
                                   std::abs(c.ctrl_a), std::abs(c.ctrl_b)});
    Vec4 out = Vec4::Zero();
    out[0] = psi[0];
    if (scale <= 0.0) return psi;  // fully decoupled: every state is dark
    const double tiny = 1e-13 * scale;

    // constraints on (c01, c10): (g_b, g_a) . (c01, c10) = 0 per cavity
    const double rm0 = c.main_b, rm1 = c.main_a;
    const double rc0 = c.ctrl_b, rc1 = c.ctrl_a;
    const double nm = std::hypot(rm0, rm1);
    const double nc = std::hypot(rc0, rc1);

    bool has_dark_dir = true;
    double r0, r1;
    if (nm > tiny && nc > tiny) {
        const double det = rm0 * rc1 - rm1 * rc0;
        if (std::abs(det) > 1e-12 * nm * nc) has_dark_dir = false;
        r0 = nm >= nc ? rm0 : rc0;
        r1 = nm >= nc ? rm1 : rc1;
    } else if (nm > tiny) {
        r0 = rm0; r1 = rm1;
    } else {
        r0 = rc0; r1 = rc1;
    }
    if (has_dark_dir) {
        const double n = std::hypot(r0, r1);
        const double d0 = r1 / n, d1 = -r0 / n;  // solves r0*c01 + r1*c10 = 0
        const cdouble ov = d0 * psi[1] + d1 * psi[2];
        out[1] = d0 * ov;
        out[2] = d1 * ov;
    }
    // |11> is bright whenever any coupling is alive
    return out;
}

double clamp_probability(double w) {
    if (w < 1e-14) return 0.0;
    if (w > 1.0 - 1e-14) return 1.0;
    return w;
}

PairSplitting ordered_valid_matching(const PairSplitting& m, int n_atoms) {
    PairSplitting out = m;
    if (out.n_atoms != n_atoms)
        throw std::invalid_argument("matching atom count does not match the lock");
    std::vector<int> seen(n_atoms, 0);
    for (auto& p : out.pairs) {
        if (p[0] == p[1]) throw std::invalid_argument("pair members must differ");
        if (p[0] > p[1]) std::swap(p[0], p[1]);
        for (int a : p) {
            if (a < 0 || a >= n_atoms) throw std::invalid_argument("pair member out of range");
            if (seen[a]++) throw std::invalid_argument("atom appears in more than one pair");
        }
    }
    if (!out.complete())
        throw std::invalid_argument("password must be a complete matching");
    return out;  // pair order preserved: trials run in the given order
}

// The full protocol for one (key, password) pair, replayable over any
// BranchSource. Movement physics is mode-specific; the S-jump confirmation
// and the acceptance clause are shared.
class ProtocolRun {
public:
    ProtocolRun(const PairSplitting& key, const ModelParams& main_params,
                const ModelParams& control_params, const PairSplitting& password,
                const DetectorModel& det, VerifyMode mode, const ProtocolOptions& opts)
        : det_(det), opts_(opts), mode_(mode), key_(key) {
        det_.validate();
        opts_.validate();
        main_params.validate();
        control_params.validate();
        key_.canonicalize();
        if (!key_.complete()) throw std::invalid_argument("secret key must be complete");
        n_ = key_.n_atoms;
        if (main_params.n_atoms() != n_ || control_params.n_atoms() != n_)
            throw std::invalid_argument("cavity parameters must cover all atoms");
        password_ = ordered_valid_matching(password, n_);

        g_main_ = main_params.couplings();
        g_ctrl_ = control_params.couplings();
        key_partner_.assign(n_, -1);
        key_pair_index_.assign(n_, -1);
        for (std::size_t i = 0; i < key_.pairs.size(); ++i) {
            const auto& p = key_.pairs[i];
            key_partner_[p[0]] = p[1];
            key_partner_[p[1]] = p[0];
            key_pair_index_[p[0]] = static_cast<int>(i);
            key_pair_index_[p[1]] = static_cast<int>(i);
        }
    }

    Transcript run(BranchSource& src) {
        reset();
        Transcript t;
        t.mode = mode_;
        for (std::size_t ti = 0; ti < password_.pairs.size(); ++ti) {
            const int u = password_.pairs[ti][0];
            const int v = password_.pairs[ti][1];
            PairTrialEvent ev;
            ev.pair = {u, v};
            ev.match = key_partner_[u] == v;

            const bool clicked = mode_ == VerifyMode::Abstract
                                     ? movement_abstract(u, v, ev, src)
                                     : movement_exact(u, v, ev, src);
            resolve_s_jump(u, v, ev, src);
            ev.passed = !clicked && ev.s_jump_click;
            t.events.push_back(std::move(ev));
            if (!t.events.back().passed) {
                if (t.rejecting_pair_index < 0)
                    t.rejecting_pair_index = static_cast<int>(ti);
                if (opts_.early_exit) break;
            }
        }
        t.decision = t.rejecting_pair_index < 0 ? Decision::Accept : Decision::Reject;
        return t;
    }

private:
    enum class AtomStatus : std::uint8_t { Singlet, Excited, Ground };

    DetectorModel det_;
    ProtocolOptions opts_;
    VerifyMode mode_;
    PairSplitting key_;
    PairSplitting password_;
    int n_ = 0;
    std::vector<double> g_main_, g_ctrl_;
    std::vector<int> key_partner_, key_pair_index_;

    // per-run state
    std::vector<AtomStatus> status_;
    std::vector<Region> loc_;
    std::vector<Vec4> pair_state_;

    void reset() {
        status_.assign(n_, AtomStatus::Singlet);
        loc_.assign(n_, Region::Main);
        if (mode_ == VerifyMode::Exact) {
            pair_state_.assign(key_.pairs.size(), Vec4::Zero());
            for (std::size_t i = 0; i < key_.pairs.size(); ++i) {
                const int a = key_.pairs[i][0];
                const int b = key_.pairs[i][1];
                const double ga = g_main_[a], gb = g_main_[b];
                const double nrm = std::hypot(ga, gb);
                Vec4 s = Vec4::Zero();
                s[1] = ga / nrm;   // +g_a on |0_a 1_b>
                s[2] = -gb / nrm;  // -g_b on |1_a 0_b>
                pair_state_[i] = s;
            }
        }
    }

    Region pick_location(BranchSource& src) {
        double qm = opts_.location_split[0];
        double qt = opts_.location_split[1];
        double qc = opts_.location_split[2];
        const double sum = qm + qt + qc;
        const std::array<double, 3> probs{qm / sum, qt / sum, qc / sum};
        switch (src.pick(probs)) {
            case 0: return Region::Main;
            case 1: return Region::Transit;
            default: return Region::Control;
        }
    }

    // records the emission and reports whether a detector fired
    bool record_emission(Region loc, PairTrialEvent& ev, BranchSource& src) {
        DetectorId d = DetectorId::Lost;
        switch (loc) {
            case Region::Main:
                d = src.bernoulli(det_.eta1) ? DetectorId::D1 : DetectorId::Lost;
                break;
            case Region::Control:
                d = src.bernoulli(det_.eta2) ? DetectorId::D2 : DetectorId::Lost;
                break;
            case Region::Transit:
                if (src.bernoulli(det_.p_transit_loss)) {
                    d = DetectorId::Lost;  // escaped both cavities
                } else if (src.bernoulli(0.5)) {
                    d = src.bernoulli(det_.eta1) ? DetectorId::D1 : DetectorId::Lost;
                } else {
                    d = src.bernoulli(det_.eta2) ? DetectorId::D2 : DetectorId::Lost;
                }
                break;
        }
        ev.emissions.push_back({loc, d});
        return d != DetectorId::Lost;
    }

    bool movement_abstract(int u, int v, PairTrialEvent& ev, BranchSource& src) {
        bool clicked = false;
        if (status_[u] == AtomStatus::Singlet && key_partner_[u] == v) {
            // intact correct pair: silent unless asynchronous motion makes it emit
            if (src.bernoulli(det_.asynchrony_epsilon)) {
                clicked |= record_emission(pick_location(src), ev, src);
                status_[u] = status_[v] = AtomStatus::Ground;
            }
        } else {
            for (const int x : {u, v}) {
                if (clicked && opts_.early_exit) break;  // lock already rejected
                switch (status_[x]) {
                    case AtomStatus::Singlet: {
                        const int p = key_partner_[x];
                        if (src.bernoulli(0.5)) {
                            // the broken singlet emits its photon promptly
                            const bool from_moving = src.bernoulli(0.5);
                            const Region loc = from_moving ? pick_location(src) : Region::Main;
                            clicked |= record_emission(loc, ev, src);
                            status_[x] = status_[p] = AtomStatus::Ground;
                        } else if (src.bernoulli(0.5)) {
                            // surviving excitation rides on the moved atom and
                            // radiates once it couples to the control cavity
                            clicked |= record_emission(Region::Control, ev, src);
                            status_[x] = status_[p] = AtomStatus::Ground;
                        } else {
                            // surviving excitation stays behind, silent for now
                            status_[p] = AtomStatus::Excited;
                            status_[x] = AtomStatus::Ground;
                        }
                        break;
                    }
                    case AtomStatus::Excited:
                        // unpaired excited atom: radiates as its coupling changes
                        clicked |= record_emission(pick_location(src), ev, src);
                        status_[x] = AtomStatus::Ground;
                        break;
                    case AtomStatus::Ground:
                        break;
                }
            }
        }
        loc_[u] = loc_[v] = Region::Control;
        return clicked;
    }

    bool movement_exact(int u, int v, PairTrialEvent& ev, BranchSource& src) {
        bool clicked = false;
        // asynchrony imperfection applies to an intact correct pair in either mode
        if (key_partner_[u] == v && pair_excitation(key_pair_index_[u]) > 1e-9 &&
            det_.asynchrony_epsilon > 0.0 && src.bernoulli(det_.asynchrony_epsilon)) {
            clicked |= record_emission(pick_location(src), ev, src);
            pair_state_[key_pair_index_[u]] = ground_pair();
        }

        std::vector<int> affected{key_pair_index_[u]};
        if (key_pair_index_[v] != affected[0]) affected.push_back(key_pair_index_[v]);

        const int steps = opts_.exact_steps;
        for (int phase = 0; phase < 2 && !(clicked && opts_.early_exit); ++phase) {
            for (int s = 1; s <= steps && !(clicked && opts_.early_exit); ++s) {
                const double f = phase == 0 ? 1.0 - static_cast<double>(s) / steps
                                            : static_cast<double>(s) / steps;
                for (const int pi : affected) {
                    const int a = key_.pairs[pi][0];
                    const int b = key_.pairs[pi][1];
                    PairCouplings c;
                    auto fill = [&](int atom, double& cm, double& cc) {
                        if (atom == u || atom == v) {
                            cm = phase == 0 ? f * g_main_[atom] : 0.0;
                            cc = phase == 0 ? 0.0 : f * g_ctrl_[atom];
                        } else {
                            cm = loc_[atom] == Region::Main ? g_main_[atom] : 0.0;
                            cc = loc_[atom] == Region::Control ? g_ctrl_[atom] : 0.0;
                        }
                    };
                    fill(a, c.main_a, c.ctrl_a);
                    fill(b, c.main_b, c.ctrl_b);
                    clicked |= pair_step(pi, c, ev, src);
                }
            }
        }
        loc_[u] = loc_[v] = Region::Control;
        return clicked;
    }

    bool pair_step(int pi, const PairCouplings& c, PairTrialEvent& ev, BranchSource& src) {
        Vec4& psi = pair_state_[pi];
        const Vec4 dark = project_joint_dark(psi, c);
        const double w = clamp_probability(1.0 - dark.squaredNorm());
        if (w == 0.0) {
            if (dark.norm() > 0.0) psi = dark.normalized();
            return false;
        }
        if (src.bernoulli(w)) {
            const Vec4 lm = apply_pair_lowering(psi, c.main_a, c.main_b);
            const Vec4 lc = apply_pair_lowering(psi, c.ctrl_a, c.ctrl_b);
            const double im = lm.squaredNorm();
            const double ic = lc.squaredNorm();
            const double tot = im + ic;
            bool in_main = true;
            if (tot > 0.0) {
                const std::array<double, 2> probs{im / tot, ic / tot};
                in_main = src.pick(probs) == 0;
            }
            const Vec4& collapsed = in_main ? lm : lc;
            psi = collapsed.norm() > 0.0 ? Vec4(collapsed.normalized()) : ground_pair();
            return record_emission(in_main ? Region::Main : Region::Control, ev, src);
        }
        psi = dark.normalized();
        return false;
    }

    static Vec4 ground_pair() {
        Vec4 g = Vec4::Zero();
        g[0] = 1.0;
        return g;
    }

    double pair_excitation(int pi) const {
        const Vec4& psi = pair_state_[pi];
        const double na = std::norm(psi[2]) + std::norm(psi[3]);
        const double nb = std::norm(psi[1]) + std::norm(psi[3]);
        return na + nb;
    }

    double atom_excitation(int atom) const {
        const Vec4& psi = pair_state_[key_pair_index_[atom]];
        const bool is_first = key_.pairs[key_pair_index_[atom]][0] == atom;
        return is_first ? std::norm(psi[2]) + std::norm(psi[3])
                        : std::norm(psi[1]) + std::norm(psi[3]);
    }

    bool excitation_present(int u, int v) const {
        if (mode_ == VerifyMode::Abstract) {
            return (status_[u] == AtomStatus::Singlet && key_partner_[u] == v) ||
                   status_[u] == AtomStatus::Excited || status_[v] == AtomStatus::Excited;
        }
        return atom_excitation(u) + atom_excitation(v) > 1e-9;
    }

    void consume_excitation(int u, int v) {
        if (mode_ == VerifyMode::Abstract) {
            status_[u] = status_[v] = AtomStatus::Ground;
            return;
        }
        for (const int x : {u, v}) {
            Vec4& psi = pair_state_[key_pair_index_[x]];
            const bool is_first = key_.pairs[key_pair_index_[x]][0] == x;
            if (is_first) { psi[2] = 0.0; psi[3] = 0.0; }
            else { psi[1] = 0.0; psi[3] = 0.0; }
            if (psi.norm() <= 1e-12) psi = ground_pair();
            else psi.normalize();
        }
    }

    void resolve_s_jump(int u, int v, PairTrialEvent& ev, BranchSource& src) {
        ev.s_jump_click = false;
        ev.s_jump_switchings = opts_.max_switchings;
        if (!excitation_present(u, v)) return;
        for (int k = 1; k <= opts_.max_switchings; ++k) {
            if (!src.bernoulli(opts_.s_jump_bright_fraction)) continue;  // no emission yet
            ev.s_jump_switchings = k;
            const bool click = src.bernoulli(det_.eta2);
            consume_excitation(u, v);  // the photon left, detected or not
            ev.s_jump_click = click;
            return;
        }
    }
};

} // namespace

nlohmann::json transcript_to_json(const Transcript& t) {
    nlohmann::json j;
    j["decision"] = to_string(t.decision);
    j["mode"] = to_string(t.mode);
    j["seed"] = t.seed;
    if (t.rejecting_pair_index >= 0) j["rejecting_pair_index"] = t.rejecting_pair_index;
    else j["rejecting_pair_index"] = nullptr;
    auto events = nlohmann::json::array();
    for (const auto& ev : t.events) {
        nlohmann::json je;
        je["pair"] = {ev.pair[0], ev.pair[1]};
        je["match"] = ev.match;
        auto ems = nlohmann::json::array();
        for (const auto& em : ev.emissions)
            ems.push_back({{"location", to_string(em.location)},
                           {"detector", to_string(em.detector)}});
        je["emissions"] = std::move(ems);
        je["s_jump_click"] = ev.s_jump_click;
        events.push_back(std::move(je));
    }
    j["events"] = std::move(events);
    return j;
}

LockInstance forge_lock(int n_atoms, const ModelParams& params, std::uint64_t seed,
                        bool build_state) {
    if (n_atoms < 2 || n_atoms % 2 != 0)
        throw std::invalid_argument("forge_lock requires an even atom count >= 2");
    if (params.n_atoms() != n_atoms)
        throw std::invalid_argument("params must cover exactly n_atoms atoms");
    params.validate();

    StreamRng rng(seed, "forge-lock");
    LockInstance lock;
    lock.secret_key = random_matching(n_atoms, rng);
    lock.main_params = params;
    lock.control_params = params;
    if (build_state) {
        lock.state = splitting_state(lock.secret_key, params.couplings());
        const auto check = is_dark(*lock.state, params.couplings(), 1e-10);
        if (!check.dark)
            throw std::runtime_error("forged lock state failed the darkness check");
    }
    return lock;
}

Transcript verify(const LockInstance& lock, const PairSplitting& password,
                  const DetectorModel& det, VerifyMode mode, const ProtocolOptions& opts,
                  std::uint64_t seed) {
    ProtocolRun run(lock.secret_key, lock.main_params, lock.control_params, password, det,
                    mode, opts);
    RngBranchSource src(StreamRng(seed, "verify"));
    Transcript t = run.run(src);
    t.seed = seed;
    return t;
}

double enumerate_accept_probability(const PairSplitting& key, const ModelParams& main_params,
                                    const ModelParams& control_params,
                                    const PairSplitting& password, const DetectorModel& det,
                                    VerifyMode mode, const ProtocolOptions& opts) {
    ProtocolRun run(key, main_params, control_params, password, det, mode, opts);
    return enumerate_accept([&](BranchSource& src) { return run.run(src).decision; });
}

double asynchrony_reject_probability(const DetectorModel& det, const ProtocolOptions& opts) {
    det.validate();
    opts.validate();
    const double sum = opts.location_split[0] + opts.location_split[1] + opts.location_split[2];
    double p_fail = 0.0;
    // main: click (reject) or lost photon -> ground pair -> silent S-jump (reject)
    p_fail += opts.location_split[0] / sum * (det.eta1 + (1.0 - det.eta1));
    // transit: escaped or routed to either detector; undetected still grounds the pair
    p_fail += opts.location_split[1] / sum * 1.0;
    // control: click or ground
    p_fail += opts.location_split[2] / sum * (det.eta2 + (1.0 - det.eta2));
    return p_fail;
}

double pair_bright_fraction(const StateVector& pair_state, double g_first, double g_second) {
    if (pair_state.space().n_atoms() != 2 || pair_state.space().photon_cutoff() != 0)
        throw std::invalid_argument("pair_bright_fraction expects a two-atom atomic state");
    const double n2 = pair_state.squared_norm();
    if (n2 == 0.0) throw std::domain_error("pair_bright_fraction: zero state");

    // gather amplitudes in the |00>,|01>,|10>,|11> convention
    auto amp = [&](int b0, int b1) {
        BasisState b;
        b.bits = {static_cast<std::uint8_t>(b0), static_cast<std::uint8_t>(b1)};
        return pair_state.space().contains(b) ? pair_state.amplitude(b) : cdouble(0.0);
    };
    Vec4 psi;
    psi << amp(0, 0), amp(0, 1), amp(1, 0), amp(1, 1);
    PairCouplings c;
    c.main_a = g_first;
    c.main_b = g_second;
    const Vec4 dark = project_joint_dark(psi, c);
    return 1.0 - dark.squaredNorm() / n2;
}

BrokenSingletResolution sample_broken_singlet(const DetectorModel& det,
                                              const ProtocolOptions& opts, StreamRng& rng) {
    det.validate();
    opts.validate();
    RngBranchSource src{StreamRng{rng.bits()}};
    BrokenSingletResolution out;

    auto pick_loc = [&]() {
        const double sum = opts.location_split[0] + opts.location_split[1] + opts.location_split[2];
        const std::array<double, 3> probs{opts.location_split[0] / sum,
                                          opts.location_split[1] / sum,
                                          opts.location_split[2] / sum};
        switch (src.pick(probs)) {
            case 0: return Region::Main;
            case 1: return Region::Transit;
            default: return Region::Control;
        }
    };
    auto detect = [&](Region loc) {
        switch (loc) {
            case Region::Main: return src.bernoulli(det.eta1) ? DetectorId::D1 : DetectorId::Lost;
            case Region::Control: return src.bernoulli(det.eta2) ? DetectorId::D2 : DetectorId::Lost;
            case Region::Transit:
                if (src.bernoulli(det.p_transit_loss)) return DetectorId::Lost;
                if (src.bernoulli(0.5)) return src.bernoulli(det.eta1) ? DetectorId::D1 : DetectorId::Lost;
                return src.bernoulli(det.eta2) ? DetectorId::D2 : DetectorId::Lost;
        }
        return DetectorId::Lost;
    };

    if (src.bernoulli(0.5)) {
        out.prompt_emission = true;
        const bool from_moving = src.bernoulli(0.5);
        const Region loc = from_moving ? pick_loc() : Region::Main;
        out.emission = EmissionEvent{loc, detect(loc)};
    } else if (src.bernoulli(0.5)) {
        out.excitation_on_moved = true;
        out.emission = EmissionEvent{Region::Control, detect(Region::Control)};
    }
    return out;
}

SJumpResult sample_s_jump(bool excitation_present, const DetectorModel& det,
                          const ProtocolOptions& opts, StreamRng& rng) {
    det.validate();
    opts.validate();
    SJumpResult out;
    out.switchings = opts.max_switchings;
    if (!excitation_present) return out;
    for (int k = 1; k <= opts.max_switchings; ++k) {
        if (rng.uniform() >= opts.s_jump_bright_fraction) continue;
        out.switchings = k;
        out.click = rng.bernoulli(det.eta2);
        return out;
    }
    return out;
}

ExactMoveResult move_pair_exact(const PairSplitting& key, const ModelParams& main_params,
                                const ModelParams& control_params,
                                std::array<int, 2> password_pair, const ProtocolOptions& opts) {
    opts.validate();
    main_params.validate();
    control_params.validate();
    PairSplitting k = key;
    k.canonicalize();
    if (!k.complete()) throw std::invalid_argument("secret key must be complete");
    const int n = k.n_atoms;
    const int u = password_pair[0], v = password_pair[1];
    if (u < 0 || v < 0 || u >= n || v >= n || u == v)
        throw std::invalid_argument("bad password pair");

    const auto g_main = main_params.couplings();
    const auto g_ctrl = control_params.couplings();
    auto pair_of = [&](int atom) {
        for (std::size_t i = 0; i < k.pairs.size(); ++i)
            if (k.pairs[i][0] == atom || k.pairs[i][1] == atom) return static_cast<int>(i);
        return -1;
    };
    std::vector<int> affected{pair_of(u)};
    if (pair_of(v) != affected[0]) affected.push_back(pair_of(v));

    std::vector<Vec4> states;
    for (const int pi : affected) {
        const int a = k.pairs[pi][0], b = k.pairs[pi][1];
        const double nrm = std::hypot(g_main[a], g_main[b]);
        Vec4 s = Vec4::Zero();
        s[1] = g_main[a] / nrm;
        s[2] = -g_main[b] / nrm;
        states.push_back(s);
    }

    double survival = 1.0;
    const int steps = opts.exact_steps;
    for (int phase = 0; phase < 2; ++phase) {
        for (int s = 1; s <= steps; ++s) {
            const double f = phase == 0 ? 1.0 - static_cast<double>(s) / steps
                                        : static_cast<double>(s) / steps;
            for (std::size_t idx = 0; idx < affected.size(); ++idx) {
                const int pi = affected[idx];
                const int a = k.pairs[pi][0], b = k.pairs[pi][1];
                PairCouplings c;
                auto fill = [&](int atom, double& cm, double& cc) {
                    if (atom == u || atom == v) {
                        cm = phase == 0 ? f * g_main[atom] : 0.0;
                        cc = phase == 0 ? 0.0 : f * g_ctrl[atom];
                    } else {
                        cm = g_main[atom];  // the partner stays in the main cavity
                        cc = 0.0;
                    }
                };
                fill(a, c.main_a, c.ctrl_a);
                fill(b, c.main_b, c.ctrl_b);
                const Vec4 dark = project_joint_dark(states[idx], c);
                const double w = clamp_probability(1.0 - dark.squaredNorm());
                survival *= 1.0 - w;
                if (w < 1.0 && dark.norm() > 0.0) states[idx] = dark.normalized();
                else states[idx] = Vec4::Zero();
            }
        }
    }

    ExactMoveResult out;
    out.emission_probability = 1.0 - survival;

    // conditional no-emission state over the affected atoms
    std::optional<StateVector> post;
    for (std::size_t idx = 0; idx < affected.size(); ++idx) {
        const int pi = affected[idx];
        const int a = k.pairs[pi][0], b = k.pairs[pi][1];
        Space sp = Space::labeled({a, b}, 0, std::nullopt);
        StateVector sv(sp);
        if (survival > 0.0) {
            for (int b0 = 0; b0 < 2; ++b0)
                for (int b1 = 0; b1 < 2; ++b1) {
                    BasisState bs;
                    bs.bits = {static_cast<std::uint8_t>(b0), static_cast<std::uint8_t>(b1)};
                    sv.set_amplitude(bs, states[idx][b0 * 2 + b1]);
                }
        }
        post = post ? tensor(*post, sv) : std::move(sv);
    }
    out.post_move_state = std::move(*post);
    return out;
}

} // namespace qlock
