// Command-line front end: key generation, preparation sweeps, verification
// runs, security reports and spectrum diagnostics, all file-based and
// reproducible from a single seed.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qlock/dark.hpp"
#include "qlock/hamiltonian.hpp"
#include "qlock/io.hpp"
#include "qlock/model.hpp"
#include "qlock/prep.hpp"
#include "qlock/protocol.hpp"
#include "qlock/security.hpp"
#include "qlock/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitReject = 1;
constexpr int kExitError = 2;

std::uint64_t resolve_seed(std::optional<std::uint64_t> seed) {
    if (seed) return *seed;
    std::random_device rd;
    const std::uint64_t s =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    std::cout << "seed: " << s << "\n";
    return s;
}

qlock::ModelParams load_params(const std::string& params_file, int n_atoms_fallback) {
    qlock::ModelParams p = params_file.empty()
                               ? qlock::default_params(n_atoms_fallback)
                               : qlock::params_from_json(qlock::read_json_file(params_file));
    if (p.rwa_warning())
        std::cerr << "warning: max coupling >= 0.1 omega; the weak-interaction model "
                     "is being used outside its regime\n";
    return p;
}

qlock::VerifyMode parse_mode(const std::string& mode) {
    if (mode == "abstract") return qlock::VerifyMode::Abstract;
    if (mode == "exact") return qlock::VerifyMode::Exact;
    throw CLI::ValidationError("--mode", "must be 'abstract' or 'exact'");
}

struct DetectorFlags {
    std::vector<double> eta1{1.0}, eta2{1.0}, p_loss{0.0}, epsilon{0.0};

    void attach(CLI::App* cmd) {
        cmd->add_option("--eta1", eta1, "D1 efficiency value(s)");
        cmd->add_option("--eta2", eta2, "D2 efficiency value(s)");
        cmd->add_option("--p-loss", p_loss, "transit-loss probability value(s)");
        cmd->add_option("--epsilon", epsilon, "asynchronous-movement emission probability value(s)");
    }

    qlock::DetectorModel single() const {
        if (eta1.size() != 1 || eta2.size() != 1 || p_loss.size() != 1 || epsilon.size() != 1)
            throw CLI::ValidationError("detector flags", "expected a single value per flag");
        return grid().front();
    }

    std::vector<qlock::DetectorModel> grid() const {
        std::vector<qlock::DetectorModel> g;
        for (double e1 : eta1)
            for (double e2 : eta2)
                for (double pl : p_loss)
                    for (double ep : epsilon) {
                        qlock::DetectorModel d;
                        d.eta1 = e1;
                        d.eta2 = e2;
                        d.p_transit_loss = pl;
                        d.asynchrony_epsilon = ep;
                        d.validate();
                        g.push_back(d);
                    }
        return g;
    }

    json to_json() const {
        return json{{"eta1", eta1}, {"eta2", eta2}, {"p_loss", p_loss}, {"epsilon", epsilon}};
    }
};

int cmd_keygen(int n_atoms, const std::string& params_file, double prep_ds,
               std::optional<std::uint64_t> seed_opt, const std::string& out_dir) {
    if (n_atoms < 2 || n_atoms % 2 != 0) {
        std::cerr << "keygen: n must be even and >= 2\n";
        return kExitError;
    }
    const std::uint64_t seed = resolve_seed(seed_opt);
    const qlock::ModelParams params = load_params(params_file, n_atoms);
    const qlock::LockInstance lock = qlock::forge_lock(n_atoms, params, seed);

    json config{{"command", "keygen"},
                {"n_atoms", n_atoms},
                {"params", qlock::params_to_json(params)},
                {"simulate_prep_ds", prep_ds}};

    json key_json = qlock::splitting_to_json(lock.secret_key);
    key_json["metadata"] = qlock::artifact_metadata(seed, config);
    qlock::write_json_file(fs::path(out_dir) / "key.json", key_json);

    json state_json = qlock::state_to_json(*lock.state);
    state_json["metadata"] = qlock::artifact_metadata(seed, config);
    qlock::write_json_file(fs::path(out_dir) / "lock_state.json", state_json);

    std::cout << "wrote " << (fs::path(out_dir) / "key.json").string() << " and "
              << (fs::path(out_dir) / "lock_state.json").string() << "\n";

    if (prep_ds != 0.0) {
        // simulate the S-jump preparation of the forged key, pair by pair
        qlock::StarkJumpSpec spec;
        spec.ds = prep_ds;
        spec.hold_time_max = qlock::default_hold_time_max(params);
        const auto run = qlock::prepare_splitting(
            params, lock.secret_key, spec, qlock::derive_stream_seed(seed, "prep-sim"));
        json log = qlock::prep_log_to_json(run.attempts_log);
        qlock::write_json_file(fs::path(out_dir) / "prep_log.json", log);
        std::cout << "wrote " << (fs::path(out_dir) / "prep_log.json").string() << "\n";
    }
    return kExitOk;
}

int cmd_verify(const std::string& key_file, const std::string& password_file,
               const std::string& params_file, const DetectorFlags& det_flags,
               const std::string& mode_str, std::optional<std::uint64_t> seed_opt,
               const std::string& out_dir) {
    const std::uint64_t seed = resolve_seed(seed_opt);
    const qlock::PairSplitting key =
        qlock::splitting_from_json(qlock::read_json_file(key_file));
    const qlock::PairSplitting password =
        qlock::splitting_from_json(qlock::read_json_file(password_file));
    if (password.n_atoms != key.n_atoms)
        throw std::invalid_argument("password atom count does not match the lock");

    qlock::LockInstance lock;
    lock.secret_key = key;
    lock.main_params = load_params(params_file, key.n_atoms);
    lock.control_params = lock.main_params;

    const qlock::DetectorModel det = det_flags.single();
    const qlock::VerifyMode mode = parse_mode(mode_str);
    const qlock::Transcript t = qlock::verify(lock, password, det, mode, {}, seed);

    json config{{"command", "verify"},
                {"key_file", key_file},
                {"password_file", password_file},
                {"mode", mode_str},
                {"detector", det_flags.to_json()}};
    json out = qlock::transcript_to_json(t);
    out["metadata"] = qlock::artifact_metadata(seed, config);
    qlock::write_json_file(fs::path(out_dir) / "transcript.json", out);

    if (t.decision == qlock::Decision::Accept) {
        std::cout << "accept\n";
        return kExitOk;
    }
    std::cout << "reject (pair index " << t.rejecting_pair_index << ")\n";
    return kExitReject;
}

int cmd_prep_sweep(const std::string& params_file, std::vector<double> ds_values,
                   std::vector<double> dg_values, double t_max, std::uint64_t samples,
                   std::optional<std::uint64_t> seed_opt, int threads,
                   const std::string& out_dir) {
    if (ds_values.empty() || dg_values.empty()) {
        std::cerr << "prep-sweep: empty shift range\n";
        return kExitError;
    }
    if (samples == 0) {
        std::cerr << "prep-sweep: need at least one sample\n";
        return kExitError;
    }
    const std::uint64_t seed = resolve_seed(seed_opt);
    const qlock::ModelParams params = load_params(params_file, 2);
    if (params.n_atoms() != 2) {
        std::cerr << "prep-sweep: parameters must describe exactly two atoms\n";
        return kExitError;
    }
    const double T = t_max > 0 ? t_max : qlock::default_hold_time_max(params);

    // --threads is an execution knob, not configuration: the output is
    // seed-determined regardless of its value, so it is not echoed
    json config{{"command", "prep-sweep"}, {"params", qlock::params_to_json(params)},
                {"ds", ds_values},         {"dg", dg_values},
                {"T_max", T},              {"samples", samples}};

    std::string csv = qlock::csv_metadata_comments(seed, config);
    csv += "ds,dg,T_max,yield,stderr,n_samples,seed\n";
    std::uint64_t row = 0;
    for (double ds : ds_values) {
        for (double dg : dg_values) {
            qlock::StarkJumpSpec spec;
            spec.target_atom = 0;
            spec.ds = ds;
            spec.dg = dg;
            spec.hold_time_max = T;
            const auto est = qlock::prep_yield_mc(
                params, spec, samples, qlock::derive_stream_seed(seed, "sweep-row", row),
                threads);
            csv += qlock::format_double(ds) + "," + qlock::format_double(dg) + "," +
                   qlock::format_double(T) + "," + qlock::format_double(est.value) + "," +
                   qlock::format_double(est.std_error) + "," + std::to_string(samples) +
                   "," + std::to_string(seed) + "\n";
            ++row;
        }
    }
    qlock::write_text_file(fs::path(out_dir) / "prep_sweep.csv", csv);
    std::cout << "wrote " << (fs::path(out_dir) / "prep_sweep.csv").string() << "\n";
    return kExitOk;
}

int cmd_analyze(int n_atoms, const std::string& key_file, const DetectorFlags& det_flags,
                std::uint64_t trials, const std::string& adversary_str,
                std::optional<std::uint64_t> seed_opt, int threads,
                const std::string& out_dir) {
    if (trials == 0) {
        std::cerr << "analyze: need at least one trial\n";
        return kExitError;
    }
    if (!key_file.empty()) {
        const auto key = qlock::splitting_from_json(qlock::read_json_file(key_file));
        n_atoms = key.n_atoms;
    }
    if (n_atoms < 2 || n_atoms % 2 != 0) {
        std::cerr << "analyze: n must be even and >= 2\n";
        return kExitError;
    }
    const std::uint64_t seed = resolve_seed(seed_opt);
    const qlock::ModelParams params = qlock::default_params(n_atoms);
    qlock::AdversaryModel adversary;
    if (adversary_str == "random-password") adversary = qlock::AdversaryModel::RandomPassword;
    else if (adversary_str == "one-pair-off") adversary = qlock::AdversaryModel::OnePairOff;
    else throw CLI::ValidationError("--adversary", "must be 'random-password' or 'one-pair-off'");

    const auto report = qlock::security_report(n_atoms, params, det_flags.grid(), trials,
                                               seed, 1e-8, adversary, threads);

    json config{{"command", "analyze"},   {"n_atoms", n_atoms},
                {"detector", det_flags.to_json()}, {"trials", trials},
                {"adversary", adversary_str}};
    json out = qlock::report_to_json(report);
    out["metadata"] = qlock::artifact_metadata(seed, config);
    qlock::write_json_file(fs::path(out_dir) / "security_report.json", out);

    std::string csv = qlock::csv_metadata_comments(seed, config) + qlock::report_grid_csv(report);
    qlock::write_text_file(fs::path(out_dir) / "security_grid.csv", csv);

    std::cout << "n=" << report.n_atoms << " matchings=" << report.matchings.str()
              << " guess_probability=" << qlock::format_double(report.guess_prob)
              << " meets 1e-8 target: " << (report.meets_target ? "true" : "false") << "\n";
    std::cout << "wrote " << (fs::path(out_dir) / "security_report.json").string() << " and "
              << (fs::path(out_dir) / "security_grid.csv").string() << "\n";
    return kExitOk;
}

int cmd_spectrum(int n_atoms, const std::string& params_file, int cutoff, int sector) {
    const qlock::ModelParams params = load_params(params_file, n_atoms);
    const int n = params.n_atoms();
    const int max_m = n + cutoff;
    std::cout << "sector,index,eigenvalue\n";
    for (int m = 0; m <= max_m; ++m) {
        if (sector >= 0 && m != sector) continue;
        const auto evals = qlock::sector_spectrum(params, cutoff, m);
        for (std::size_t i = 0; i < evals.size(); ++i)
            std::cout << m << "," << i << "," << qlock::format_double(evals[i]) << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tavis-Cummings dark-state quantum lock simulator"};
    app.set_version_flag("--version", std::string(qlock::kToolName) + " " + qlock::kVersion);
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string params_file;
    int threads = 1;
    app.add_option("--seed", seed, "master seed (generated and printed when absent)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--params", params_file, "model parameters JSON file");
    app.add_option("--threads", threads, "worker threads for Monte Carlo loops")
        ->check(CLI::Range(1, 1024));

    // keygen
    auto* keygen = app.add_subcommand("keygen", "generate a secret key and its lock state");
    int kg_n = 0;
    double kg_prep_ds = 0.0;
    keygen->add_option("--n", kg_n, "number of atoms (even)")->required();
    keygen->add_option("--simulate-prep-ds", kg_prep_ds,
                       "also simulate the S-jump preparation with this shift and "
                       "write prep_log.json");

    // verify
    auto* verify = app.add_subcommand("verify", "run the two-cavity password verification");
    std::string vf_key, vf_password, vf_mode = "abstract";
    DetectorFlags vf_det;
    verify->add_option("--key", vf_key, "secret key JSON")->required();
    verify->add_option("--password", vf_password, "password JSON")->required();
    verify->add_option("--mode", vf_mode, "abstract | exact");
    vf_det.attach(verify);

    // prep-sweep
    auto* sweep = app.add_subcommand("prep-sweep", "singlet-preparation yield over a shift grid");
    std::vector<double> sw_ds, sw_dg{0.0};
    double sw_tmax = 0.0;
    std::uint64_t sw_samples = 10000;
    sweep->add_option("--ds", sw_ds, "frequency shift value(s)")->required();
    sweep->add_option("--dg", sw_dg, "coupling shift value(s)");
    sweep->add_option("--tmax", sw_tmax, "hold-time upper bound (default 20*pi/g-bar)");
    sweep->add_option("--samples", sw_samples, "Monte Carlo samples per grid point");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "key-space accounting and FAR/FRR estimation");
    int an_n = 0;
    std::string an_key, an_adversary = "random-password";
    std::uint64_t an_trials = 10000;
    DetectorFlags an_det;
    analyze->add_option("--n", an_n, "number of atoms (even)");
    analyze->add_option("--key", an_key, "take the atom count from this key file");
    analyze->add_option("--trials", an_trials, "Monte Carlo trials per grid point");
    analyze->add_option("--adversary", an_adversary, "random-password | one-pair-off");
    an_det.attach(analyze);

    // spectrum
    auto* spectrum = app.add_subcommand("spectrum", "sector eigenvalues of the Hamiltonian");
    int sp_n = 2, sp_cutoff = 1, sp_sector = -1;
    spectrum->add_option("--n", sp_n, "number of atoms");
    spectrum->add_option("--cutoff", sp_cutoff, "photon cutoff");
    spectrum->add_option("--sector", sp_sector, "restrict to one excitation sector");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitError;
    }

    try {
        if (keygen->parsed())
            return cmd_keygen(kg_n, params_file, kg_prep_ds, seed, out_dir);
        if (verify->parsed())
            return cmd_verify(vf_key, vf_password, params_file, vf_det, vf_mode, seed, out_dir);
        if (sweep->parsed())
            return cmd_prep_sweep(params_file, sw_ds, sw_dg, sw_tmax, sw_samples, seed,
                                  threads, out_dir);
        if (analyze->parsed())
            return cmd_analyze(an_n, an_key, an_det, an_trials, an_adversary, seed, threads,
                               out_dir);
        if (spectrum->parsed()) return cmd_spectrum(sp_n, params_file, sp_cutoff, sp_sector);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
