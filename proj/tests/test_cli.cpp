// End-to-end tests of the qlock binary: exit codes, file formats and
// seed-reproducibility. The binary path arrives in the QLOCK_BIN environment
// variable (set by CTest).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string binary() {
    const char* p = std::getenv("QLOCK_BIN");
    REQUIRE_MESSAGE(p != nullptr, "QLOCK_BIN must point to the qlock binary");
    return p;
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("qlock_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

int run(const std::string& args) {
    const std::string cmd = binary() + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// drop the timestamp (the one legitimately varying field) before comparison
std::string without_timestamp(std::string text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.find("timestamp") == std::string::npos) out << line << '\n';
    return out.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

} // namespace

TEST_CASE("keygen: files, shapes, determinism, odd n") {
    TempDir d1, d2;
    CHECK(run("--seed 42 --out " + d1.path.string() + " keygen --n 4") == 0);
    const json key = json::parse(slurp(d1.path / "key.json"));
    CHECK(key.at("n_atoms") == 4);
    CHECK(key.at("pairs").size() == 2);
    CHECK(key.at("metadata").at("seed") == 42);

    const json state = json::parse(slurp(d1.path / "lock_state.json"));
    int nonzero = 0;
    for (const auto& a : state.at("amplitudes"))
        if (a.at(0).get<double>() != 0.0 || a.at(1).get<double>() != 0.0) ++nonzero;
    CHECK(nonzero == 4);  // two singlet factors, two terms each

    CHECK(run("--seed 42 --out " + d2.path.string() + " keygen --n 4") == 0);
    CHECK(without_timestamp(slurp(d1.path / "key.json")) ==
          without_timestamp(slurp(d2.path / "key.json")));
    CHECK(without_timestamp(slurp(d1.path / "lock_state.json")) ==
          without_timestamp(slurp(d2.path / "lock_state.json")));

    CHECK(run("--seed 1 --out " + d1.path.string() + " keygen --n 3") == 2);
}

TEST_CASE("verify: accept, reject with pair identified, input errors") {
    TempDir d;
    REQUIRE(run("--seed 7 --out " + d.path.string() + " keygen --n 6") == 0);
    const std::string key = (d.path / "key.json").string();

    // correct password
    CHECK(run("--seed 8 --out " + d.path.string() + " verify --key " + key +
              " --password " + key) == 0);
    // both modes accept the key
    CHECK(run("--seed 8 --out " + d.path.string() + " verify --mode exact --key " + key +
              " --password " + key) == 0);

    // swap partners across the first two pairs -> reject, pair identified
    json k = json::parse(slurp(d.path / "key.json"));
    auto pairs = k.at("pairs");
    std::swap(pairs[0][1], pairs[1][1]);
    json pw{{"n_atoms", 6}, {"pairs", pairs}};
    write_file(d.path / "wrong.json", pw.dump());
    CHECK(run("--seed 9 --out " + d.path.string() + " verify --key " + key +
              " --password " + (d.path / "wrong.json").string()) == 1);
    const json tr = json::parse(slurp(d.path / "transcript.json"));
    CHECK(tr.at("decision") == "reject");
    CHECK(tr.at("rejecting_pair_index").is_number());

    // wrong atom count -> usage error
    json badn{{"n_atoms", 4}, {"pairs", {{0, 1}, {2, 3}}}};
    write_file(d.path / "badn.json", badn.dump());
    CHECK(run("--seed 9 --out " + d.path.string() + " verify --key " + key +
              " --password " + (d.path / "badn.json").string()) == 2);

    // malformed file -> usage error
    write_file(d.path / "garbage.json", "{not json");
    CHECK(run("--seed 9 --out " + d.path.string() + " verify --key " + key +
              " --password " + (d.path / "garbage.json").string()) == 2);
}

TEST_CASE("verify transcripts are reproducible for a fixed seed") {
    TempDir d1, d2;
    REQUIRE(run("--seed 3 --out " + d1.path.string() + " keygen --n 4") == 0);
    const std::string key = (d1.path / "key.json").string();
    // derive a guaranteed-wrong password by swapping partners across pairs
    json k = json::parse(slurp(d1.path / "key.json"));
    auto pairs = k.at("pairs");
    std::swap(pairs[0][1], pairs[1][1]);
    json pw{{"n_atoms", 4}, {"pairs", pairs}};
    const std::string pw_file = (d1.path / "pw.json").string();
    write_file(pw_file, pw.dump());

    const std::string flags = " --eta1 0.7 --eta2 0.8 --p-loss 0.3 --epsilon 0.1";
    CHECK(run("--seed 55 --out " + d1.path.string() + " verify --key " + key +
              " --password " + pw_file + flags) == 1);
    CHECK(run("--seed 55 --out " + d2.path.string() + " verify --key " + key +
              " --password " + pw_file + flags) == 1);
    CHECK(without_timestamp(slurp(d1.path / "transcript.json")) ==
          without_timestamp(slurp(d2.path / "transcript.json")));
}

TEST_CASE("prep-sweep: grid shape, zero row, determinism across threads") {
    TempDir d1, d2;
    const std::string grid = " prep-sweep --ds 0 0.1 0.2 --dg 0 0.1 0.2 --samples 400";
    CHECK(run("--seed 31 --threads 1 --out " + d1.path.string() + grid) == 0);
    CHECK(run("--seed 31 --threads 4 --out " + d2.path.string() + grid) == 0);

    const std::string csv = slurp(d1.path / "prep_sweep.csv");
    CHECK(without_timestamp(csv) == without_timestamp(slurp(d2.path / "prep_sweep.csv")));

    int rows = 0;
    bool zero_row_ok = false;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("ds,", 0) == 0) continue;
        ++rows;
        if (line.rfind("0,0,", 0) == 0) {
            const auto a = line.find(',', 4);
            const auto b = line.find(',', a + 1);
            const double y = std::stod(line.substr(b + 1));
            zero_row_ok = y < 1e-14;  // no shift, no singlet
        }
    }
    CHECK(rows == 9);
    CHECK(zero_row_ok);

    CHECK(run("--seed 31 --out " + d1.path.string() + " prep-sweep --ds 0.1 --samples 0") == 2);
}

TEST_CASE("analyze: key-space numbers, FAR zero, bad input") {
    TempDir d;
    CHECK(run("--seed 12 --out " + d.path.string() +
              " analyze --n 24 --trials 200 --adversary one-pair-off") == 0);
    const json r = json::parse(slurp(d.path / "security_report.json"));
    CHECK(r.at("matchings_count") == "316234143225");
    const double gp = r.at("guess_probability").get<double>();
    CHECK(gp > 3.1e-12);
    CHECK(gp < 3.2e-12);
    CHECK(r.at("meets_target") == true);
    CHECK(r.at("minimal_n_for_target") == 20);

    CHECK(run("--seed 13 --threads 4 --out " + d.path.string() +
              " analyze --n 4 --trials 10000 --adversary one-pair-off") == 0);
    const json r4 = json::parse(slurp(d.path / "security_report.json"));
    CHECK(r4.at("grid")[0].at("far") == 0.0);
    CHECK(r4.at("grid")[0].at("frr") == 0.0);

    CHECK(run("--seed 13 --out " + d.path.string() + " analyze --n 4 --trials 0") == 2);
    CHECK(run("--seed 13 --out " + d.path.string() + " analyze --n 5 --trials 10") == 2);
}

TEST_CASE("analyze reports are identical across thread counts") {
    TempDir d1, d2;
    const std::string args =
        " analyze --n 6 --trials 4000 --epsilon 0 0.05 --eta2 1.0 0.9";
    CHECK(run("--seed 77 --threads 1 --out " + d1.path.string() + args) == 0);
    CHECK(run("--seed 77 --threads 8 --out " + d2.path.string() + args) == 0);
    CHECK(without_timestamp(slurp(d1.path / "security_report.json")) ==
          without_timestamp(slurp(d2.path / "security_report.json")));
    CHECK(without_timestamp(slurp(d1.path / "security_grid.csv")) ==
          without_timestamp(slurp(d2.path / "security_grid.csv")));
}

TEST_CASE("keygen with simulated preparation writes the prep log") {
    TempDir d;
    CHECK(run("--seed 6 --out " + d.path.string() +
              " keygen --n 4 --simulate-prep-ds 0.5") == 0);
    const json log = json::parse(slurp(d.path / "prep_log.json"));
    REQUIRE(log.is_array());
    CHECK(log.size() == 2);
    for (const auto& entry : log) {
        CHECK(entry.at("pair").size() == 2);
        CHECK(entry.at("attempts").get<int>() >= 1);
    }
}

TEST_CASE("spectrum prints sector eigenvalues") {
    TempDir d;
    const std::string cmd = binary() + " spectrum --n 1 --cutoff 1 --sector 1 > " +
                            (d.path / "spec.txt").string() + " 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const std::string out = slurp(d.path / "spec.txt");
    CHECK(out.find("sector,index,eigenvalue") != std::string::npos);
    CHECK(out.find("1,0,") != std::string::npos);
    CHECK(out.find("1,1,") != std::string::npos);
}

TEST_CASE("unknown flags and missing subcommands exit with code 2") {
    CHECK(run("frobnicate") == 2);
    CHECK(run("keygen") == 2);              // --n is required
    CHECK(run("keygen --n 4 --bogus 1") == 2);
}
