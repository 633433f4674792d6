#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qlock/dark.hpp"
#include "qlock/security.hpp"

using namespace qlock;

TEST_CASE("matchings_count: exact values and error handling") {
    CHECK(matchings_count(2) == 1);
    CHECK(matchings_count(4) == 3);
    CHECK(matchings_count(6) == 15);
    CHECK(matchings_count(24) == BigInt("316234143225"));
    CHECK_THROWS_AS((void)matchings_count(3), std::invalid_argument);
    CHECK_THROWS_AS((void)matchings_count(0), std::invalid_argument);
}

TEST_CASE("matchings_count satisfies M(n) = (n-1) M(n-2)") {
    for (int n = 4; n <= 30; n += 2)
        CHECK(matchings_count(n) == BigInt(n - 1) * matchings_count(n - 2));
}

TEST_CASE("matchings_count agrees with brute-force enumeration for n <= 10") {
    for (int n = 2; n <= 10; n += 2) {
        CHECK(matchings_count(n) == BigInt(oracle::count_matchings(n)));
        CHECK(matchings_count(n) == BigInt(enumerate_matchings(n).size()));
    }
}

TEST_CASE("guess_probability: worked values and the paper's 24-atom bound") {
    CHECK(guess_probability(4) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const double p24 = guess_probability(24);
    CHECK(p24 == doctest::Approx(3.1622138893727926e-12).epsilon(1e-12));
    CHECK(p24 <= 1e-8);  // "one hundred millionth" with ample headroom
}

TEST_CASE("key_length_for_target scans the double factorial") {
    CHECK(key_length_for_target(1.0 / 3.0) == 4);
    CHECK(key_length_for_target(1e-8) == 20);   // 19!! = 654,729,075
    CHECK(key_length_for_target(1e-12) == 26);  // 23!! is 3.16e11, not enough
    CHECK_THROWS_AS((void)key_length_for_target(0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)key_length_for_target(1.0), std::invalid_argument);
}

TEST_CASE("false accepts never happen for wrong passwords (ideal detectors)") {
    const ModelParams p = default_params(6);
    const auto est = false_accept_rate(6, p, DetectorModel::ideal(),
                                       AdversaryModel::OnePairOff, 100000, 4,
                                       VerifyMode::Abstract, {}, 4);
    CHECK(est.successes == 0);
    CHECK(est.rate == 0.0);
    CHECK(est.trials == 100000);
}

TEST_CASE("transit loss alone cannot open the lock") {
    DetectorModel det = DetectorModel::ideal();
    det.p_transit_loss = 0.5;
    const ModelParams p = default_params(6);
    const auto est = false_accept_rate(6, p, det, AdversaryModel::OnePairOff, 100000, 5,
                                       VerifyMode::Abstract, {}, 4);
    CHECK(est.successes == 0);  // the S-jump check catches ground-state pairs
}

TEST_CASE("false-accept rate stays zero across a detector grid (monotonicity)") {
    const ModelParams p = default_params(4);
    double prev = 0.0;
    for (double eta : {1.0, 0.8, 0.5}) {
        for (double p_loss : {0.0, 0.3, 0.8}) {
            DetectorModel det;
            det.eta1 = det.eta2 = eta;
            det.p_transit_loss = p_loss;
            // common random numbers: the same seed across the whole grid
            const auto est = false_accept_rate(4, p, det, AdversaryModel::OnePairOff,
                                               20000, 17, VerifyMode::Abstract, {}, 4);
            CHECK(est.rate >= prev);  // non-increasing in eta, non-decreasing in loss
            CHECK(est.rate == 0.0);   // wrong passwords always trip some check
        }
    }
}

TEST_CASE("random-password success matches the guessing probability at n = 6") {
    const ModelParams p = default_params(6);
    const std::uint64_t trials = 1000000;
    const auto est = false_accept_rate(6, p, DetectorModel::ideal(),
                                       AdversaryModel::RandomPassword, trials, 99,
                                       VerifyMode::Abstract, {}, 4);
    const double expect = guess_probability(6);  // 1/15
    const double sigma = std::sqrt(expect * (1 - expect) / static_cast<double>(trials));
    CHECK(std::abs(est.rate - expect) <= 3.0 * sigma);
}

TEST_CASE("resampling adversary: attempts to success are geometric") {
    const ModelParams p = default_params(4);
    const auto s = resampling_attempts(4, p, DetectorModel::ideal(), 400, 123);
    CHECK(s.trials == 400);
    CHECK(std::abs(s.mean_attempts - 3.0) < 0.6);  // 3 matchings at n = 4
    CHECK(s.max_attempts >= 1);
}

TEST_CASE("false rejects: zero at the ideal point") {
    const ModelParams p = default_params(6);
    const auto est = false_reject_rate(6, p, DetectorModel::ideal(), 100000, 7,
                                       VerifyMode::Abstract, {}, 4);
    CHECK(est.successes == 0);
    CHECK(est.rate == 0.0);
}

TEST_CASE("false rejects grow with asynchrony and key length") {
    const std::uint64_t trials = 40000;
    double prev_eps = -1.0;
    for (double eps : {0.0, 0.01, 0.05, 0.2}) {
        DetectorModel det;
        det.asynchrony_epsilon = eps;
        const auto est = false_reject_rate(6, default_params(6), det, trials, 11,
                                           VerifyMode::Abstract, {}, 4);
        CHECK(est.rate >= prev_eps);
        prev_eps = est.rate;
    }
    double prev_n = -1.0;
    DetectorModel det;
    det.asynchrony_epsilon = 0.05;
    for (int n : {4, 8, 16, 24}) {
        const auto est = false_reject_rate(n, default_params(n), det, trials, 11,
                                           VerifyMode::Abstract, {}, 4);
        CHECK(est.rate >= prev_n);
        prev_n = est.rate;
    }
}

TEST_CASE("small-epsilon false-reject rate matches the analytic event tree") {
    // every asynchrony emission forfeits the pair, so
    //   rate = 1 - (1 - eps * p_unrec)^(n/2)
    // with p_unrec supplied by the event-tree helper.
    const std::uint64_t trials = 100000;
    for (double eps : {0.005, 0.01}) {
        DetectorModel det;
        det.asynchrony_epsilon = eps;
        const double p_unrec = asynchrony_reject_probability(det, {});
        for (int n : {6, 10}) {
            const double expect = 1.0 - std::pow(1.0 - eps * p_unrec, n / 2);
            const auto est = false_reject_rate(n, default_params(n), det, trials, 13,
                                               VerifyMode::Abstract, {}, 4);
            CHECK(std::abs(est.rate - expect) < 0.1 * expect);
        }
    }
}

TEST_CASE("estimates carry binomial errors and are reproducible by seed") {
    const ModelParams p = default_params(6);
    DetectorModel det;
    det.asynchrony_epsilon = 0.1;
    const auto a = false_reject_rate(6, p, det, 20000, 31, VerifyMode::Abstract, {}, 1);
    const auto b = false_reject_rate(6, p, det, 20000, 31, VerifyMode::Abstract, {}, 4);
    CHECK(a.rate == b.rate);            // thread count cannot change the result
    CHECK(a.std_error == b.std_error);
    const double expect_se =
        std::sqrt(a.rate * (1 - a.rate) / static_cast<double>(a.trials));
    CHECK(a.std_error == doctest::Approx(expect_se).epsilon(1e-12));

    const auto c = false_reject_rate(6, p, det, 20000, 32, VerifyMode::Abstract, {}, 1);
    CHECK(a.rate != c.rate);  // seeds matter
    CHECK_THROWS_AS(
        (void)false_reject_rate(6, p, det, 0, 1, VerifyMode::Abstract, {}, 1),
        std::invalid_argument);
}

TEST_CASE("security report carries the exact count and the grid") {
    const ModelParams p = default_params(6);
    std::vector<DetectorModel> grid;
    DetectorModel ideal;
    grid.push_back(ideal);
    DetectorModel lossy;
    lossy.asynchrony_epsilon = 0.05;
    grid.push_back(lossy);

    const SecurityReport r = security_report(6, p, grid, 5000, 21);
    CHECK(r.matchings == 15);
    CHECK(r.guess_prob == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
    CHECK(r.meets_target == false);  // 1/15 is far above 1e-8
    CHECK(r.minimal_n_for_target == 20);
    REQUIRE(r.grid.size() == 2);
    CHECK(r.grid[0].far.rate == doctest::Approx(guess_probability(6)).epsilon(0.5));
    CHECK(r.grid[0].frr.rate == 0.0);
    CHECK(r.grid[1].frr.rate > 0.0);

    const auto j = report_to_json(r);
    CHECK(j.at("matchings_count").get<std::string>() == "15");
    const std::string csv = report_grid_csv(r);
    CHECK(csv.find("eta1,eta2,p_loss,epsilon,n,far,far_stderr,frr,frr_stderr,trials,seed") !=
          std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows
}
