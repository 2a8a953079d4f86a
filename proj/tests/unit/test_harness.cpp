#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mmsk/error.hpp"
#include "mmsk/harness.hpp"

using namespace mmsk;

TEST_CASE("reference design tables") {
    const auto alloc = reference_allocations();
    const auto al = reference_alphabets();
    REQUIRE(alloc.size() == 4);
    REQUIRE(al.size() == 4);
    std::set<int> all;
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(alloc[k].size() == 4);
        all.insert(alloc[k].begin(), alloc[k].end());
        CHECK(al[k].size() == 14);
        CHECK(std::set<Mixture>(al[k].begin(), al[k].end()).size() == 14);
        for (const auto& m : al[k])
            for (int q : m.constituents()) CHECK(std::count(alloc[k].begin(), alloc[k].end(), q) == 1);
    }
    CHECK(all.size() == 16);
    CHECK(al[0][0] == Mixture({4, 13}));
    CHECK(al[0][1] == Mixture({0, 10}));
}

TEST_CASE("scenario from the reference book") {
    ExperimentConfig cfg;
    const auto sc = make_scenario(cfg);
    CHECK(sc.book.mixture_count() == 16);
    CHECK(sc.book.reception == sc.book.construction);
    cfg.alphabet_size = 15;
    CHECK_THROWS_AS(make_scenario(cfg), Error);
}

TEST_CASE("random pair books") {
    std::vector<ChannelResponse> chans(20);
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
        const auto book = random_pair_book(rng, 20, 4, 4, 4, chans, 50);
        std::set<int> used;
        for (std::size_t k = 0; k < 4; ++k) {
            used.insert(book.allocations[k].begin(), book.allocations[k].end());
            std::set<Mixture> distinct;
            for (const auto& m : book.alphabets[k]) {
                CHECK(m.size() == 2);
                distinct.insert(m);
            }
            CHECK(distinct.size() == 4);
        }
        CHECK(used.size() == 16);
    }
    CHECK_THROWS_AS(random_pair_book(rng, 20, 4, 4, 7, chans, 50), Error);
    CHECK_THROWS_AS(random_pair_book(rng, 10, 4, 4, 2, chans, 50), Error);
}

TEST_CASE("wilson interval closed forms") {
    const double z = 1.959963984540054;
    auto [lo, hi] = wilson_interval(0, 10);
    CHECK(lo == 0.0);
    CHECK(hi == doctest::Approx(z * z / (10 + z * z)));
    std::tie(lo, hi) = wilson_interval(10, 10);
    CHECK(hi == doctest::Approx(1.0));
    CHECK(lo == doctest::Approx(10 / (10 + z * z)));
    std::tie(lo, hi) = wilson_interval(50, 100);
    CHECK((lo + hi) / 2 == doctest::Approx(0.5));
    CHECK(hi - lo == doctest::Approx(2 * z * std::sqrt(0.25 / 100 + z * z / 40000) / (1 + z * z / 100)));
    CHECK_THROWS_AS(wilson_interval(0, 0), Error);
}

TEST_CASE("wilson interval coverage") {
    // Exact binomial coverage at a few operating points should be near 95%.
    for (auto [n, p] : {std::pair{200, 0.05}, std::pair{500, 0.2}, std::pair{1000, 0.01}}) {
        double coverage = 0;
        double logp = std::log(p), logq = std::log1p(-p);
        for (int k = 0; k <= n; ++k) {
            const double pmf = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                                        k * logp + (n - k) * logq);
            const auto [lo, hi] = wilson_interval(k, n);
            if (lo <= p && p <= hi) coverage += pmf;
        }
        CHECK(coverage > 0.92);
    }
}

TEST_CASE("independent estimates bracket the pooled rate") {
    ExperimentConfig cfg;
    cfg.trials = 300;
    const auto sc = make_scenario(cfg);
    std::vector<PeEstimate> est;
    int errors = 0, trials = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        cfg.seed = 1000 + s;
        est.push_back(run_single_sample(sc, cfg, 1.0, false, true));
        errors += est.back().errors;
        trials += est.back().trials;
    }
    const double pooled = static_cast<double>(errors) / trials;
    int inside = 0;
    for (const auto& e : est) inside += pooled >= e.ci_lo && pooled <= e.ci_hi;
    CHECK(inside >= 17);
}

TEST_CASE("trials depend only on their own stream") {
    ExperimentConfig cfg;
    cfg.trials = 30;
    const auto sc = make_scenario(cfg);
    const auto a = run_single_sample(sc, cfg, 3.0, true, false, true);
    cfg.trials = 12;
    const auto b = run_single_sample(sc, cfg, 3.0, true, false, true);
    for (int t = 0; t < 12; ++t) {
        CHECK(a.records[t].mixture == b.records[t].mixture);
        CHECK(a.records[t].detected == b.records[t].detected);
        CHECK(a.records[t].status == b.records[t].status);
    }
    CHECK(a.errors == std::count_if(a.records.begin(), a.records.end(), [](const auto& r) { return !r.correct; }));
    for (const auto& r : a.records) CHECK(r.correct == (r.detected == r.mixture));
}

TEST_CASE("noise-free high-signal limit has no errors") {
    ExperimentConfig cfg;
    cfg.trials = 100;
    cfg.reception.noise_mean = 0;
    cfg.reception.threshold = 0;
    cfg.x_bar_mix = 1e4;
    cfg.delta = 20;
    const auto sc = make_scenario(cfg);
    const auto pe = run_single_sample(sc, cfg, 1.0, false, true);
    CHECK(pe.errors == 0);
}

TEST_CASE("sweep layout") {
    ExperimentConfig cfg;
    cfg.trials = 10;
    const auto sc = make_scenario(cfg);
    const std::vector<double> grid = {1, 3, 10};
    const std::vector<Variant> variants = {Variant::optimized, Variant::random_adaptive};
    const auto rows = sweep_epsilon(sc, cfg, grid, variants);
    REQUIRE(rows.size() == 6);
    CHECK(rows[1].epsilon == 1);
    CHECK(rows[1].variant == Variant::random_adaptive);
    CHECK(rows[2].epsilon == 3);
    CHECK(best_row(rows, Variant::optimized).estimate.errors <= rows[0].estimate.errors);
    CHECK_THROWS_AS(sweep_epsilon(sc, cfg, {}, variants), Error);
    CHECK_THROWS_AS(best_row(rows, Variant::random), Error);
}

TEST_CASE("variant names") {
    for (Variant v : {Variant::optimized, Variant::optimized_adaptive, Variant::random, Variant::random_adaptive})
        CHECK(variant_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(variant_from_string("best"), Error);
}

TEST_CASE("config validation") {
    ExperimentConfig cfg;
    cfg.trials = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.mode = "batch";
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.epsilons = {1, -2};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    CHECK(cfg.recovery(2.5).delta == 2.5);
    cfg.delta = 0.7;
    CHECK(cfg.recovery(2.5).delta == 0.7);
}

TEST_CASE("two-release trace") {
    ExperimentConfig cfg;
    const auto sc = make_scenario(cfg);
    const auto tr = run_multisample(sc, cfg, {{0, 0.0}, {1, 4.0}});
    CHECK(tr.y.cols() == 50);
    CHECK(tr.release(0, 0) == 1e5);
    CHECK(tr.release(1, 19) == 1e5);
    REQUIRE(tr.events.size() == 2);
    CHECK(tr.events[0].mixture == 0);
    CHECK(std::fabs(release_time_estimate(tr.events[0].sample, 0.2) - 0.0) <= 0.2);
    CHECK(tr.events[1].mixture == 1);
    CHECK(std::fabs(release_time_estimate(tr.events[1].sample, 0.2) - 4.0) <= 0.2);
}

TEST_CASE("empty schedule yields no events") {
    ExperimentConfig cfg;
    cfg.reception.noise_mean = 0.1;
    const auto sc = make_scenario(cfg);
    const auto tr = run_multisample(sc, cfg, {});
    CHECK(tr.y.isZero());
    CHECK(tr.events.empty());
    CHECK(tr.release.isZero());
}

TEST_CASE("noise-free trace identifies every release") {
    ExperimentConfig cfg;
    cfg.reception.noise_mean = 0;
    cfg.reception.threshold = 0;
    cfg.deterministic_arrivals = true;
    cfg.reception.samples = 100;
    const auto sc = make_scenario(cfg);
    const std::vector<ScheduledRelease> sched = {{2, 0.0}, {9, 6.0}, {13, 12.0}};
    const auto tr = run_multisample(sc, cfg, sched);
    REQUIRE(tr.events.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(tr.events[i].mixture == sched[i].mixture);
        CHECK(std::fabs(release_time_estimate(tr.events[i].sample, 0.2) - sched[i].time) <= 0.2);
    }
}

TEST_CASE("single release: estimate concentrates on the constituents") {
    ExperimentConfig cfg;
    const auto sc = make_scenario(cfg);
    const auto tr = run_multisample(sc, cfg, {{0, 0.0}});
    Eigen::Index peak = 0;
    tr.x_bar.colwise().sum().maxCoeff(&peak);
    Eigen::Index top = 0;
    tr.x_hat.col(peak).maxCoeff(&top);
    CHECK(sc.book.mixture(0).contains(static_cast<int>(top)));
}

TEST_CASE("schedule errors") {
    ExperimentConfig cfg;
    const auto sc = make_scenario(cfg);
    CHECK_THROWS_AS(run_multisample(sc, cfg, {{16, 0.0}}), Error);
    CHECK_THROWS_AS(run_multisample(sc, cfg, {{1, 0.0}, {1, 3.0}}), Error);
    CHECK_THROWS_AS(run_multisample(sc, cfg, {{1, -1.0}}), Error);
}

TEST_CASE("pca on a line and under rotation") {
    Eigen::MatrixXd line(50, 3);
    for (int i = 0; i < 50; ++i) line.row(i) = Eigen::RowVector3d(1, -2, 0.5) * (i * 0.3 - 4) + Eigen::RowVector3d(3, 3, 3);
    const auto p = pca_project(line, 2);
    CHECK(p.explained[0] == doctest::Approx(1.0));
    CHECK(p.explained[1] == doctest::Approx(0.0).scale(1));

    Rng rng(2);
    Eigen::MatrixXd s(200, 3);
    for (int i = 0; i < 200; ++i) s.row(i) = Eigen::RowVector3d(3 * rng.normal(), rng.normal(), 0.3 * rng.normal());
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    const auto a = pca_project(s, 2);
    const auto b = pca_project(s * rot.transpose(), 2);
    for (int k = 0; k < 2; ++k) {
        const double dot = a.scores.col(k).dot(b.scores.col(k)) / a.scores.col(k).squaredNorm();
        CHECK(std::fabs(dot) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((a.scores.col(k) - dot * b.scores.col(k)).norm() < 1e-8 * a.scores.col(k).norm());
    }
    CHECK(a.explained[0] == doctest::Approx(b.explained[0]));
    CHECK_THROWS_AS(pca_project(Eigen::MatrixXd::Ones(1, 3), 2), Error);
}

TEST_CASE("pca scenario cluster geometry") {
    ReceptionConfig cfg;
    const std::vector<std::pair<double, double>> cases = {{0, 0}, {50, 0}, {100, 0}, {0, 50}, {0, 100}, {50, 50}};
    for (bool standardize : {false, true}) {
        const auto sc = run_pca_scenario(load_fixture_affinity(), cfg, cases, 0, 1, 12000, 1, standardize);
        auto dist = [&](int i, int j) { return (sc.centroids.row(i) - sc.centroids.row(j)).norm(); };
        CHECK(sc.pca.explained.sum() <= 1.0);
        if (standardize) {
            WARN(dist(5, 1) > dist(1, 2));
            WARN(dist(5, 2) > dist(1, 2));
        } else {
            CHECK(dist(5, 1) > dist(1, 2));
            CHECK(dist(5, 2) > dist(1, 2));
        }
    }
}
