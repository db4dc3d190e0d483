#include "catch_amalgamated.hpp"

#include "hiermeta/analytics.hpp"
#include "hiermeta/refpath.hpp"
#include "support.hpp"

using namespace hiermeta;
using Catch::Approx;

TEST_CASE("theta is the block-interleaved order") {
    auto p = LatticeParams::standard(2, 2, 1.0, 0.1);
    CHECK(theta(1, p) == 1);
    CHECK(theta(2, p) == 3);
    CHECK(theta(3, p) == 2);
    CHECK(theta(4, p) == 4);
    auto q = LatticeParams::standard(3, 3, 1.0, 0.1);
    std::vector<u64> all;
    for (u64 k = 1; k <= q.volume(); ++k) all.push_back(theta(k, q));
    std::sort(all.begin(), all.end());
    for (u64 k = 1; k <= q.volume(); ++k) CHECK(all[k - 1] == k);
    CHECK(theta(1, q) == 1);
    // the first N flips land in N distinct (n-1)-blocks
    std::set<u64> blocks;
    for (u64 k = 1; k <= 3; ++k) blocks.insert((theta(k, q) - 1) / q.pow(2));
    CHECK(blocks.size() == 3);
    CHECK_THROWS_AS(theta(0, q), std::invalid_argument);
}

TEST_CASE("reference paths go from all-minus to all-plus one flip at a time") {
    auto p = LatticeParams::standard(3, 2, 1.0, 0.5);
    for (auto kind : {PathKind::MD, PathKind::MI}) {
        ReferencePath path(kind, p);
        CHECK(path.at(0).volume() == 0);
        CHECK(path.at(9).volume() == 9);
        for (u64 k = 1; k <= 9; ++k) {
            auto a = path.at(k - 1), b = path.at(k);
            CHECK(b.volume() == a.volume() + 1);
            CHECK(b.test(path.flipped(k)));
            CHECK_FALSE(a.test(path.flipped(k)));
        }
    }
}

TEST_CASE("profile closed form examples") {
    auto a = LatticeParams::standard(3, 2, 1.0, 0.8);
    auto b = LatticeParams::standard(3, 2, 1.0, 0.5);
    CHECK(profile_closed_form(0, a) == 0.0);
    CHECK(profile_closed_form(1, a) == Approx(8.0 / 15.0).margin(1e-12));
    CHECK(profile_closed_form(2, b) == Approx(1.0).margin(1e-12));
    CHECK(profile_closed_form(9, a) == Approx(-7.2).margin(1e-12));
    CHECK_THROWS_AS(profile_closed_form(10, a), std::invalid_argument);
}

TEST_CASE("profile closed form equals the direct energy along the path") {
    std::mt19937_64 rng(21);
    for (auto [N, n] : {std::pair{2, 2}, {2, 3}, {2, 4}, {3, 2}, {4, 2}, {3, 3}, {5, 2}, {2, 5}}) {
        for (int t = 0; t < 20; ++t) {
            LatticeParams p{N, n, testing::random_monotone_couplings(n, rng), 0.01 + static_cast<double>(rng() % 1000) / 500.0};
            for (u64 k = 0; k <= p.volume(); ++k) {
                double d = relative_energy(Configuration::prefix(p.volume(), k), p);
                if (std::abs(d - profile_closed_form(k, p)) > 1e-12) FAIL("profile mismatch at k=" << k);
            }
        }
    }
}

TEST_CASE("block increments") {
    auto a = LatticeParams::standard(3, 2, 1.0, 0.8);
    auto b = LatticeParams::standard(3, 2, 1.0, 0.5);
    CHECK(block_increment(0, a) == Approx(8.0 / 15.0).margin(1e-12));
    CHECK(block_increment(1, b) == Approx(0.5).margin(1e-12));
    CHECK(block_increment(1, b) == Approx(profile_closed_form(3, b)).margin(1e-12));
    auto c = LatticeParams::standard(3, 2, 1.0, 1.5);
    for (int i = 0; i < 2; ++i) CHECK(block_increment(i, c) < 0.0);
}

TEST_CASE("block-level profile values") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 30; ++t) {
        LatticeParams p{3, 3, testing::random_monotone_couplings(3, rng), 0.2 + 0.01 * t};
        if (!metastable_regime(p)) continue;
        int m = mhat(p);
        double tail = 0.0;
        for (int k = m + 1; k <= p.n; ++k) tail += p.J[k - 1] * std::pow(3.0, k);
        tail *= 2.0 / 3.0;
        for (int s = 1; s <= p.N; ++s) {
            double Nm = static_cast<double>(p.pow(m));
            double expect = s * Nm * (tail - p.h - (s - 1) * p.J[m] * Nm);
            CHECK(profile_closed_form(static_cast<u64>(s) * p.pow(m), p) == Approx(expect).margin(1e-12));
        }
    }
}

TEST_CASE("block switching changes the energy as predicted") {
    std::mt19937_64 rng(29);
    auto check = [&](const LatticeParams& p, int trials) {
        int done = 0;
        while (done < trials) {
            auto s = testing::random_configuration(p.volume(), rng, 0.2 + 0.6 * static_cast<double>(rng() % 100) / 100.0);
            int m = 1 + static_cast<int>(rng() % static_cast<u64>(p.n - 1));  // 1 <= m <= n-1
            int k = static_cast<int>(rng() % static_cast<u64>(m));             // k < m
            u64 top = rng() % p.volume();
            auto parent = block_members(top, m + 1, p);
            u64 b1 = rng() % static_cast<u64>(p.N), b2 = rng() % static_cast<u64>(p.N);
            if (b1 == b2) continue;
            u64 m_size = p.pow(m), k_size = p.pow(k);
            u64 o1 = rng() % (m_size / k_size), o2 = rng() % (m_size / k_size);
            BlockRange u1{parent.begin + b1 * m_size + o1 * k_size, parent.begin + b1 * m_size + (o1 + 1) * k_size};
            BlockRange u2{parent.begin + b2 * m_size + o2 * k_size, parent.begin + b2 * m_size + (o2 + 1) * k_size};
            auto r = switch_blocks(s, u1, u2, p);
            double measured = relative_energy(r.result, p) - relative_energy(s, p);
            if (std::abs(measured - r.predicted_delta) > 1e-12) FAIL("switch mismatch");
            ++done;
        }
    };
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int t = 0; t < 10; ++t) {
        LatticeParams p{3, 3, {u(rng), u(rng), u(rng)}, u(rng)};
        check(p, 100);
    }
    LatticeParams q{2, 4, {0.9, 0.5, 0.4, 0.1}, 0.3};
    check(q, 200);
}

TEST_CASE("switching edge cases") {
    auto p = LatticeParams::scaled(3, 3, {1.0, 1.0, 1.0}, 0.5);
    auto s = Configuration::from_vertices(27, std::vector<u64>{0, 4, 5, 13});
    auto r = switch_blocks(s, {0, 1}, {4, 5}, p);
    CHECK(r.predicted_delta == 0.0);  // both blocks hold one plus spin
    LatticeParams flat{3, 3, {0.2, 0.2, 0.2}, 0.5};
    auto t = Configuration::from_vertices(27, std::vector<u64>{0, 1, 13});
    auto r2 = switch_blocks(t, {0, 3}, {9, 12}, flat);
    CHECK(r2.predicted_delta == Approx(0.0).margin(1e-15));
    CHECK(relative_energy(r2.result, flat) == Approx(relative_energy(t, flat)).margin(1e-12));
    CHECK_THROWS_AS(switch_blocks(s, {0, 3}, {3, 6}, p), std::invalid_argument);  // same 2-block
    CHECK_THROWS_AS(switch_blocks(s, {0, 3}, {9, 10}, p), std::invalid_argument);
}

TEST_CASE("concavity second difference") {
    auto p = LatticeParams::standard(3, 2, 1.0, 0.8);
    CHECK(check_concavity(0, 0, p) == Approx(2.0 / 3.0).margin(1e-12));
    CHECK(check_concavity(0, 1, p) == Approx(2.0).margin(1e-12));
    LatticeParams doubled = p;
    doubled.J[0] *= 2;
    CHECK(check_concavity(0, 0, doubled) == Approx(2 * check_concavity(0, 0, p)).margin(1e-12));
    CHECK_THROWS_AS(check_concavity(2, 0, p), std::invalid_argument);  // window crosses a 1-block
    CHECK(check_concavity(1, 0, p) == Approx(2.0 / 3.0).margin(1e-12));

    std::mt19937_64 rng(31);
    for (int t = 0; t < 200; ++t) {
        LatticeParams q{3, 3, testing::random_monotone_couplings(3, rng), 0.4};
        int a = static_cast<int>(rng() % 3);
        u64 step = q.pow(a), big = q.pow(a + 1);
        u64 j = (rng() % (q.volume() / big)) * big + (rng() % (big - 2 * step + 1));
        if (block_members(j, a + 1, q) != block_members(j + 2 * step - 1, a + 1, q)) continue;
        CHECK(check_concavity(j, a, q) == Approx(2 * q.J[a] * std::pow(3.0, 2 * a)).margin(1e-10));
    }
}

TEST_CASE("shift bounds on the reference path") {
    // the absolute bound needs every digit of M at or below (N-1)/2;
    // above that the far-block term turns negative and the bound can break
    std::mt19937_64 rng(37);
    int outside = 0;
    for (int trial = 0; trial < 20; ++trial) {
        LatticeParams p{3, 3, testing::random_monotone_couplings(3, rng), 0.3 + 0.02 * trial};
        auto E = [&](u64 k) { return profile_closed_form(k, p); };
        for (int t = 1; t <= p.n - 1; ++t)
            for (u64 M = 0; M < p.volume(); M += p.pow(t)) {
                auto b = nary_decomposition(M, p).digits;
                bool low = std::all_of(b.begin(), b.end(), [&](int d) { return 2 * d <= p.N - 1; });
                for (u64 k = 0; k < p.pow(t); ++k) {
                    CHECK(E(M + k) - E(M) <= E(k) + 1e-12);
                    bool bound = std::abs(E(M + k) - E(M)) <= std::abs(E(k)) + p.h * k + 1e-12;
                    if (low)
                        CHECK(bound);
                    else if (!bound)
                        ++outside;
                }
            }
    }
    CHECK(outside > 0);

    auto q = LatticeParams::standard(3, 2, 1.0, 0.8);
    // M = 6 (top digit 2), k = 2: |E(8) - E(6)| = 34/15 against E(2) + 2h = 2
    double d = profile_closed_form(8, q) - profile_closed_form(6, q);
    CHECK(d == Approx(-34.0 / 15.0).margin(1e-12));
    CHECK(std::abs(d) > std::abs(profile_closed_form(2, q)) + 2 * q.h);
}

TEST_CASE("uniform optimality of the reference paths") {
    CHECK(check_uniform_optimality(PathKind::MD, LatticeParams{3, 2, {1.0 / 3, 1.0 / 9}, 0.8}).optimal);
    CHECK(check_uniform_optimality(PathKind::MI, LatticeParams{3, 2, {1.0 / 9, 1.0 / 3}, 0.8}).optimal);
    auto tiny = LatticeParams::standard(2, 1, 1.0, 0.5);
    CHECK(check_uniform_optimality(PathKind::MD, tiny).optimal);
    CHECK(check_uniform_optimality(PathKind::MI, tiny).optimal);
    auto wrong = check_uniform_optimality(PathKind::MD, LatticeParams{3, 2, {1.0 / 9, 1.0 / 3}, 0.8});
    CHECK_FALSE(wrong.optimal);
    REQUIRE(wrong.first_violation);
    CHECK_THROWS_AS(check_uniform_optimality(PathKind::MD, LatticeParams::standard(5, 2, 1.0, 0.5)), SizeCapError);

    std::mt19937_64 rng(41);
    for (auto [N, n] : {std::pair{2, 3}, {2, 4}, {3, 2}, {4, 2}}) {
        for (int t = 0; t < 5; ++t) {
            LatticeParams dec{N, n, testing::random_monotone_couplings(n, rng, true), 0.3};
            LatticeParams inc{N, n, testing::random_monotone_couplings(n, rng, false), 0.3};
            CHECK(check_uniform_optimality(PathKind::MD, dec).optimal);
            CHECK(check_uniform_optimality(PathKind::MI, inc).optimal);
        }
    }
}

TEST_CASE("symmetry of the standard profile at thresholds") {
    auto p3 = LatticeParams::standard(3, 2, 1.0, 0.5);
    auto d = check_symmetry_standard(1, 2, p3);
    CHECK(d.reflection <= 1e-12);
    auto p5 = LatticeParams::standard(5, 3, 1.0, 0.5);
    CHECK(check_symmetry_standard(1, 3, p5).reflection <= 1e-12);
    CHECK_THROWS_AS(check_symmetry_standard(1, 2, LatticeParams::scaled(3, 2, {1.0, 2.0}, 0.5)), DomainError);

    for (int N : {2, 3, 4, 5, 6, 7}) {
        for (int n : {2, 3}) {
            auto p = LatticeParams::standard(N, n, 1.3, 0.5);
            for (int m = 0; m < n; ++m)
                for (int s = 1; s <= N; ++s) {
                    auto dev = check_symmetry_standard(m, s, p);
                    INFO("N=" << N << " n=" << n << " m=" << m << " s=" << s);
                    CHECK(dev.reflection <= 1e-12);
                    CHECK(dev.intervals <= 1e-12);
                }
        }
    }
}

TEST_CASE("profile maxima lie in the first s blocks at the threshold") {
    for (int N : {3, 5}) {
        auto base = LatticeParams::standard(N, 2, 1.0, 0.5);
        for (int m = 0; m < 2; ++m)
            for (int s = 1; s <= N; ++s) {
                LatticeParams p = base;
                p.h = h_threshold(m, s, 1.0, N, 2);
                if (p.h <= 0.0) continue;
                auto prof = energy_profile(PathKind::MD, p);
                for (u64 k : prof.argmax) CHECK(k <= static_cast<u64>(s) * p.pow(m));
            }
    }
}

TEST_CASE("profile ties are reported as a set") {
    auto p = LatticeParams::standard(3, 2, 1.0, 2.0 / 3.0);
    auto prof = energy_profile(PathKind::MD, p);
    CHECK(prof.argmax == std::vector<u64>{1, 2});
}
