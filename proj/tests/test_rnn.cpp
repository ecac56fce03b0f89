#include <gtest/gtest.h>

#include <random>

#include "evac/rnn.hpp"
#include "oracles.hpp"

using namespace evac;

namespace {

RnnState bare(std::size_t n, double Lambda, double r) {
    RnnState s;
    s.n = n;
    s.w_plus.assign(n * n, 0.0);
    s.w_minus.assign(n * n, 0.0);
    s.Lambda.assign(n, Lambda);
    s.lambda_ext.assign(n, 0.0);
    s.r.assign(n, r);
    s.q.assign(n, 0.0);
    return s;
}

std::vector<double> rates(const RnnState& s) {
    std::vector<double> r(s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
        for (std::size_t m = 0; m < s.n; ++m) r[i] += s.wp(i, m) + s.wm(i, m);
    }
    return r;
}

}  // namespace

TEST(Excitation, SingleNeuronClosedForm) {
    auto s = bare(1, 0.2, 0.4);
    solve_excitation(s);
    EXPECT_NEAR(s.q[0], 0.5, 1e-12);
}

TEST(Excitation, SymmetricPairWithoutRecurrence) {
    auto s = bare(2, 0.1, 0.5);
    solve_excitation(s);
    EXPECT_NEAR(s.q[0], 0.2, 1e-12);
    EXPECT_NEAR(s.q[1], 0.2, 1e-12);
}

TEST(Excitation, ThreeNeuronsMatchDenseNewton) {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = oracle::random_interior_rnn(gen, 3);
        const auto expected = oracle::newton_excitation(oracle::dense_copy(s));
        ASSERT_TRUE(expected);
        const auto solve = solve_excitation(s);
        EXPECT_LT(solve.residual, 1e-9);
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s.q[i], (*expected)[i], 1e-8);
    }
}

TEST(Excitation, ClippingIsReported) {
    auto s = bare(1, 2.0, 1.0);
    const auto solve = solve_excitation(s);
    EXPECT_TRUE(solve.clipped);
    EXPECT_LT(s.q[0], 1.0);
}

TEST(Excitation, DivergentSolveNamesResidual) {
    std::mt19937_64 gen(11);
    auto s = oracle::random_interior_rnn(gen, 4);
    SolveOptions opts;
    opts.max_iterations = 1;
    try {
        solve_excitation(s, opts);
        FAIL() << "expected a convergence error";
    } catch (const RnnError& e) {
        EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
    }
}

TEST(Excitation, DefaultInitialisation) {
    const auto s = make_rnn(4);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(s.r[i], 1.0);
        EXPECT_DOUBLE_EQ(s.Lambda[i], 0.25);
        EXPECT_DOUBLE_EQ(s.wp(i, i), 0.0);
        for (std::size_t j = 0; j < 4; ++j) {
            if (i != j) EXPECT_DOUBLE_EQ(s.wp(i, j), 0.5 / 3.0);
        }
        EXPECT_NEAR(s.q[i], s.q[0], 1e-15);
    }
    EXPECT_LT(excitation_residual(s), 1e-9);
}

TEST(Threshold, FirstRewardSetsZero) {
    ThresholdState t(0.4);
    EXPECT_FALSE(t.initialized());
    t.update(7.0);
    EXPECT_TRUE(t.initialized());
    EXPECT_DOUBLE_EQ(t.value(), 0.0);
}

TEST(Threshold, SmoothedUpdate) {
    ThresholdState t(0.4);
    t.update(1.0);  // T = 0
    t.update(25.0);  // T = 0.6 * 25 = 15
    EXPECT_DOUBLE_EQ(t.value(), 15.0);
    t.update(20.0);  // 0.4 * 15 + 0.6 * 20
    EXPECT_DOUBLE_EQ(t.value(), 18.0);
}

TEST(Threshold, ArithmeticFromTen) {
    // a = 0.4, T_prev = 10, R = 20 -> 16.
    ThresholdState t(0.4);
    t.update(0.0);
    t.update(10.0 / 0.6);
    ASSERT_NEAR(t.value(), 10.0, 1e-12);
    t.update(20.0);
    EXPECT_NEAR(t.value(), 16.0, 1e-12);
}

TEST(Threshold, SmoothingOutsideOpenIntervalRejected) {
    EXPECT_THROW(ThresholdState(1.0), std::invalid_argument);
    EXPECT_THROW(ThresholdState(0.0), std::invalid_argument);
}

TEST(Reinforce, RewardBranchBeforeRescale) {
    // n = 3, delta = 0.3: winner column of w+ grows by 0.3, the other w- entries by 0.3.
    auto s = make_rnn(3);
    const auto before = s;
    const std::size_t winner = 1;
    // Undo the rescale by comparing ratios: the rescale multiplies each row by one factor.
    reinforce(s, winner, 0.3, 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        if (i == winner) continue;
        const double raw_wp = before.wp(i, winner) + 0.3;
        const std::size_t other = 3 - i - winner;
        const double raw_wm = before.wm(i, other) + 0.3;
        const double raw_sum = 1.0 + 0.6;
        const double scale = before.r[i] / raw_sum;
        EXPECT_NEAR(s.wp(i, winner), raw_wp * scale, 1e-15);
        EXPECT_NEAR(s.wm(i, other), raw_wm * scale, 1e-15);
        EXPECT_NEAR(s.wm(i, winner), before.wm(i, winner) * scale, 1e-15);
    }
    // The winner's own row is untouched.
    for (std::size_t m = 0; m < 3; ++m) {
        EXPECT_DOUBLE_EQ(s.wp(winner, m), before.wp(winner, m));
        EXPECT_DOUBLE_EQ(s.wm(winner, m), before.wm(winner, m));
    }
}

TEST(Reinforce, PunishmentMirrorsReward) {
    auto s = make_rnn(3);
    const auto before = s;
    reinforce(s, 0, 0.1, 0.4);  // R < T: delta 0.3 into w- of the winner
    const double scale = before.r[1] / 1.6;
    EXPECT_NEAR(s.wm(1, 0), (before.wm(1, 0) + 0.3) * scale, 1e-15);
    EXPECT_NEAR(s.wp(1, 2), (before.wp(1, 2) + 0.3) * scale, 1e-15);
    EXPECT_GT(s.wm(1, 0), s.wp(1, 0));
}

TEST(Reinforce, TwoNeuronsOnlyStrengthenTheWinnerLink) {
    auto s = make_rnn(2);
    const auto before = s;
    reinforce(s, 0, 0.5, 0.0);
    // Row 1 starts at (0.5, 0.5), gains 0.5 on w+(1,0), then is rescaled back to 1.
    EXPECT_NEAR(s.wp(1, 0), 1.0 / 1.5, 1e-15);
    EXPECT_NEAR(s.wm(1, 0), 0.5 / 1.5, 1e-15);
    EXPECT_EQ(s.wp(0, 1), before.wp(0, 1));
    EXPECT_EQ(s.wm(0, 1), before.wm(0, 1));
    EXPECT_GT(s.q[0], s.q[1]);
}

TEST(Reinforce, SingleNeuronIsUnchanged) {
    auto s = make_rnn(1);
    const auto q = s.q;
    reinforce(s, 0, 3.0, 1.0);
    EXPECT_EQ(s.q, q);
}

TEST(Reinforce, WinnerOutOfRangeRejected) {
    auto s = make_rnn(3);
    EXPECT_THROW(reinforce(s, 3, 1.0, 0.0), std::out_of_range);
    EXPECT_THROW(reinforce(s, 0, -1.0, 0.0), std::invalid_argument);
}

TEST(Reinforce, FourNeuronRewardRaisesWinner) {
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 50; ++trial) {
        auto s = oracle::random_interior_rnn(gen, 4);
        solve_excitation(s);
        const std::size_t winner = gen() % 4;
        const double q_before = s.q[winner];
        reinforce(s, winner, 0.5, 0.1);
        // Re-solve independently on the updated weights.
        const auto q = oracle::newton_excitation(oracle::dense_copy(s));
        ASSERT_TRUE(q);
        EXPECT_NEAR(s.q[winner], (*q)[winner], 1e-8);
        EXPECT_GT((*q)[winner], q_before);
    }
}

TEST(MostExcited, ArgmaxAndTies) {
    RnnState s;
    s.q = {0.1, 0.7, 0.3};
    EXPECT_EQ(most_excited(s), 1u);
    s.q = {0.5, 0.5};
    EXPECT_EQ(most_excited(s), 0u);
    s.q = {0.2};
    EXPECT_EQ(most_excited(s), 0u);
}

// Properties over generated states.

TEST(RnnProperties, FireRatesConservedAndWeightsNonNegative) {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + gen() % 6;
        auto s = n == 1 ? make_rnn(1) : oracle::random_interior_rnn(gen, n);
        solve_excitation(s);
        const auto r0 = rates(s);
        reinforce(s, gen() % n, u(gen), u(gen));
        const auto r1 = rates(s);
        for (std::size_t i = 0; i < n; ++i) {
            if (n > 1) EXPECT_NEAR(r0[i], r1[i], 1e-9);
            EXPECT_NEAR(s.r[i], r1[i], 1e-9);
        }
        for (double w : s.w_plus) EXPECT_GE(w, 0.0);
        for (double w : s.w_minus) EXPECT_GE(w, 0.0);
        EXPECT_LT(excitation_residual(s), 1e-9);
    }
}

TEST(RnnProperties, RepeatedRewardNeverLowersWinnerRank) {
    std::mt19937_64 gen(22);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + gen() % 5;
        auto s = oracle::random_interior_rnn(gen, n);
        solve_excitation(s);
        const std::size_t winner = gen() % n;
        auto rank = [&] {
            std::size_t above = 0;
            for (std::size_t k = 0; k < n; ++k) {
                if (s.q[k] > s.q[winner] || (s.q[k] == s.q[winner] && k < winner)) ++above;
            }
            return above;
        };
        std::size_t last = rank();
        for (int step = 0; step < 10; ++step) {
            reinforce(s, winner, 1.0, 0.2);
            const std::size_t now = rank();
            EXPECT_LE(now, last);
            last = now;
        }
    }
}
