#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rvar/distributions.hpp"

using namespace rvar;

TEST(IncompleteBeta, EndpointsAndSymmetry) {
    EXPECT_DOUBLE_EQ(incomplete_beta(2.0, 3.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(incomplete_beta(2.0, 3.0, 1.0), 1.0);
    // I_x(a, b) = 1 - I_{1-x}(b, a)
    for (double x : {0.05, 0.3, 0.5, 0.77, 0.99})
        EXPECT_NEAR(incomplete_beta(2.5, 7.0, x), 1.0 - incomplete_beta(7.0, 2.5, 1.0 - x), 1e-14);
    // I_x(1, 1) = x and I_x(a, 1) = x^a
    EXPECT_NEAR(incomplete_beta(1.0, 1.0, 0.37), 0.37, 1e-14);
    EXPECT_NEAR(incomplete_beta(3.0, 1.0, 0.6), 0.216, 1e-14);
}

TEST(FUpperTail, MatchesIntegratedDensity) {
    struct Case {
        double f, d1, d2;
    };
    for (const auto& c : std::vector<Case>{{0.5, 1, 10}, {1.0, 2, 195}, {3.2, 4, 40}, {2.1, 10, 80}, {0.9, 5, 5},
                                           {7.0, 3, 300}, {1.5, 20, 2000}, {19.5, 2, 195}}) {
        const double ref = oracle::f_tail(c.f, c.d1, c.d2);
        EXPECT_NEAR(f_upper_tail(c.f, c.d1, c.d2), ref, 1e-6) << c.f << " " << c.d1 << " " << c.d2;
        EXPECT_NEAR(f_upper_tail(c.f, c.d1, c.d2) / ref, 1.0, 1e-5);
    }
}

TEST(FUpperTail, Boundaries) {
    EXPECT_DOUBLE_EQ(f_upper_tail(0.0, 2, 10), 1.0);
    EXPECT_DOUBLE_EQ(f_upper_tail(std::numeric_limits<double>::infinity(), 2, 10), 0.0);
}

TEST(TTwoSided, MatchesIntegratedDensity) {
    for (double nu : {1.0, 3.0, 9.0, 29.0, 299.0})
        for (double t : {0.1, 0.8, 2.0, 4.5}) {
            EXPECT_NEAR(t_two_sided(t, nu), oracle::t_two_sided(t, nu), 1e-8) << t << " " << nu;
            EXPECT_DOUBLE_EQ(t_two_sided(-t, nu), t_two_sided(t, nu));
        }
    EXPECT_DOUBLE_EQ(t_two_sided(0.0, 5.0), 1.0);
}
