#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "semslam/geometry.hpp"

using namespace semslam;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("wrap_angle lands in (-pi, pi]") {
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(0.0) == 0.0);
    auto rng = test::make_rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double w = wrap_angle(test::uniform(rng, -50.0, 50.0));
        CHECK(w > -kPi);
        CHECK(w <= kPi);
    }
}

TEST_CASE("se2_compose basic examples") {
    const Pose2 a = se2_compose({1, 0, 0}, {1, 0, 0});
    CHECK(a.x == doctest::Approx(2.0));
    CHECK(a.y == doctest::Approx(0.0));
    CHECK(a.theta == doctest::Approx(0.0));

    const Pose2 b = se2_compose({0, 0, kPi / 2}, {1, 0, 0});
    CHECK(b.x == doctest::Approx(0.0));
    CHECK(b.y == doctest::Approx(1.0));
    CHECK(b.theta == doctest::Approx(kPi / 2));

    auto rng = test::make_rng(2);
    for (int i = 0; i < 100; ++i) {
        const Pose2 p = test::random_pose(rng);
        const Pose2 q = se2_compose(p, {0, 0, 0});
        CHECK(q.x == doctest::Approx(p.x));
        CHECK(q.y == doctest::Approx(p.y));
        CHECK(q.theta == doctest::Approx(p.theta));
    }
}

TEST_CASE("compose with inverse gives identity to 1e-12") {
    auto rng = test::make_rng(3);
    for (int i = 0; i < 200; ++i) {
        const Pose2 p = test::random_pose(rng);
        const Pose2 e = se2_compose(p, se2_inverse(p));
        CHECK(std::abs(e.x) < 1e-12);
        CHECK(std::abs(e.y) < 1e-12);
        CHECK(std::abs(e.theta) < 1e-12);
    }
}

TEST_CASE("group axioms on random triples") {
    auto rng = test::make_rng(4);
    for (int i = 0; i < 1000; ++i) {
        const Pose2 a = test::random_pose(rng);
        const Pose2 b = test::random_pose(rng);
        const Pose2 c = test::random_pose(rng);
        const Pose2 left = se2_compose(se2_compose(a, b), c);
        const Pose2 right = se2_compose(a, se2_compose(b, c));
        CHECK(std::abs(left.x - right.x) < 1e-10);
        CHECK(std::abs(left.y - right.y) < 1e-10);
        CHECK(std::abs(wrap_angle(left.theta - right.theta)) < 1e-10);

        const Pose2 inv_ab = se2_inverse(se2_compose(a, b));
        const Pose2 binv_ainv = se2_compose(se2_inverse(b), se2_inverse(a));
        CHECK(std::abs(inv_ab.x - binv_ainv.x) < 1e-10);
        CHECK(std::abs(inv_ab.y - binv_ainv.y) < 1e-10);
        CHECK(std::abs(wrap_angle(inv_ab.theta - binv_ainv.theta)) < 1e-10);
    }
}

TEST_CASE("se2_between examples and round trip") {
    const Pose2 p{3.0, -1.0, 0.7};
    const Pose2 e = se2_between(p, p);
    CHECK(std::abs(e.x) < 1e-12);
    CHECK(std::abs(e.y) < 1e-12);
    CHECK(std::abs(e.theta) < 1e-12);

    const Pose2 d = se2_between({0, 0, 0}, {2, 0, 0});
    CHECK(d.x == doctest::Approx(2.0));
    CHECK(d.y == doctest::Approx(0.0));
    CHECK(d.theta == doctest::Approx(0.0));

    auto rng = test::make_rng(5);
    for (int i = 0; i < 100; ++i) {
        const Pose2 a = test::random_pose(rng);
        const Pose2 b = test::random_pose(rng);
        const Pose2 back = se2_compose(a, se2_between(a, b));
        CHECK(std::abs(back.x - b.x) < 1e-10);
        CHECK(std::abs(back.y - b.y) < 1e-10);
        CHECK(std::abs(wrap_angle(back.theta - b.theta)) < 1e-10);
    }
}

TEST_CASE("se2_retract identities") {
    auto rng = test::make_rng(6);
    const Pose2 p = test::random_pose(rng);
    const Pose2 same = se2_retract(p, Eigen::Vector3d::Zero());
    CHECK(same.x == doctest::Approx(p.x));
    CHECK(same.y == doctest::Approx(p.y));
    CHECK(same.theta == doctest::Approx(p.theta));

    const Pose2 unit = se2_retract({0, 0, 0}, Eigen::Vector3d(1, 0, 0));
    CHECK(unit.x == doctest::Approx(1.0));
    CHECK(unit.y == doctest::Approx(0.0));
    CHECK(unit.theta == doctest::Approx(0.0));
}

TEST_CASE("retract consistency against small-angle series") {
    // between(p, retract(p, d)) must equal exp(d); the oracle is the
    // second-order series of the SE(2) exponential, valid to ~|d|^3.
    auto rng = test::make_rng(7);
    for (int i = 0; i < 100; ++i) {
        const Pose2 p = test::random_pose(rng);
        Eigen::Vector3d d;
        d << test::uniform(rng, -1e-4, 1e-4), test::uniform(rng, -1e-4, 1e-4),
            test::uniform(rng, -1e-4, 1e-4);
        const Pose2 step = se2_between(p, se2_retract(p, d));

        const double phi = d[2];
        Eigen::Matrix2d v_series;
        v_series << 1.0 - phi * phi / 6.0, -phi / 2.0, phi / 2.0, 1.0 - phi * phi / 6.0;
        const Eigen::Vector2d t_series = v_series * d.head<2>();
        CHECK(std::abs(step.x - t_series.x()) < 5e-12);
        CHECK(std::abs(step.y - t_series.y()) < 5e-12);
        CHECK(std::abs(step.theta - phi) < 5e-12);
    }
}

TEST_CASE("exp and log are inverse") {
    auto rng = test::make_rng(8);
    for (int i = 0; i < 200; ++i) {
        Eigen::Vector3d xi;
        xi << test::uniform(rng, -5, 5), test::uniform(rng, -5, 5), test::uniform(rng, -3, 3);
        const Eigen::Vector3d back = se2_log(se2_exp(xi));
        CHECK((back - xi).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("range_bearing examples") {
    const RangeBearing a = range_bearing({0, 0, 0}, {3, 4});
    CHECK(a.range == doctest::Approx(5.0));
    CHECK(a.bearing == doctest::Approx(std::atan2(4.0, 3.0)));

    const RangeBearing b = range_bearing({0, 0, kPi / 2}, {0, 2});
    CHECK(b.range == doctest::Approx(2.0));
    CHECK(b.bearing == doctest::Approx(0.0));

    CHECK_THROWS_AS((void)range_bearing({1, 1, 0}, {1, 1}), Error);
    try {
        (void)range_bearing({1, 1, 0}, {1, 1});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CoincidentPoint);
    }
}

TEST_CASE("range_bearing jacobians match central differences") {
    auto rng = test::make_rng(9);
    int checked = 0;
    while (checked < 100) {
        const Pose2 pose = test::random_pose(rng, 5.0);
        const Point2 point = test::random_point(rng, 5.0);
        if ((point - pose.translation()).norm() < 0.3) {
            continue;
        }
        ++checked;
        RangeBearingJacobians jac;
        (void)range_bearing(pose, point, &jac);

        const auto f_pose = [&](const Eigen::VectorXd& delta) {
            const RangeBearing rb = range_bearing(se2_retract(pose, delta), point);
            return Eigen::Vector2d(rb.range, rb.bearing);
        };
        const Eigen::MatrixXd fd_pose = test::finite_difference_wrapped(f_pose, 3);
        const double scale_pose = std::max(1.0, fd_pose.cwiseAbs().maxCoeff());
        CHECK((fd_pose - jac.wrt_pose).cwiseAbs().maxCoeff() / scale_pose < 1e-5);

        const auto f_point = [&](const Eigen::VectorXd& delta) {
            const RangeBearing rb = range_bearing(pose, point + Eigen::Vector2d(delta));
            return Eigen::Vector2d(rb.range, rb.bearing);
        };
        const Eigen::MatrixXd fd_point = test::finite_difference_wrapped(f_point, 2);
        const double scale_point = std::max(1.0, fd_point.cwiseAbs().maxCoeff());
        CHECK((fd_point - jac.wrt_point).cwiseAbs().maxCoeff() / scale_point < 1e-5);
    }
}

TEST_CASE("gaussian_nll closed-form values") {
    const double log_2pi = std::log(2.0 * kPi);

    CHECK(gaussian_nll(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()) ==
          doctest::Approx(log_2pi).epsilon(1e-12));
    CHECK(gaussian_nll(Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity()) ==
          doctest::Approx(log_2pi + 0.5).epsilon(1e-12));

    const double wide = gaussian_nll(Eigen::Vector2d::Zero(), 4.0 * Eigen::Matrix2d::Identity());
    CHECK(wide - log_2pi == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("gaussian_nll matches the hand-expanded 2x2 form") {
    auto rng = test::make_rng(10);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Matrix2d cov = test::random_spd(rng, 2);
        const Eigen::Vector2d r(test::uniform(rng, -3, 3), test::uniform(rng, -3, 3));
        const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
        const double quad = (cov(1, 1) * r[0] * r[0] - 2.0 * cov(0, 1) * r[0] * r[1] +
                             cov(0, 0) * r[1] * r[1]) /
                            det;
        const double expected = 0.5 * quad + 0.5 * std::log(4.0 * kPi * kPi * det);
        CHECK(std::abs(gaussian_nll(r, cov) - expected) < 1e-10);
    }
}

TEST_CASE("gaussian_nll rejects indefinite covariance") {
    Eigen::Matrix2d bad;
    bad << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS((void)gaussian_nll(Eigen::Vector2d::Zero(), bad), Error);
}

TEST_CASE("chi2_quantile closed forms for dof 2") {
    CHECK(chi2_quantile(0.9, 2) == doctest::Approx(4.605170185988091).epsilon(1e-12));
    CHECK(chi2_quantile(0.5, 2) == doctest::Approx(1.3862943611198906).epsilon(1e-12));
    CHECK(chi2_quantile(0.95, 2) > chi2_quantile(0.9, 2));
}

TEST_CASE("chi2_quantile general dof against closed-form CDFs") {
    // Independent oracles: erf-based CDFs for dof 1 and 3, the exponential
    // series form for dof 4.
    const auto cdf1 = [](double x) { return std::erf(std::sqrt(0.5 * x)); };
    const auto cdf3 = [](double x) {
        return std::erf(std::sqrt(0.5 * x)) -
               std::sqrt(2.0 / kPi) * std::sqrt(x) * std::exp(-0.5 * x);
    };
    const auto cdf4 = [](double x) { return 1.0 - std::exp(-0.5 * x) * (1.0 + 0.5 * x); };

    for (double p : {0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99}) {
        CHECK(cdf1(chi2_quantile(p, 1)) == doctest::Approx(p).epsilon(1e-8));
        CHECK(cdf3(chi2_quantile(p, 3)) == doctest::Approx(p).epsilon(1e-8));
        CHECK(cdf4(chi2_quantile(p, 4)) == doctest::Approx(p).epsilon(1e-8));
    }
}

TEST_CASE("chi2_quantile rejects invalid input") {
    CHECK_THROWS_AS((void)chi2_quantile(0.0, 2), Error);
    CHECK_THROWS_AS((void)chi2_quantile(1.0, 2), Error);
    CHECK_THROWS_AS((void)chi2_quantile(0.9, 0), Error);
}

TEST_CASE("theta stays wrapped through operation chains") {
    auto rng = test::make_rng(11);
    Pose2 p{0, 0, 3.0};
    for (int i = 0; i < 500; ++i) {
        switch (i % 3) {
            case 0: p = se2_compose(p, test::random_pose(rng)); break;
            case 1: p = se2_between(test::random_pose(rng), p); break;
            default: {
                Eigen::Vector3d d;
                d << test::uniform(rng, -1, 1), test::uniform(rng, -1, 1),
                    test::uniform(rng, -2, 2);
                p = se2_retract(p, d);
            }
        }
        CHECK(std::abs(p.theta) <= kPi);
    }
}

TEST_SUITE_END();
