#include "hsn/error.hpp"
#include "hsn/readout.hpp"
#include "hsn/signal_lab.hpp"

#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hsn;

namespace {

ErrorKind kind_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  FAIL("expected an hsn::Error");
  return ErrorKind::Usage;
}

Eigen::MatrixXd random_matrix(std::mt19937_64 &rng, int r, int c) {
  std::normal_distribution<double> d;
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      m(i, j) = d(rng);
  return m;
}

// Realizations whose averaged top-layer features are known exactly.
std::vector<Signal> constant_signals(const std::vector<double> &levels, std::size_t n) {
  std::vector<Signal> out;
  for (double c : levels)
    out.emplace_back(std::vector<double>(n, c));
  return out;
}

} // namespace

TEST_CASE("node_domain_position") {
  CHECK(node_domain_position(1, 0) == 1);
  CHECK(node_domain_position(1, 4) == 1);
  CHECK(node_domain_position(2, 4) == 17);
  CHECK(node_domain_position(64, 4) == 1009);
  CHECK(kind_of([] { node_domain_position(0, 1); }) == ErrorKind::Domain);
}

TEST_CASE("solve_least_squares") {
  SUBCASE("identity design") {
    const Eigen::Vector3d y(1, -2, 3);
    const auto sol = solve_least_squares(Eigen::Matrix3d::Identity(), y);
    CHECK((sol.coefficients - y).norm() < 1e-14);
    CHECK(sol.rank == 3);
  }
  SUBCASE("single column") {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    const auto sol = solve_least_squares(x, Eigen::Vector3d(2, 4, 6));
    CHECK(sol.coefficients(0) == doctest::Approx(2.0));
  }
  SUBCASE("rank deficient gives the minimum-norm solution") {
    Eigen::MatrixXd x(3, 2);
    x << 1, 1, 2, 2, 3, 3;
    const auto sol = solve_least_squares(x, Eigen::Vector3d(2, 4, 6));
    CHECK(sol.rank == 1);
    CHECK(sol.coefficients(0) == doctest::Approx(1.0));
    CHECK(sol.coefficients(1) == doctest::Approx(1.0));
  }
  SUBCASE("residual is orthogonal to the columns") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = random_matrix(rng, 20, 4);
      const Eigen::VectorXd y = random_matrix(rng, 20, 1);
      const auto sol = solve_least_squares(x, y);
      CHECK((x.transpose() * (y - x * sol.coefficients)).norm() < 1e-10);

      oracle::Matrix rows(20, std::vector<double>(4));
      std::vector<double> t(20);
      for (int i = 0; i < 20; ++i) {
        t[i] = y(i);
        for (int j = 0; j < 4; ++j)
          rows[i][j] = x(i, j);
      }
      const auto ref = oracle::normal_equations(rows, t);
      for (int j = 0; j < 4; ++j)
        CHECK(sol.coefficients(j) == doctest::Approx(ref[j]).epsilon(1e-9));
    }
  }
  SUBCASE("errors") {
    CHECK(kind_of([] { solve_least_squares(Eigen::MatrixXd(0, 0), Eigen::VectorXd(0)); }) ==
          ErrorKind::Dimension);
    CHECK(kind_of([] { solve_least_squares(Eigen::MatrixXd::Ones(3, 1), Eigen::VectorXd(2)); }) ==
          ErrorKind::Dimension);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 1);
    bad(0, 0) = std::nan("");
    CHECK(kind_of([&] { solve_least_squares(bad, Eigen::Vector2d(1, 2)); }) ==
          ErrorKind::NonFinite);
  }
}

TEST_CASE("r_squared") {
  const std::vector<double> a{0, 1, 2, 3};
  const std::vector<double> p{0, 1, 2, 5};
  CHECK(r_squared(a, p) == doctest::Approx(0.2));
  CHECK(r_squared(a, a) == 1.0);
  const std::vector<double> mean(4, 1.5);
  CHECK(r_squared(a, mean) == 0.0);
  const std::vector<double> flat{2, 2, 2};
  CHECK(kind_of([&] { r_squared(flat, flat); }) == ErrorKind::UndefinedVariance);
  CHECK(kind_of([&] { r_squared(a, flat); }) == ErrorKind::Dimension);
  const std::vector<double> one{1};
  CHECK(kind_of([&] { r_squared(one, one); }) == ErrorKind::Dimension);
}

TEST_CASE("reconstruction readout") {
  SUBCASE("design rows are scaled by node position") {
    ScatteringLayer l;
    l.depth_index = 1;
    l.values.resize(2, 2);
    l.values << 1, 2, 3, 4;
    const auto d = reconstruction_design(l);
    CHECK(d(0, 0) == 1);
    CHECK(d(0, 1) == 2);
    CHECK(d(1, 0) == 9);
    CHECK(d(1, 1) == 12);
  }

  SUBCASE("fit, predict and the design oracle agree") {
    const auto s = gen_sinusoid(2.0, 256);
    const std::vector<PairingRule> rules{{0.0, 3}};
    const auto net = propagate(s, rules, 3);
    const auto fit = fit_reconstruction(net, s);
    REQUIRE(fit.report.positions.size() == 32);
    CHECK(fit.report.positions[1] == 9);
    for (std::size_t i = 0; i < 32; ++i)
      CHECK(fit.report.targets(static_cast<Eigen::Index>(i)) ==
            s.at_position(fit.report.positions[i]));

    const auto pred = predict_reconstruction(fit.model, net);
    REQUIRE(pred.size() == 32);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      CHECK(pred[i].position == fit.report.positions[i]);
      CHECK(pred[i].value ==
            doctest::Approx(fit.report.predictions(static_cast<Eigen::Index>(i))));
    }
    const double r2 = r_squared(fit.report.targets, fit.report.predictions);
    CHECK(fit.report.r_squared.value() == doctest::Approx(r2));
  }

  SUBCASE("targets in the design span are fitted exactly") {
    // x(t) = t with adjacent pairing: |x(t) - x(t+1)| = 1, so t_n * 1 = x(t_n).
    const Signal s({1, 2, 3, 4, 5, 6, 7, 8});
    const auto net = propagate(s, std::vector<PairingRule>{{0.0, 1}}, 1);
    const auto fit = fit_reconstruction(net, s);
    CHECK(fit.report.r_squared.value() == doctest::Approx(1.0));
    CHECK(fit.report.residuals.cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("constant signal leaves R^2 undefined") {
    const Signal s(std::vector<double>(64, 2.0));
    const auto net = propagate(s, std::vector<PairingRule>{{0.0, 1}}, 2);
    const auto fit = fit_reconstruction(net, s);
    CHECK_FALSE(fit.report.r_squared.has_value());
    // t_n times constant features cannot reproduce a constant; the fit is a line.
    const auto pred = predict_reconstruction(fit.model, net);
    for (std::size_t i = 0; i < pred.size(); ++i)
      CHECK(pred[i].value ==
            doctest::Approx(fit.report.predictions(static_cast<Eigen::Index>(i))));
  }

  SUBCASE("zero coefficients predict zeros") {
    const auto s = gen_sinusoid(1.0, 64);
    const auto net = propagate(s, std::vector<PairingRule>{{0.0, 1}}, 2);
    ReadoutModel m;
    m.depth = 2;
    m.beta = Eigen::VectorXd::Zero(4);
    for (const auto &nv : predict_reconstruction(m, net))
      CHECK(nv.value == 0.0);
  }
}

TEST_CASE("interpolate") {
  const std::vector<NodeValue> two{{1, 0.0}, {17, 16.0}};
  const auto s = interpolate(two, 32);
  CHECK(s[8] == 8.0);
  CHECK(s[0] == 0.0);
  CHECK(s[16] == 16.0);
  CHECK(s[31] == 16.0);

  const std::vector<NodeValue> one{{1, 4.0}};
  const auto flat = interpolate(one, 8);
  for (double v : flat.samples())
    CHECK(v == 4.0);

  std::vector<NodeValue> all;
  for (std::size_t t = 1; t <= 8; ++t)
    all.push_back({t, static_cast<double>(t * t)});
  const auto same = interpolate(all, 8);
  for (std::size_t t = 1; t <= 8; ++t)
    CHECK(same.at_position(t) == static_cast<double>(t * t));

  const std::vector<NodeValue> unordered{{5, 1.0}, {2, 1.0}};
  CHECK(kind_of([&] { interpolate(unordered, 8); }) == ErrorKind::Domain);
}

TEST_CASE("parameter sweeps") {
  const std::vector<PairingRule> rules{{0.0, 1}};

  SUBCASE("theta grid validation") {
    CHECK(kind_of([&] {
            make_sweep({0.1, 0.2, 0.4}, constant_signals({1, 2, 3}, 8), rules, 1);
          }) == ErrorKind::Usage);
    CHECK(kind_of([&] { make_sweep({0.1, 0.1}, constant_signals({1, 2}, 8), rules, 1); }) ==
          ErrorKind::Usage);
    CHECK(kind_of([&] { make_sweep({0.1, 0.2}, constant_signals({1}, 8), rules, 1); }) ==
          ErrorKind::Dimension);
    CHECK_NOTHROW(make_sweep({0.3, 0.2, 0.1}, constant_signals({1, 2, 3}, 8), rules, 1));
  }

  SUBCASE("averaged features of constant signals") {
    // Depth 1 on a constant c: sums 2c, differences 0.
    const auto sw = make_sweep({1, 2, 3}, constant_signals({1, 2, 3}, 8), rules, 1);
    CHECK(sw.averaged_features.rows() == 3);
    CHECK(sw.averaged_features.cols() == 2);
    CHECK(sw.averaged_features(2, 0) == 6.0);
    CHECK(sw.averaged_features(2, 1) == 0.0);
    CHECK(midpoint_targets(sw)(1) == 2.0);
  }

  SUBCASE("inverse fit recovers a linear relation") {
    // theta = c / 2 and feature 0 = 2c, so beta_0 = 1/4.
    const auto sw = make_sweep({0.5, 1.0, 1.5, 2.0}, constant_signals({1, 2, 3, 4}, 8), rules, 1);
    const auto fit = fit_parameter_inverse(sw);
    CHECK(fit.report.r_squared.value() == doctest::Approx(1.0));
    CHECK(fit.model.beta(0) == doctest::Approx(0.25));
    CHECK(fit.report.rank_deficient);
    const auto pred = predict_parameter(fit.model, sw);
    CHECK(pred(3) == doctest::Approx(2.0));
  }

  SUBCASE("forward fit and zero theta rows") {
    // Level c = theta, so forward rows are theta * (2 theta, 0).
    const auto sw = make_sweep({0.0, 1.0, 2.0}, constant_signals({0, 1, 2}, 8), rules, 1);
    const auto fit = fit_parameter_forward(sw);
    CHECK(fit.report.zero_theta_rows == 1);
    const auto d = parameter_design(sw, ReadoutKind::ForwardParameter, Transfer::Identity);
    CHECK(d(2, 0) == 8.0);
    CHECK(d.row(0).isZero(0.0));
  }

  SUBCASE("single theta") {
    const auto sw = make_sweep({1.0}, constant_signals({3}, 8), rules, 1);
    const auto fit = fit_parameter_inverse(sw);
    CHECK_FALSE(fit.report.r_squared.has_value());
    CHECK(predict_parameter(fit.model, sw)(0) == doctest::Approx(1.0));
  }

  SUBCASE("transfer functions") {
    CHECK(apply_transfer(Transfer::Abs, -2.0) == 2.0);
    CHECK(apply_transfer(Transfer::Log1p, -1.0) == doctest::Approx(std::log(2.0)));
    CHECK(apply_transfer(Transfer::Identity, -1.5) == -1.5);
    CHECK(parse_transfer("log1p") == Transfer::Log1p);
    CHECK(kind_of([] { parse_transfer("tanh"); }) == ErrorKind::Usage);
  }
}

TEST_CASE("least-squares properties") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_matrix(rng, 16, 3);
    const Eigen::VectorXd y = random_matrix(rng, 16, 1);
    const auto sol = solve_least_squares(x, y);
    const double base = (y - x * sol.coefficients).squaredNorm();

    Eigen::VectorXd perturbed = sol.coefficients;
    perturbed(trial % 3) += 1e-3 * d(rng);
    CHECK((y - x * perturbed).squaredNorm() >= base - 1e-12);

    Eigen::MatrixXd wider(16, 4);
    wider << x, random_matrix(rng, 16, 1);
    const auto sol4 = solve_least_squares(wider, y);
    CHECK((y - wider * sol4.coefficients).squaredNorm() <= base + 1e-12);
  }
}

TEST_CASE("holdout split") {
  Eigen::MatrixXd x(6, 1);
  x << 1, 2, 3, 4, 5, 6;
  const Eigen::VectorXd y = 3.0 * x.col(0);
  CHECK(holdout_r_squared(x, y).value() == doctest::Approx(1.0));
  CHECK_FALSE(holdout_r_squared(x.topRows(2), y.head(2)).has_value());
}
