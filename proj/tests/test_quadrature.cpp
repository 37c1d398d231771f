#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "lsrf/quadrature.hpp"

using namespace lsrf;

namespace {

double moment(const QuadratureRule& rule, int p) {
  double acc = 0.0;
  for (int i = 0; i < rule.size(); ++i)
    acc += rule.weights[i] * std::pow(rule.nodes[i], p);
  return acc;
}

}  // namespace

TEST_CASE("gauss_hermite_prob matches standard normal moments") {
  const QuadratureRule rule = gauss_hermite_prob(64);
  CHECK(moment(rule, 0) == Catch::Approx(1.0).margin(1e-13));
  CHECK(moment(rule, 1) == Catch::Approx(0.0).margin(1e-13));
  CHECK(moment(rule, 2) == Catch::Approx(1.0).margin(1e-12));
  CHECK(moment(rule, 4) == Catch::Approx(3.0).margin(1e-11));
  CHECK(moment(rule, 6) == Catch::Approx(15.0).margin(1e-10));
}

TEST_CASE("gauss_hermite_prob nodes are symmetric") {
  const QuadratureRule rule = gauss_hermite_prob(200);
  REQUIRE(rule.size() == 200);
  for (int i = 0; i < 100; ++i) {
    CHECK(rule.nodes[i] == Catch::Approx(-rule.nodes[199 - i]).margin(1e-10));
    CHECK(rule.weights[i] ==
          Catch::Approx(rule.weights[199 - i]).margin(1e-16));
  }
}

TEST_CASE("gauss_laguerre_prob matches Gamma moments") {
  // Gamma(5,1): alpha = 4
  const QuadratureRule rule = gauss_laguerre_prob(64, 4.0);
  CHECK(moment(rule, 0) == Catch::Approx(1.0).margin(1e-13));
  CHECK(moment(rule, 1) == Catch::Approx(5.0).margin(1e-11));
  CHECK(moment(rule, 2) == Catch::Approx(30.0).margin(1e-10));
  // scale 2 doubles the mean
  const QuadratureRule scaled = gauss_laguerre_prob(64, 4.0, 2.0);
  CHECK(moment(scaled, 1) == Catch::Approx(10.0).margin(1e-10));
}

TEST_CASE("gauss_legendre integrates polynomials and exponentials") {
  const QuadratureRule rule = gauss_legendre(32, 0.0, 1.0);
  CHECK(moment(rule, 3) == Catch::Approx(0.25).margin(1e-14));
  const QuadratureRule wide = gauss_legendre(48, -1.0, 2.0);
  double acc = 0.0;
  for (int i = 0; i < wide.size(); ++i)
    acc += wide.weights[i] * std::exp(wide.nodes[i]);
  CHECK(acc == Catch::Approx(std::exp(2.0) - std::exp(-1.0)).margin(1e-12));
}

TEST_CASE("quadrature rejects invalid arguments") {
  CHECK_THROWS_AS(gauss_hermite_prob(0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_laguerre_prob(8, -1.5), std::invalid_argument);
  CHECK_THROWS_AS(gauss_laguerre_prob(8, 4.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre(8, 1.0, 1.0), std::invalid_argument);
}
