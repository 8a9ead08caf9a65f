#include "barriertop/util.hpp"

#include <cmath>

#include "doctest.h"

using namespace bt;

TEST_CASE("smoothstep clamps and interpolates") {
  CHECK(smoothstep(-1.0) == 0.0);
  CHECK(smoothstep(0.0) == 0.0);
  CHECK(smoothstep(1.0) == 1.0);
  CHECK(smoothstep(2.0) == 1.0);
  CHECK(smoothstep(0.5) == doctest::Approx(0.5));
  // complement symmetry of the exp(-1/s) ratio construction
  for (double s : {0.1, 0.3, 0.7}) CHECK(smoothstep(s) + smoothstep(1 - s) == doctest::Approx(1.0));
  // flat to all orders at the ends: tiny slope just inside
  CHECK(smoothstep(0.01) < 1e-30);
}

TEST_CASE("adaptive quadrature hits analytic values") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-13) ==
        doctest::Approx(2.0).epsilon(1e-12));
  // reversed bounds flip the sign
  CHECK(integrate([](double x) { return std::sin(x); }, M_PI, 0.0, 1e-13) ==
        doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return 1.0 / (std::cosh(x) * std::cosh(x)); }, 0.0,
                  20.0, 1e-13) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sha256 matches the FIPS vector") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("g17 round-trips doubles") {
  double v = 0.1 + 0.2;
  CHECK(std::stod(fmt_g17(v)) == v);
  CHECK(std::stod(fmt_g17(1.0 / 3.0)) == 1.0 / 3.0);
}
