#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "cssc/errors.hpp"
#include "cssc/study.hpp"

using namespace cssc;

TEST_SUITE("study") {

TEST_CASE("sine interpolation converges at fourth and third order") {
  const std::array<int, 3> levels{16, 32, 64};
  const ConvergenceReport rep = run_convergence_study(smooth_sin(), levels);

  REQUIRE(rep.levels.size() == 3);
  CHECK(rep.function == "sin");
  CHECK(rep.value_slope == doctest::Approx(4.0).epsilon(0.1));
  CHECK(rep.deriv_slope == doctest::Approx(3.0).epsilon(0.1));
  CHECK(rep.bound_ok);

  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    const LevelReport& lv = rep.levels[i];
    CHECK(lv.intervals == levels[i]);
    CHECK(lv.tau == doctest::Approx(2.0 * std::numbers::pi / levels[i]).epsilon(1e-12));
    CHECK(lv.value_ratio <= 1.0);
    CHECK(lv.deriv_ratio <= 1.0);
    CHECK(lv.value_ratio ==
          doctest::Approx(lv.value_err / (kValueBoundConstant * std::pow(lv.tau, 4)))
              .epsilon(1e-9));
    CHECK(lv.deriv_ratio ==
          doctest::Approx(lv.deriv_err / (kDerivBoundConstant * std::pow(lv.tau, 3)))
              .epsilon(1e-9));
  }

  // Each refinement halves tau, so the sup errors must drop by about 2^4
  // and 2^3; anything much slower means the order is wrong.
  for (std::size_t i = 1; i < rep.levels.size(); ++i) {
    CHECK(rep.levels[i].value_err < 0.08 * rep.levels[i - 1].value_err);
    CHECK(rep.levels[i].deriv_err < 0.16 * rep.levels[i - 1].deriv_err);
  }
}

TEST_CASE("every suite function respects the error bound") {
  const std::array<int, 3> levels{32, 64, 128};
  for (const SmoothFunction& fn : smooth_suite()) {
    CAPTURE(fn.name);
    const ConvergenceReport rep = run_convergence_study(fn, levels);
    CHECK(rep.bound_ok);
    CHECK(rep.value_slope > 3.5);
    CHECK(rep.deriv_slope > 2.5);
    for (const LevelReport& lv : rep.levels) {
      CHECK(lv.value_err > 0.0);
      CHECK(lv.deriv_err > 0.0);
    }
  }
}

TEST_CASE("degenerate study requests are rejected") {
  const std::array<int, 0> empty{};
  CHECK_THROWS_AS(run_convergence_study(smooth_sin(), empty), Error);
  const std::array<int, 2> ok{8, 16};
  CHECK_THROWS_AS(run_convergence_study(smooth_sin(), ok, 1), Error);
}

}  // TEST_SUITE
