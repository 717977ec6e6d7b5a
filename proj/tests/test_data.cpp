#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <doctest.h>

#include "cssc/data.hpp"
#include "cssc/errors.hpp"
#include "cssc/rng.hpp"

using namespace cssc;

namespace {

std::string temp_file(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

bool same_trajectory(const Trajectory& a, const Trajectory& b) {
  return a.dim == b.dim && a.grid.points == b.grid.points && a.values == b.values &&
         a.observed == b.observed;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a raise");
  return Errc::invalid_spec;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("toy generation obeys its own contract") {
  ToySpec spec;
  spec.count = 8;
  spec.points = 100;
  spec.observe_fraction = 0.3;
  spec.seed = 99;
  const std::vector<Trajectory> data = generate_toy(spec);
  REQUIRE(data.size() == 8);

  const double step = spec.t_end / (spec.points - 1);
  for (const Trajectory& traj : data) {
    CHECK(traj.dim == 1);
    REQUIRE(traj.grid.size() == 100);
    CHECK(traj.grid.front() == 0.0);
    CHECK(traj.grid.back() == spec.t_end);
    CHECK(traj.grid.strictly_increasing());
    for (int i = 0; i < traj.grid.size(); ++i) {
      CHECK(traj.grid.time(i) == i * step);  // no jitter requested
    }

    CHECK(traj.observed.front());
    CHECK(traj.observed.back());
    CHECK(traj.observed_count() == 30);  // max(2, floor(0.3 * 100))

    for (const auto& row : traj.values) {
      CHECK(std::fabs(row[0]) <= spec.amp_hi + 1e-12);
    }
  }
}

TEST_CASE("toy generation is seed-deterministic") {
  ToySpec spec;
  spec.count = 4;
  spec.points = 40;
  spec.jitter = true;
  spec.seed = 7;
  const std::vector<Trajectory> a = generate_toy(spec);
  const std::vector<Trajectory> b = generate_toy(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_trajectory(a[i], b[i]));

  spec.seed = 8;
  const std::vector<Trajectory> c = generate_toy(spec);
  CHECK_FALSE(same_trajectory(a[0], c[0]));
}

TEST_CASE("jittered grids stay close to the uniform stamps") {
  ToySpec spec;
  spec.count = 6;
  spec.points = 50;
  spec.jitter = true;
  spec.seed = 31;
  const double step = spec.t_end / (spec.points - 1);
  for (const Trajectory& traj : generate_toy(spec)) {
    CHECK(traj.grid.strictly_increasing());
    CHECK(traj.grid.front() == 0.0);
    CHECK(traj.grid.back() == spec.t_end);
    for (int i = 1; i + 1 < traj.grid.size(); ++i) {
      CHECK(std::fabs(traj.grid.time(i) - i * step) < 0.4 * step);
    }
  }
}

TEST_CASE("toy generation rejects unusable specs") {
  const auto check_invalid = [](auto&& tweak) {
    ToySpec spec;
    tweak(spec);
    CHECK(code_of([&] { generate_toy(spec); }) == Errc::invalid_spec);
  };
  check_invalid([](ToySpec& s) { s.count = 0; });
  check_invalid([](ToySpec& s) { s.points = 1; });
  check_invalid([](ToySpec& s) { s.t_end = 0.0; });
  check_invalid([](ToySpec& s) { s.amp_lo = 0.0; });
  check_invalid([](ToySpec& s) { s.amp_hi = 0.1; });
  check_invalid([](ToySpec& s) { s.freq_hi = 0.05; });
  check_invalid([](ToySpec& s) { s.observe_fraction = 0.0; });
  check_invalid([](ToySpec& s) { s.observe_fraction = 1.5; });
}

TEST_CASE("smooth suite derivatives match difference quotients") {
  const double h = 1e-6;
  for (const SmoothFunction& fn : smooth_suite()) {
    CAPTURE(fn.name);
    for (int i = 0; i <= 50; ++i) {
      const double t = fn.a + (fn.b - fn.a) * i / 50;
      const double fd = (fn.value(t + h) - fn.value(t - h)) / (2.0 * h);
      CHECK(std::fabs(fd - fn.deriv(t)) <= 1e-5 * (1.0 + std::fabs(fd)));
    }
  }
}

TEST_CASE("the stated fourth-derivative bound is tight and never exceeded") {
  // Five-point stencil for the fourth derivative; every suite function is a
  // closed form that extends smoothly past its interval, so the stencil is
  // usable at the endpoints too.
  const double h = 2e-3;
  for (const SmoothFunction& fn : smooth_suite()) {
    CAPTURE(fn.name);
    double peak = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double t = fn.a + (fn.b - fn.a) * i / 2000;
      const double d4 =
          (fn.value(t - 2 * h) - 4 * fn.value(t - h) + 6 * fn.value(t) -
           4 * fn.value(t + h) + fn.value(t + 2 * h)) /
          (h * h * h * h);
      peak = std::max(peak, std::fabs(d4));
    }
    CHECK(peak >= 0.9 * fn.fourth_sup);
    CHECK(peak <= 1.02 * fn.fourth_sup);
  }
}

TEST_CASE("named lookup returns the matching function") {
  for (const char* name : {"sin", "gauss", "poly5"}) {
    CHECK(smooth_by_name(name).name == name);
  }
  CHECK(code_of([] { smooth_by_name("cubic"); }) == Errc::unknown_function);
}

TEST_CASE("smooth sampling hits the endpoints and observes everything") {
  const SmoothFunction fn = smooth_gauss();
  const Trajectory traj = sample_smooth(fn, 32);
  REQUIRE(traj.grid.size() == 33);
  CHECK(traj.grid.front() == fn.a);
  CHECK(traj.grid.back() == fn.b);
  CHECK(traj.observed_count() == 33);
  for (int i = 0; i < traj.grid.size(); ++i) {
    CHECK(traj.values[static_cast<std::size_t>(i)][0] == fn.value(traj.grid.time(i)));
  }
  const double tau = (fn.b - fn.a) / 32;
  for (int k = 0; k < traj.grid.intervals(); ++k) {
    CHECK(traj.grid.interval(k) == doctest::Approx(tau).epsilon(1e-12));
  }
  CHECK(code_of([&] { sample_smooth(fn, 0); }) == Errc::invalid_spec);
}

TEST_CASE("trajectory files round-trip bit for bit") {
  Rng rng(2024);
  std::vector<Trajectory> data;
  for (int c = 0; c < 3; ++c) {
    Trajectory traj;
    const int p = 4 + c;
    traj.dim = 2;
    traj.grid.points.resize(static_cast<std::size_t>(p));
    traj.grid.points[0] = -1.25;
    for (int i = 1; i < p; ++i) {
      traj.grid.points[static_cast<std::size_t>(i)] =
          traj.grid.points[static_cast<std::size_t>(i - 1)] + rng.uniform(1e-3, 2.0);
    }
    traj.values.resize(static_cast<std::size_t>(p));
    for (auto& row : traj.values) {
      row = {rng.normal() * 1e-8, rng.normal() * 1e12};
    }
    traj.values[0][0] = 0.1;  // not representable exactly, stresses the writer
    traj.observed.assign(static_cast<std::size_t>(p), true);
    if (p > 2) traj.observed[1] = false;
    data.push_back(std::move(traj));
  }

  const std::string path = temp_file("cssc_roundtrip.jsonl");
  write_trajectories(path, data);
  const std::vector<Trajectory> back = read_trajectories(path);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(same_trajectory(data[i], back[i]));
  std::remove(path.c_str());
}

TEST_CASE("blank lines between records are skipped") {
  const std::string path = temp_file("cssc_blank.jsonl");
  {
    std::ofstream out(path);
    out << R"({"t":[0,1],"x":[[1],[2]],"observed":[0,1]})" << "\n\n"
        << R"({"t":[0,2],"x":[[3],[4]],"observed":[0,1]})" << "\n";
  }
  CHECK(read_trajectories(path).size() == 2);
  std::remove(path.c_str());
}

TEST_CASE("reader failures carry the offending location") {
  CHECK(code_of([] { read_trajectories("/nonexistent/nowhere.jsonl"); }) ==
        Errc::parse_error);

  const std::string path = temp_file("cssc_bad.jsonl");
  const auto write_and_code = [&](const std::string& content) {
    std::ofstream out(path);
    out << content;
    out.close();
    return code_of([&] { read_trajectories(path); });
  };

  // Broken JSON on the second line; the message should name it.
  {
    std::ofstream out(path);
    out << R"({"t":[0,1],"x":[[1],[2]],"observed":[0,1]})" << "\n"
        << "{not json\n";
  }
  try {
    read_trajectories(path);
    FAIL("expected a raise");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_error);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  CHECK(write_and_code(R"({"t":[0,1],"x":[[1],[2]]})" "\n") == Errc::parse_error);
  CHECK(write_and_code(R"({"t":[0,1],"x":[[1],[2]],"observed":[0,7]})" "\n") ==
        Errc::parse_error);
  CHECK(write_and_code(R"({"t":[1,0],"x":[[1],[2]],"observed":[0,1]})" "\n") ==
        Errc::non_monotone_time);
  CHECK(write_and_code(R"({"t":[0,1],"x":[[1],[2,3]],"observed":[0,1]})" "\n") ==
        Errc::dimension_mismatch);
  CHECK(write_and_code(R"({"t":[0,1],"x":[[1],[2]],"observed":[0]})" "\n") ==
        Errc::endpoint_not_observed);
  std::remove(path.c_str());

  CHECK(code_of([] {
          write_trajectories("/nonexistent/nowhere.jsonl", {});
        }) == Errc::parse_error);
}

}  // TEST_SUITE
