#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <doctest.h>

#include "cssc/adamax.hpp"
#include "cssc/checkpoint.hpp"
#include "cssc/errors.hpp"
#include "cssc/mlp.hpp"
#include "cssc/params.hpp"
#include "cssc/rng.hpp"
#include "cssc/tape.hpp"
#include "oracles.hpp"

using namespace cssc;

namespace {

using ScalarBuilder = std::function<ad::NodeId(ad::Tape&)>;

double eval_scalar(const ParamStore& store, const ScalarBuilder& build) {
  ad::Tape t(&store);
  return t.scalar(build(t));
}

std::vector<double> tape_gradient(const ParamStore& store, const ScalarBuilder& build) {
  ad::Tape t(&store);
  const ad::NodeId loss = build(t);
  std::vector<double> g(static_cast<std::size_t>(store.size()), 0.0);
  t.backward(loss, g);
  return g;
}

std::vector<double> fd_gradient(ParamStore& store, const ScalarBuilder& build,
                                double h = 1e-6) {
  std::vector<double> g(static_cast<std::size_t>(store.size()));
  const std::span<double> values = store.values();
  for (int i = 0; i < store.size(); ++i) {
    const double keep = values[i];
    values[i] = keep + h;
    const double up = eval_scalar(store, build);
    values[i] = keep - h;
    const double down = eval_scalar(store, build);
    values[i] = keep;
    g[static_cast<std::size_t>(i)] = (up - down) / (2.0 * h);
  }
  return g;
}

void check_close(const std::vector<double>& got, const std::vector<double>& want,
                 double rel) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(std::fabs(got[i] - want[i]) <= rel * (1.0 + std::fabs(want[i])));
  }
}

int find_tensor(const ParamStore& store, const std::string& name) {
  for (int i = 0; i < store.tensor_count(); ++i) {
    if (store.info(i).name == name) return i;
  }
  FAIL("tensor not found: ", name);
  return -1;
}

std::string temp_path(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("tape elementwise values") {
  ad::Tape t;
  const ad::NodeId a = t.constant(std::vector<double>{1.0, -2.0, 0.5});
  const ad::NodeId b = t.constant(std::vector<double>{0.5, 1.5, -1.0});
  CHECK(t.value(t.add(a, b))[1] == -0.5);
  CHECK(t.value(t.sub(a, b))[0] == 0.5);
  CHECK(t.value(t.emul(a, b))[2] == -0.5);
  CHECK(t.value(t.scale(a, -2.0))[0] == -2.0);
  CHECK(t.scalar(t.sq_sum(a)) == doctest::Approx(1.0 + 4.0 + 0.25));
  CHECK(t.value(t.tanh(a))[0] == doctest::Approx(std::tanh(1.0)));
  CHECK(t.value(t.sigmoid(a))[1] == doctest::Approx(1.0 / (1.0 + std::exp(2.0))));
  CHECK(t.value(t.one_minus_sq(a))[1] == doctest::Approx(-3.0));
  CHECK(t.scalar(t.index(a, 2)) == 0.5);
  const ad::NodeId cat = t.concat(std::vector<ad::NodeId>{a, b});
  CHECK(t.length(cat) == 6);
  CHECK(t.value(cat)[4] == 1.5);
  const ad::NodeId lc = t.lincomb(std::vector<ad::NodeId>{a, b},
                                  std::vector<double>{2.0, -1.0});
  CHECK(t.value(lc)[0] == doctest::Approx(1.5));
  CHECK_THROWS_AS(t.index(a, 3), Error);
  CHECK_THROWS_AS(t.add(a, t.constant(1.0)), Error);
}

TEST_CASE("tape gradients match finite differences through a tanh net") {
  ParamStore store;
  Mlp net(store, "net", {2, 4, 3});
  Rng rng(9);
  net.init(store, rng);
  // Biases start at zero; nudge them so their gradients are exercised at a
  // generic point.
  for (int i = 0; i < store.tensor_count(); ++i) {
    if (store.info(i).cols == 1) {
      for (double& v : store.tensor(i)) v = rng.uniform(-0.3, 0.3);
    }
  }

  const std::vector<double> x = {0.7, -1.2};
  const ScalarBuilder build = [&](ad::Tape& t) {
    return t.sq_sum(net.forward(t, t.constant(x)));
  };
  check_close(tape_gradient(store, build), fd_gradient(store, build), 1e-7);
}

TEST_CASE("gradients flow through every tape operation") {
  ParamStore store;
  const int w = store.add("w", 3, 3);
  const int b = store.add("b", 3, 1);
  Rng rng(21);
  store.init_xavier(w, rng);
  for (double& v : store.tensor(b)) v = rng.uniform(-0.5, 0.5);

  const std::vector<double> x = {0.3, -0.8, 1.1};
  const ScalarBuilder build = [&](ad::Tape& t) {
    const ad::NodeId xv = t.constant(x);
    const ad::NodeId ax = t.affine(w, b, xv);               // W x + b
    const ad::NodeId lt = t.linear_t(w, t.tanh(ax));        // W^T tanh(.)
    const ad::NodeId a2 = t.affine2(w, xv, w, lt, b);       // W x + W lt + b
    const ad::NodeId mixed = t.emul(t.sigmoid(a2), t.one_minus_sq(t.tanh(xv)));
    const ad::NodeId lc = t.lincomb(std::vector<ad::NodeId>{mixed, ax},
                                    std::vector<double>{1.5, -0.25});
    const ad::NodeId cat = t.concat(std::vector<ad::NodeId>{lc, t.index(ax, 1)});
    return t.sq_sum(t.concat(std::vector<ad::NodeId>{cat, t.scale(lt, 0.5)}));
  };
  check_close(tape_gradient(store, build), fd_gradient(store, build), 1e-6);
}

TEST_CASE("linear transpose really is the transpose") {
  ParamStore store;
  const int w = store.add("w", 3, 2);
  std::span<double> wv = store.tensor(w);
  for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = 0.5 * static_cast<double>(i) - 1.0;

  ad::Tape t(&store);
  const ad::NodeId x = t.constant(std::vector<double>{2.0, -1.0});
  const ad::NodeId y = t.constant(std::vector<double>{1.0, 0.5, -2.0});
  const std::span<const double> wx = t.value(t.linear(w, x));
  const std::span<const double> wty = t.value(t.linear_t(w, y));
  // <y, W x> == <W^T y, x>
  const double lhs = 1.0 * wx[0] + 0.5 * wx[1] + (-2.0) * wx[2];
  const double rhs = wty[0] * 2.0 + wty[1] * (-1.0);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
}

TEST_CASE("stop gradient keeps values and drops adjoints") {
  ParamStore store;
  const int w = store.add("w", 2, 2);
  store.tensor(w)[0] = 1.0;
  store.tensor(w)[1] = 2.0;
  store.tensor(w)[2] = -1.0;
  store.tensor(w)[3] = 0.5;
  const std::vector<double> x = {1.0, 1.0};

  ad::Tape t(&store);
  const ad::NodeId y = t.linear(w, t.constant(x));
  const ad::NodeId frozen = t.stop_gradient(y);
  CHECK(t.value(frozen)[0] == t.value(y)[0]);
  CHECK(t.value(frozen)[1] == t.value(y)[1]);

  const ScalarBuilder through = [&](ad::Tape& tt) {
    return tt.sq_sum(tt.stop_gradient(tt.linear(w, tt.constant(x))));
  };
  for (double g : tape_gradient(store, through)) CHECK(g == 0.0);

  // A blocked branch contributes its value but not its gradient.
  const ScalarBuilder half = [&](ad::Tape& tt) {
    const ad::NodeId z = tt.linear(w, tt.constant(x));
    return tt.sq_sum(tt.add(z, tt.stop_gradient(z)));
  };
  const ScalarBuilder open = [&](ad::Tape& tt) {
    const ad::NodeId z = tt.linear(w, tt.constant(x));
    return tt.sq_sum(tt.add(z, z));
  };
  const std::vector<double> gh = tape_gradient(store, half);
  const std::vector<double> go = tape_gradient(store, open);
  for (std::size_t i = 0; i < gh.size(); ++i) {
    CHECK(gh[i] == doctest::Approx(0.5 * go[i]).epsilon(1e-12));
  }
}

TEST_CASE("tridiagonal solve on the tape: values and adjoints") {
  TridiagonalSystem sys;
  sys.diag = {3.0, 4.0, 5.0, 4.0};
  sys.sub = {1.0, -1.0, 0.5};
  sys.sup = {-0.5, 1.0, 1.5};
  sys.rhs = {0.0, 0.0, 0.0, 0.0};

  ParamStore store;
  const int w = store.add("w", 4, 2);
  Rng rng(3);
  store.init_xavier(w, rng);
  const std::vector<double> x = {1.0, -2.0};

  const TridiagonalFactorization fac(sys.sub, sys.diag, sys.sup);
  const ScalarBuilder build = [&](ad::Tape& t) {
    const int sid = t.register_system(fac);
    const ad::NodeId rhs = t.linear(w, t.constant(x));
    return t.sq_sum(t.tridiag_solve(sid, rhs));
  };
  check_close(tape_gradient(store, build), fd_gradient(store, build), 1e-7);

  // Forward value agrees with the plain solver.
  ad::Tape t(&store);
  const int sid = t.register_system(fac);
  const ad::NodeId rhs = t.linear(w, t.constant(x));
  const ad::NodeId sol = t.tridiag_solve(sid, rhs);
  std::vector<double> rhs_plain(t.value(rhs).begin(), t.value(rhs).end());
  check_close(std::vector<double>(t.value(sol).begin(), t.value(sol).end()),
              fac.solve(rhs_plain), 1e-14);
}

TEST_CASE("taped and untaped net evaluation agree exactly") {
  ParamStore store;
  Mlp net(store, "net", {3, 8, 8, 2});
  Rng rng(17);
  net.init(store, rng);

  Rng xr(99);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(3);
    for (double& v : x) v = xr.uniform(-2.0, 2.0);
    const std::vector<double> plain = net.eval(store, x);
    ad::Tape t(&store);
    const std::span<const double> taped = t.value(net.forward(t, t.constant(x)));
    for (int i = 0; i < 2; ++i) CHECK(plain[static_cast<std::size_t>(i)] == taped[i]);
  }
}

TEST_CASE("directional derivative matches finite differences") {
  ParamStore store;
  Mlp net(store, "net", {2, 6, 3});
  Rng rng(71);
  net.init(store, rng);
  const std::vector<double> x = {0.4, -0.9};
  const std::vector<double> v = {1.3, 0.7};

  ad::Tape t(&store);
  const Mlp::Activations acts = net.forward_full(t, t.constant(x));
  const std::span<const double> jv = t.value(net.jvp(t, acts, t.constant(v)));

  const double h = 1e-6;
  std::vector<double> xp(2), xm(2);
  for (int i = 0; i < 2; ++i) {
    xp[i] = x[i] + h * v[i];
    xm[i] = x[i] - h * v[i];
  }
  const std::vector<double> up = net.eval(store, xp);
  const std::vector<double> dn = net.eval(store, xm);
  for (int i = 0; i < 3; ++i) {
    const double fd = (up[static_cast<std::size_t>(i)] - dn[static_cast<std::size_t>(i)]) /
                      (2.0 * h);
    CHECK(std::fabs(jv[static_cast<std::size_t>(i)] - fd) <= 1e-6 * (1.0 + std::fabs(fd)));
  }
}

TEST_CASE("jvp and vjp satisfy the adjoint identity") {
  ParamStore store;
  Mlp net(store, "net", {3, 5, 4});
  Rng rng(23);
  net.init(store, rng);

  Rng xr(5);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> x(3), v(3), w(4);
    for (double& q : x) q = xr.uniform(-1.5, 1.5);
    for (double& q : v) q = xr.uniform(-1.0, 1.0);
    for (double& q : w) q = xr.uniform(-1.0, 1.0);

    ad::Tape t(&store);
    const Mlp::Activations acts = net.forward_full(t, t.constant(x));
    const std::span<const double> jv = t.value(net.jvp(t, acts, t.constant(v)));
    double lhs = 0.0;
    for (int i = 0; i < 4; ++i) lhs += w[static_cast<std::size_t>(i)] * jv[i];
    const std::span<const double> jtw = t.value(net.vjp(t, acts, t.constant(w)));
    double rhs = 0.0;
    for (int i = 0; i < 3; ++i) rhs += jtw[i] * v[static_cast<std::size_t>(i)];
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * (1.0 + std::fabs(lhs)));
  }
}

TEST_CASE("second order: gradients flow through the directional derivative") {
  ParamStore store;
  Mlp net(store, "net", {2, 3, 2});
  Rng rng(37);
  net.init(store, rng);
  const std::vector<double> x = {0.6, -0.3};
  const std::vector<double> v = {-0.8, 1.1};

  const ScalarBuilder build = [&](ad::Tape& t) {
    const Mlp::Activations acts = net.forward_full(t, t.constant(x));
    return t.sq_sum(net.jvp(t, acts, t.constant(v)));
  };
  check_close(tape_gradient(store, build), fd_gradient(store, build, 1e-5), 1e-5);
}

TEST_CASE("gated update: taped equals untaped and idles when the gate shuts") {
  ParamStore store;
  GruCell cell(store, "cell", 4, 2, 0);
  Rng rng(41);
  cell.init(store, rng);

  const std::vector<double> h = {0.2, -0.4, 0.8, -0.1};
  const std::vector<double> x = {1.0, -0.5};

  const std::vector<double> plain = cell.update(store, h, x);
  ad::Tape t(&store);
  const std::span<const double> taped =
      t.value(cell.update(t, t.constant(h), t.constant(x)));
  for (int i = 0; i < 4; ++i) CHECK(plain[static_cast<std::size_t>(i)] == taped[i]);

  // Large negative update-gate bias: z ~ 0, so the state passes through.
  const int bz = find_tensor(store, "cell.bz");
  for (double& v : store.tensor(bz)) v = -40.0;
  const std::vector<double> frozen = cell.update(store, h, x);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::fabs(frozen[static_cast<std::size_t>(i)] - h[static_cast<std::size_t>(i)]) <=
          1e-12);
  }
}

TEST_CASE("gated update gradients match finite differences") {
  ParamStore store;
  GruCell cell(store, "cell", 3, 2, 2);  // exercise the input embedding too
  Rng rng(53);
  cell.init(store, rng);
  const std::vector<double> h = {0.3, -0.6, 0.1};
  const std::vector<double> x = {0.9, 0.4};

  const ScalarBuilder build = [&](ad::Tape& t) {
    return t.sq_sum(cell.update(t, t.constant(h), t.constant(x)));
  };
  check_close(tape_gradient(store, build), fd_gradient(store, build), 1e-6);
}

TEST_CASE("optimizer first step has the closed form") {
  AdaMaxConfig cfg;
  cfg.learning_rate = 0.1;
  AdaMax opt(3, cfg);
  std::vector<double> params = {1.0, -2.0, 0.5};
  const std::vector<double> grad = {0.4, -0.2, 0.0};
  opt.step(params, grad);
  // After one step the bias-corrected first moment equals the gradient and
  // the infinity moment equals |g|: the update is lr * g / (|g| + eps).
  CHECK(params[0] == doctest::Approx(1.0 - 0.1 * 0.4 / (0.4 + 1e-8)).epsilon(1e-12));
  CHECK(params[1] == doctest::Approx(-2.0 + 0.1 * 0.2 / (0.2 + 1e-8)).epsilon(1e-12));
  CHECK(params[2] == 0.5);  // zero gradient, zero moment: no movement
  CHECK(opt.step_count() == 1);
}

TEST_CASE("infinity moment never decays when beta2 is one") {
  AdaMaxConfig cfg;
  cfg.beta2 = 1.0;
  AdaMax opt(4, cfg);
  std::vector<double> params(4, 0.0);
  Rng rng(67);
  std::vector<double> prev(4, 0.0);
  for (int step = 0; step < 50; ++step) {
    std::vector<double> grad(4);
    for (double& g : grad) g = rng.uniform(-3.0, 3.0);
    opt.step(params, grad);
    const std::span<const double> u = opt.infinity_moment();
    for (int i = 0; i < 4; ++i) {
      CHECK(u[i] >= prev[static_cast<std::size_t>(i)]);
      CHECK(u[i] >= std::fabs(grad[static_cast<std::size_t>(i)]));
      prev[static_cast<std::size_t>(i)] = u[i];
    }
  }
  opt.reset();
  CHECK(opt.step_count() == 0);
  for (double u : opt.infinity_moment()) CHECK(u == 0.0);
}

TEST_CASE("optimizer validates its configuration") {
  AdaMaxConfig cfg;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(AdaMax(2, cfg), Error);
  cfg = {};
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(AdaMax(2, cfg), Error);
}

TEST_CASE("checkpoint round trip is exact") {
  ParamStore store;
  Mlp net(store, "f", {2, 5, 2});
  GruCell cell(store, "cell", 3, 2, 0);
  Rng rng(73);
  net.init(store, rng);
  cell.init(store, rng);
  for (double& v : store.values()) v += 1e-17 * 3.0;  // non-trivial low bits

  RunConfig cfg;
  cfg.hidden_dim = 3;
  cfg.alpha = 123.5;
  cfg.compensation_space = CompensationSpace::hidden;
  cfg.derivative_mode = DerivativeMode::numerical;
  cfg.strict_natural_boundary = true;
  cfg.seed = 987654321;

  const std::string path = temp_path("cssc_nn_ckpt.json");
  save_checkpoint(path, cfg, 2, store);

  const CheckpointHeader header = read_checkpoint_header(path);
  CHECK(header.data_dim == 2);
  CHECK(header.config.hidden_dim == 3);
  CHECK(header.config.alpha == 123.5);
  CHECK(header.config.compensation_space == CompensationSpace::hidden);
  CHECK(header.config.derivative_mode == DerivativeMode::numerical);
  CHECK(header.config.strict_natural_boundary);
  CHECK(header.config.seed == 987654321);

  ParamStore clone;
  Mlp net2(clone, "f", {2, 5, 2});
  GruCell cell2(clone, "cell", 3, 2, 0);
  load_checkpoint_params(path, clone);
  REQUIRE(clone.size() == store.size());
  for (int i = 0; i < store.size(); ++i) {
    CHECK(clone.values()[i] == store.values()[i]);  // bit-exact
  }
  std::remove(path.c_str());
  std::remove((path + ".bin").c_str());
}

TEST_CASE("checkpoint shape drift is refused") {
  ParamStore store;
  Mlp net(store, "f", {2, 4, 1});
  Rng rng(79);
  net.init(store, rng);
  RunConfig cfg;
  const std::string path = temp_path("cssc_nn_ckpt2.json");
  save_checkpoint(path, cfg, 1, store);

  ParamStore renamed;
  Mlp other(renamed, "g", {2, 4, 1});
  CHECK_THROWS_AS(load_checkpoint_params(path, renamed), Error);

  ParamStore reshaped;
  Mlp wide(reshaped, "f", {2, 5, 1});
  CHECK_THROWS_AS(load_checkpoint_params(path, reshaped), Error);

  ParamStore extra;
  Mlp same(extra, "f", {2, 4, 1});
  extra.add("orphan", 1, 1);
  CHECK_THROWS_AS(load_checkpoint_params(path, extra), Error);

  try {
    load_checkpoint_params(path, renamed);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::checkpoint_mismatch);
  }

  // A truncated blob must not load.
  std::filesystem::resize_file(path + ".bin",
                               std::filesystem::file_size(path + ".bin") - 8);
  ParamStore ok;
  Mlp fine(ok, "f", {2, 4, 1});
  CHECK_THROWS_AS(load_checkpoint_params(path, ok), Error);

  std::remove(path.c_str());
  std::remove((path + ".bin").c_str());
}

TEST_CASE("parameter store bookkeeping") {
  ParamStore store;
  const int a = store.add("a", 2, 3);
  const int b = store.add("b", 4, 1);
  CHECK(store.tensor_count() == 2);
  CHECK(store.size() == 10);
  CHECK(store.info(a).offset == 0);
  CHECK(store.info(b).offset == 6);
  CHECK(store.tensor(b).size() == 4);

  Rng rng(83);
  store.init_xavier(a, rng);
  const double bound = std::sqrt(6.0 / (2 + 3));
  for (double v : store.tensor(a)) {
    CHECK(std::fabs(v) <= bound);
  }
  store.fill(b, 7.0);
  for (double v : store.tensor(b)) CHECK(v == 7.0);
}

}  // TEST_SUITE
