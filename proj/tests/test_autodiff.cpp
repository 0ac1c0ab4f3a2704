#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "truckmorl/autodiff/adam.hpp"
#include "truckmorl/autodiff/checkpoint.hpp"
#include "truckmorl/autodiff/distribution.hpp"
#include "truckmorl/autodiff/network.hpp"
#include "truckmorl/verification/suites.hpp"

using namespace truckmorl;
using namespace truckmorl::ad;

namespace {

NetworkSpec small_spec(std::uint64_t seed = 3) {
  NetworkSpec s;
  s.observation_size = 5;
  s.weight_size = 3;
  s.action_count = 8;
  s.observation_layers = {6, 4};
  s.weight_layers = {4};
  s.seed = seed;
  return s;
}

Matrix<double> column(std::initializer_list<double> xs) {
  Matrix<double> m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST_CASE("zeroed heads give zero logits and values") {
  ActorCritic<double> net = make_actor_critic<double>(small_spec());
  for (const char* name : {"actor.head.weight", "actor.head.bias", "critic.head.weight", "critic.head.bias"})
    net.params[net.params.index_of(name)].value.setZero();
  const auto out = infer(net, column({0.3, -1, 2, 0.5, 0.1}), column({0.2, 0.3, 0.5}));
  CHECK(out.logits.cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.logits.rows() == 24);
  CHECK(out.values.rows() == 3);
}

TEST_CASE("same seed gives bit-identical networks and outputs") {
  const ActorCritic<double> a = make_actor_critic<double>(small_spec(9));
  const ActorCritic<double> b = make_actor_critic<double>(small_spec(9));
  const ActorCritic<double> c = make_actor_critic<double>(small_spec(10));
  CHECK(a.params.flat_values() == b.params.flat_values());
  CHECK(a.params.flat_values() != c.params.flat_values());
  const auto obs = column({1, 2, 3, 4, 5});
  const auto w = column({1, 0, 0});
  CHECK(infer_logits(a, obs, w) == infer_logits(b, obs, w));
}

TEST_CASE("identity encoders combine features element-wise") {
  NetworkSpec s;
  s.observation_size = 3;
  s.weight_size = 3;
  s.action_count = 1;
  s.observation_layers = {3};
  s.weight_layers = {3};
  s.activation = Activation::identity;
  ActorCritic<double> net = make_actor_critic<double>(s);
  for (auto& b : net.params) {
    if (b.name.rfind("actor", 0) != 0) continue;
    if (b.name.find("weight") != std::string::npos)
      b.value.setIdentity();
    else
      b.value.setZero();
  }
  const auto logits = infer_logits(net, column({2, -3, 0.5}), column({0.2, 0.3, 0.5}));
  CHECK(logits(0, 0) == doctest::Approx(0.4));
  CHECK(logits(1, 0) == doctest::Approx(-0.9));
  CHECK(logits(2, 0) == doctest::Approx(0.25));
}

TEST_CASE("input dimension mismatch is a configuration error") {
  const ActorCritic<double> net = make_actor_critic<double>(small_spec());
  CHECK_THROWS_AS(infer_logits(net, column({1, 2}), column({1, 0, 0})), ConfigError);
  CHECK_THROWS_AS(infer_logits(net, column({1, 2, 3, 4, 5}), column({1, 0})), ConfigError);
}

TEST_CASE("network spec requires matching encoder widths") {
  NetworkSpec s = small_spec();
  s.weight_layers = {5};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(make_actor_critic<double>(s), ConfigError);
}

TEST_CASE("gradient of x^2 at 3 is 6") {
  ParameterSet<double> p;
  p.add("x", Matrix<double>::Constant(1, 1, 3.0));
  Tape<double> tape;
  tape.backward(sum(square(tape.parameter(p[0]))));
  CHECK(p[0].grad(0, 0) == doctest::Approx(6.0));
}

TEST_CASE("backward needs a value recorded on the same tape") {
  ParameterSet<double> p;
  p.add("x", Matrix<double>::Constant(1, 1, 3.0));
  Tape<double> first, second;
  const Var<double> y = sum(square(first.parameter(p[0])));
  CHECK_THROWS_AS(second.backward(y), UsageError);
  first.backward(y);
  CHECK_THROWS_AS(first.backward(y), UsageError);
}

TEST_CASE("masked logits receive no gradient and do not change the distribution") {
  ParameterSet<double> p;
  p.add("z", column({0.5, 2.0, -1.0, 0.3}));
  MaskMatrix mask(4, 1);
  mask << true, false, true, true;
  Tape<double> tape;
  const Var<double> logp = masked_log_softmax(tape.parameter(p[0]), mask);
  tape.backward(-sum(pick(logp, {0})));
  CHECK(p[0].grad(1, 0) == 0.0);
  CHECK(p[0].grad(0, 0) != 0.0);

  MaskVector m = mask.col(0);
  Eigen::VectorXd z = p[0].value.col(0);
  const Eigen::VectorXd before = masked_softmax(z, m);
  z(1) = 1e6;
  CHECK((masked_softmax(z, m) - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("masked softmax examples") {
  MaskVector all = MaskVector::Constant(8, true);
  const Eigen::VectorXd uniform = masked_softmax(Eigen::VectorXd::Zero(8), all);
  for (int a = 0; a < 8; ++a) CHECK(uniform(a) == doctest::Approx(0.125));

  MaskVector two_masked = all;
  two_masked(2) = two_masked(5) = false;
  const Eigen::VectorXd p = masked_softmax(Eigen::VectorXd::Zero(8), two_masked);
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p(0) == doctest::Approx(1.0 / 6.0));
  CHECK(p(2) < 1e-12);
  CHECK(p(5) < 1e-12);

  const Eigen::VectorXd q = masked_softmax(Eigen::Vector2d(1.0, 0.0), MaskVector::Constant(2, true));
  CHECK(q(0) == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)));
  CHECK(q(0) == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(q(1) == doctest::Approx(0.2689).epsilon(1e-4));

  CHECK_THROWS_AS(masked_softmax(Eigen::VectorXd::Zero(3), MaskVector::Constant(3, false)), InvalidMaskError);
  CHECK_THROWS_AS(masked_argmax(Eigen::VectorXd::Zero(3), MaskVector::Constant(3, false)), InvalidMaskError);
}

TEST_CASE("masked argmax ignores masked entries and breaks ties low") {
  MaskVector m(4);
  m << false, true, true, true;
  CHECK(masked_argmax(Eigen::Vector4d(9, 1, 3, 3), m) == 2);
}

TEST_CASE("adam leaves parameters alone on a zero gradient") {
  ParameterSet<double> p;
  p.add("x", column({1.0, -2.0}));
  AdamState<double> s = make_adam_state(p, AdamConfig{0.1});
  p.zero_grad();
  adam_step(p, s);
  CHECK(p[0].value(0, 0) == 1.0);
  CHECK(p[0].value(1, 0) == -2.0);
  CHECK(s.step == 1);
}

TEST_CASE("adam first step moves by lr * g / (|g| + eps)") {
  ParameterSet<double> p;
  p.add("x", column({1.0}));
  AdamConfig c{0.01};
  AdamState<double> s = make_adam_state(p, c);
  p[0].grad(0, 0) = 0.5;
  adam_step(p, s);
  CHECK(p[0].value(0, 0) == doctest::Approx(1.0 - 0.01 * 0.5 / (0.5 + c.epsilon)).epsilon(1e-14));
}

TEST_CASE("adam with beta1 = beta2 = 0 takes identical normalized steps") {
  ParameterSet<double> p;
  p.add("x", column({0.0}));
  AdamConfig c{0.1, 0.0, 0.0, 1e-8};
  AdamState<double> s = make_adam_state(p, c);
  for (int i = 0; i < 2; ++i) {
    p[0].grad(0, 0) = -4.0;
    adam_step(p, s);
  }
  CHECK(p[0].value(0, 0) == doctest::Approx(2 * 0.1 * 4.0 / (4.0 + 1e-8)).epsilon(1e-14));
  CHECK(s.step == 2);
}

TEST_CASE("adam rejects a non-finite gradient and names the block") {
  ParameterSet<double> p;
  p.add("first", column({1.0}));
  p.add("second", column({1.0}));
  AdamState<double> s = make_adam_state(p, AdamConfig{});
  p.zero_grad();
  p[1].grad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    adam_step(p, s);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("second") != std::string::npos);
  }
  CHECK(p[0].value(0, 0) == 1.0);
  CHECK(s.step == 0);
}

TEST_CASE("gradient clipping bounds the joint norm") {
  ParameterSet<double> p;
  p.add("x", column({3.0, 4.0}));
  p[0].grad = column({3.0, 4.0});
  CHECK(clip_grad_norm(p, 1.0) == doctest::Approx(5.0));
  CHECK(p[0].grad.norm() == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("full loss gradient matches central differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) CHECK(verification::check_loss_gradient(seed).max_relative_error < 1e-4);
}

TEST_CASE("checkpoint round trip restores parameters and optimizer state") {
  const auto dir = std::filesystem::temp_directory_path() / "truckmorl_test_ckpt";
  std::filesystem::create_directories(dir);
  const auto path = dir / "net.bin";
  ActorCritic<float> net = make_actor_critic<float>(small_spec());
  AdamState<float> adam = make_adam_state(net.params, AdamConfig{1e-3});
  for (auto& b : net.params) b.grad.setConstant(0.25f);
  adam_step(net.params, adam);
  save_checkpoint(path, net, &adam);

  const LoadedCheckpoint<float> back = load_checkpoint<float>(path);
  CHECK(back.network.spec.hash() == net.spec.hash());
  CHECK(back.network.params.flat_values() == net.params.flat_values());
  REQUIRE(back.adam.has_value());
  CHECK(back.adam->step == 1);
  CHECK(back.adam->first_moment[0] == adam.first_moment[0]);
  CHECK(checkpoint_scalar_bytes(path) == 4);
  CHECK_THROWS_AS(load_checkpoint<double>(path), CheckpointError);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(load_checkpoint<float>(path), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint<float>(dir / "missing.bin"), CheckpointError);
  std::filesystem::remove_all(dir);
}
