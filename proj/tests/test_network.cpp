#include <random>

#include <doctest.h>

#include "deadrelu/init.hpp"
#include "deadrelu/network.hpp"

using namespace deadrelu;

namespace {

LayerParams layer_from(std::initializer_list<std::initializer_list<double>> rows, Vector bias) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix w(n, n);
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) w(r, c++) = v;
    ++r;
  }
  return {w, std::move(bias)};
}

Matrix points_from(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix p(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) p(r, c++) = v;
    ++r;
  }
  return p;
}

ReluNetwork random_net(int n, int k, BiasMode mode, std::uint64_t seed) {
  Engine engine(seed);
  return sample_network(n, k, InitScheme::he(), mode, engine);
}

DataBatch random_batch(int m, int n, std::uint64_t seed) {
  Engine engine(seed);
  return DataBatch(sample_standard_normal(m, n, engine));
}

}  // namespace

TEST_CASE("identity layer keeps a point with one positive coordinate alive") {
  const ReluNetwork net({layer_from({{1, 0}, {0, 1}}, Vector::Zero(2))}, BiasMode::ZeroBias);
  const ForwardTrace t = forward_trace(net, DataBatch(points_from({{1, -1}})));
  CHECK(t.pre_activations[0](0, 0) == 1.0);
  CHECK(t.pre_activations[0](0, 1) == -1.0);
  CHECK(t.post_activations[0](0, 0) == 1.0);
  CHECK(t.post_activations[0](0, 1) == 0.0);
  CHECK(t.alive_mask[0][0] == 1);
  CHECK(network_alive(t));
}

TEST_CASE("negated identity kills the positive orthant") {
  const ReluNetwork net({layer_from({{-1, 0}, {0, -1}}, Vector::Zero(2))}, BiasMode::ZeroBias);
  const ForwardTrace t = forward_trace(net, DataBatch(points_from({{1, 1}})));
  CHECK(t.pre_activations[0](0, 0) == -1.0);
  CHECK(t.post_activations[0].isZero(0.0));
  CHECK(t.alive_mask[0][0] == 0);
  CHECK_FALSE(network_alive(t));

  const ForwardTrace many = forward_trace(net, DataBatch(points_from({{1, 2}, {0.5, 3}, {7, 0.1}})));
  CHECK_FALSE(network_alive(many));
}

TEST_CASE("death propagates even if a later layer would fire") {
  // Layer 2 has a positive bias, so the dead point's pre-activation is positive there.
  Vector b2(2);
  b2 << 1.0, 1.0;
  const ReluNetwork net({layer_from({{-1, 0}, {0, -1}}, Vector::Zero(2)), layer_from({{1, 0}, {0, 1}}, b2)},
                        BiasMode::FreeBias);
  const ForwardTrace t = forward_trace(net, DataBatch(points_from({{1, 1}})));
  CHECK(t.pre_activations[1](0, 0) == 1.0);
  CHECK(t.alive_mask[0][0] == 0);
  CHECK(t.alive_mask[1][0] == 0);
  CHECK(alive_counts(t) == std::vector<int>{0, 0});
}

TEST_CASE("alive counts") {
  const ReluNetwork ident({layer_from({{1, 0}, {0, 1}}, Vector::Zero(2)), layer_from({{1, 0}, {0, 1}}, Vector::Zero(2))},
                          BiasMode::ZeroBias);
  CHECK(alive_counts(forward_trace(ident, DataBatch(points_from({{1, 0}, {0, 1}, {2, 2}})))) ==
        std::vector<int>{3, 3});

  // Layer 2 keeps only the first coordinate, killing the point that lives on the second axis.
  const ReluNetwork select({layer_from({{1, 0}, {0, 1}}, Vector::Zero(2)), layer_from({{1, 0}, {0, 0}}, Vector::Zero(2))},
                           BiasMode::ZeroBias);
  const ForwardTrace t = forward_trace(select, DataBatch(points_from({{1, 0}, {0, 1}, {2, 2}})));
  CHECK(alive_counts(t) == std::vector<int>{3, 2});
  CHECK(network_alive(t));
}

TEST_CASE("forward trace rejects mismatched batch") {
  const ReluNetwork net = random_net(3, 2, BiasMode::ZeroBias, 1);
  CHECK_THROWS_AS(forward_trace(net, random_batch(4, 2, 2)), InvalidInput);
  CHECK_THROWS_AS(alive_profile(net, Matrix::Ones(4, 2)), InvalidInput);
}

TEST_CASE("network and batch invariants are enforced") {
  CHECK_THROWS_AS(ReluNetwork({}, BiasMode::ZeroBias), InvalidInput);
  CHECK_THROWS_AS(ReluNetwork({LayerParams{Matrix::Ones(2, 3), Vector::Zero(2)}}, BiasMode::ZeroBias), InvalidInput);
  CHECK_THROWS_AS(ReluNetwork({LayerParams{Matrix::Ones(2, 2), Vector::Ones(2)}}, BiasMode::ZeroBias), InvalidInput);
  CHECK_THROWS_AS(ReluNetwork({LayerParams{Matrix::Ones(2, 2), Vector::Zero(2)}, LayerParams{Matrix::Ones(3, 3), Vector::Zero(3)}},
                              BiasMode::FreeBias),
                  InvalidInput);
  Matrix bad = Matrix::Ones(2, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(DataBatch{bad}, InvalidInput);
  CHECK_THROWS_AS(DataBatch{Matrix(0, 2)}, InvalidInput);
  CHECK(random_net(3, 4, BiasMode::FreeBias, 9).parameter_count() == 4 * (9 + 3));
}

TEST_CASE("classify_event") {
  CHECK(classify_event(10, 10) == LayerEvent::AllSurvive);
  CHECK(classify_event(10, 3) == LayerEvent::PartialDeath);
  CHECK(classify_event(10, 0) == LayerEvent::TotalDeath);
  CHECK(classify_event(1, 1) == LayerEvent::AllSurvive);
  CHECK(to_string(LayerEvent::PartialDeath) == "E2");
  CHECK_THROWS_AS(classify_event(0, 0), InvalidInput);
  CHECK_THROWS_AS(classify_event(3, 4), InvalidInput);
}

TEST_CASE("trace invariants hold on random networks") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 1 + static_cast<int>(seed % 5);
    const int k = 1 + static_cast<int>(seed % 7);
    const BiasMode mode = seed % 2 ? BiasMode::FreeBias : BiasMode::ZeroBias;
    const ReluNetwork net = random_net(n, k, mode, seed);
    const DataBatch batch = random_batch(50, n, seed + 1000);
    const ForwardTrace t = forward_trace(net, batch);
    REQUIRE(t.depth() == k);
    for (int j = 0; j < k; ++j) {
      // ReLU is idempotent and equals max(pre, 0).
      CHECK(t.post_activations[j] == t.pre_activations[j].cwiseMax(0.0));
      CHECK(t.post_activations[j].cwiseMax(0.0) == t.post_activations[j]);
      for (int m = 0; m < batch.size(); ++m) {
        bool dead_somewhere = false;
        for (int jj = 0; jj <= j; ++jj) dead_somewhere = dead_somewhere || killed(t.pre_activations[jj].row(m));
        CHECK(t.alive_mask[j][m] == (dead_somewhere ? 0 : 1));
        if (j > 0) CHECK(t.alive_mask[j][m] <= t.alive_mask[j - 1][m]);
      }
    }
    const auto counts = alive_counts(t);
    for (int j = 1; j < k; ++j) CHECK(counts[j] <= counts[j - 1]);
    // The streaming pass agrees with the full trace.
    CHECK(alive_profile(net, batch.points()) == counts);
  }
}

TEST_CASE("zero-bias dead sets are cones") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ReluNetwork net = random_net(3, 6, BiasMode::ZeroBias, seed);
    const DataBatch batch = random_batch(64, 3, seed + 77);
    for (double c : {0.001, 0.5, 3.0, 1e6}) {
      const ForwardTrace a = forward_trace(net, batch);
      const ForwardTrace b = forward_trace(net, DataBatch(batch.points() * c));
      CHECK(a.alive_mask == b.alive_mask);
    }
  }
}

TEST_CASE("negating a layer negates its pre-activations") {
  const ReluNetwork net = random_net(4, 3, BiasMode::FreeBias, 5);
  const DataBatch batch = random_batch(20, 4, 6);
  const ForwardTrace base = forward_trace(net, batch);
  for (int j = 0; j < 3; ++j) {
    std::vector<LayerParams> layers = net.layers();
    layers[j].weights = -layers[j].weights;
    layers[j].bias = -layers[j].bias;
    const ForwardTrace flipped = forward_trace(ReluNetwork(layers, BiasMode::FreeBias), batch);
    CHECK(flipped.pre_activations[j] == -base.pre_activations[j]);
  }
}
