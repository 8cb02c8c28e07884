#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "stepnet/network.hpp"
#include "support/test_oracles.hpp"

using namespace stepnet;

namespace {

// Random dense three-layer network plus the raw matrices for the reference
// evaluator.
struct RandomNet {
  std::vector<std::vector<double>> w1, w2;
  std::vector<double> b1, b2, w3;
  double b3;
  ReluNetwork net;
};

RandomNet make_random_net(std::size_t d, std::size_t n1, std::size_t n2,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  auto mat = [&](std::size_t r, std::size_t c) {
    std::vector<std::vector<double>> m(r, std::vector<double>(c));
    for (auto& row : m)
      for (auto& v : row) v = unif(rng);
    return m;
  };
  auto vec = [&](std::size_t n) {
    std::vector<double> v(n);
    for (auto& t : v) t = unif(rng);
    return v;
  };
  auto flat = [](const std::vector<std::vector<double>>& m) {
    std::vector<double> f;
    for (const auto& row : m) f.insert(f.end(), row.begin(), row.end());
    return f;
  };

  auto w1 = mat(n1, d);
  auto w2 = mat(n2, n1);
  auto b1 = vec(n1);
  auto b2 = vec(n2);
  auto w3 = vec(n2);
  double b3 = unif(rng);
  ReluNetwork net(AffineLayer::dense(n1, d, flat(w1), b1),
                  AffineLayer::dense(n2, n1, flat(w2), b2),
                  AffineLayer::dense(1, n2, w3, {b3}));
  return RandomNet{std::move(w1), std::move(w2), std::move(b1),
                   std::move(b2), std::move(w3), b3, std::move(net)};
}

}  // namespace

TEST_CASE("dense affine layers compute W x - b") {
  // y0 = 1*2 + 2*3 - 1 = 7 ; y1 = -1*2 + 0.5*3 - (-2) = 1.5
  auto layer = AffineLayer::dense(2, 2, {1.0, 2.0, -1.0, 0.5}, {1.0, -2.0});
  double x[] = {2.0, 3.0};
  double y[2];
  layer.apply(x, y);
  CHECK(y[0] == doctest::Approx(7.0));
  CHECK(y[1] == doctest::Approx(1.5));
  CHECK(layer.nonzeros() == 4);
  CHECK(layer.row_dense(1) == std::vector<double>{-1.0, 0.5});

  CHECK_THROWS_AS(AffineLayer::dense(2, 2, {1.0}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(AffineLayer::dense(2, 2, {1, 2, 3, 4}, {0.0}), std::invalid_argument);
  double bad[] = {1.0};
  CHECK_THROWS_AS(layer.apply(bad, y), std::invalid_argument);
}

TEST_CASE("sparse layers match their dense equivalent") {
  // 3x4 with nonzeros (0,1)=2, (1,0)=-1, (1,3)=4, (2,2)=0.5
  auto sp = AffineLayer::sparse(3, 4, {0, 1, 3, 4}, {1, 0, 3, 2},
                                {2.0, -1.0, 4.0, 0.5}, {0.1, 0.2, 0.3});
  auto dn = AffineLayer::dense(3, 4,
                               {0, 2, 0, 0, /**/ -1, 0, 0, 4, /**/ 0, 0, 0.5, 0},
                               {0.1, 0.2, 0.3});
  CHECK(sp.storage() == Storage::Sparse);
  CHECK(sp.nonzeros() == 4);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double x[4], ys[3], yd[3];
    for (double& v : x) v = unif(rng);
    sp.apply(x, ys);
    dn.apply(x, yd);
    for (int r = 0; r < 3; ++r) CHECK(ys[r] == doctest::Approx(yd[r]).epsilon(1e-15));
  }
  CHECK(sp.row_dense(1) == std::vector<double>{-1.0, 0.0, 0.0, 4.0});
  CHECK(sp.to_dense() == dn.dense_weights());
  CHECK_THROWS_AS(sp.to_dense(4), std::length_error);

  CHECK_THROWS_AS(AffineLayer::sparse(2, 2, {0, 1}, {0}, {1.0}, {0, 0}),
                  std::invalid_argument);  // offsets too short
  CHECK_THROWS_AS(AffineLayer::sparse(2, 2, {0, 1, 1}, {5}, {1.0}, {0, 0}),
                  std::invalid_argument);  // column out of range
}

TEST_CASE("auto storage re-encodes very sparse rows") {
  std::vector<double> w(10 * 2000, 0.0);
  for (int r = 0; r < 10; ++r) w[static_cast<std::size_t>(r) * 2000 + r] = 1.0;
  auto sparse = AffineLayer::auto_storage(10, 2000, w, std::vector<double>(10, 0.0));
  CHECK(sparse.storage() == Storage::Sparse);
  CHECK(sparse.nonzeros() == 10);

  auto dense = AffineLayer::auto_storage(2, 2, {1, 0, 0, 1}, {0, 0});
  CHECK(dense.storage() == Storage::Dense);
}

TEST_CASE("network evaluation matches a from-scratch evaluator") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto r = make_random_net(3, 5, 4, seed);
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> x{unif(rng), unif(rng), unif(rng)};
      const double want =
          oracle::eval_three_layer(r.w1, r.b1, r.w2, r.b2, r.w3, r.b3, x);
      CHECK(r.net.eval(x) == doctest::Approx(want).epsilon(1e-13));
    }
  }

  auto r = make_random_net(2, 3, 2, 9);
  CHECK(r.net.eval2(Vec2{0.3, -0.4}) == r.net.eval(std::vector<double>{0.3, -0.4}));
  CHECK(r.net.shape_string() == "2–3–2–1");
  CHECK(r.net.input_dim() == 2);
  CHECK(r.net.width1() == 3);
  CHECK(r.net.width2() == 2);

  CHECK_THROWS_AS(ReluNetwork(AffineLayer::dense(2, 2, {1, 0, 0, 1}, {0, 0}),
                              AffineLayer::dense(1, 3, {1, 1, 1}, {0}),
                              AffineLayer::dense(1, 1, {1}, {0})),
                  std::invalid_argument);
}

TEST_CASE("batch evaluation is exact and thread-stable") {
  auto r = make_random_net(4, 6, 3, 21);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  const std::size_t count = 1037;  // deliberately not a multiple of any chunk
  std::vector<double> xs(count * 4);
  for (double& v : xs) v = unif(rng);

  auto got1 = r.net.eval_batch(xs, count, 1);
  REQUIRE(got1.size() == count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> x(xs.begin() + static_cast<long>(4 * i),
                          xs.begin() + static_cast<long>(4 * i + 4));
    CHECK(got1[i] == r.net.eval(x));  // bit-for-bit
  }
  for (unsigned threads : {2u, 3u, 8u}) {
    auto got = r.net.eval_batch(xs, count, threads);
    CHECK(got == got1);  // identical bits regardless of thread count
  }

  CHECK_THROWS_AS(r.net.eval_batch(xs, count + 1, 1), std::invalid_argument);
}

TEST_CASE("affine combinations realise weighted sums exactly") {
  auto f = make_random_net(2, 4, 3, 31);
  auto g = make_random_net(2, 2, 5, 32);
  const double cf = 2.5, cg = -1.25, constant = 0.375;
  auto combined = affine_combine({{cf, &f.net}, {cg, &g.net}}, constant);
  CHECK(combined.input_dim() == 2);
  CHECK(combined.width1() == 6);
  CHECK(combined.width2() == 8);

  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x{unif(rng), unif(rng)};
    const double want = constant + cf * f.net.eval(x) + cg * g.net.eval(x);
    CHECK(combined.eval(x) == doctest::Approx(want).epsilon(1e-12));
  }

  auto h = make_random_net(3, 2, 2, 34);
  CHECK_THROWS_AS(affine_combine({{1.0, &f.net}, {1.0, &h.net}}, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(affine_combine({}, 0.0), std::invalid_argument);
}

TEST_CASE("first-layer normalisation preserves the function") {
  auto r = make_random_net(3, 5, 4, 41);
  auto normalized = normalize_first_layer(r.net);
  for (std::size_t i = 0; i < normalized.width1(); ++i) {
    auto row = normalized.layer1().row_dense(i);
    double nrm = 0.0;
    for (double v : row) nrm += v * v;
    CHECK(std::sqrt(nrm) == doctest::Approx(1.0).epsilon(1e-14));
  }
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x{unif(rng), unif(rng), unif(rng)};
    CHECK(normalized.eval(x) == doctest::Approx(r.net.eval(x)).epsilon(1e-12));
  }

  auto zero_row = ReluNetwork(AffineLayer::dense(1, 2, {0.0, 0.0}, {0.0}),
                              AffineLayer::dense(1, 1, {1.0}, {0.0}),
                              AffineLayer::dense(1, 1, {1.0}, {0.0}));
  CHECK_THROWS_AS(normalize_first_layer(zero_row), std::invalid_argument);
}

TEST_CASE("first-layer break lines carry the right hyperplanes") {
  auto net = ReluNetwork(AffineLayer::dense(2, 2, {2.0, 0.0, 0.0, -4.0}, {1.0, 2.0}),
                         AffineLayer::dense(1, 2, {1.0, 1.0}, {0.0}),
                         AffineLayer::dense(1, 1, {1.0}, {0.0}));
  auto h0 = first_layer_breakline(net, 0);  // 2x = 1  ->  x = 0.5
  CHECK(h0.normal()[0] == doctest::Approx(1.0));
  CHECK(h0.offset() == doctest::Approx(0.5));
  auto h1 = first_layer_breakline(net, 1);  // -4y = 2  ->  y = -0.5
  CHECK(h1.normal()[1] == doctest::Approx(-1.0));
  CHECK(h1.offset() == doctest::Approx(0.5));
  CHECK(first_layer_breaklines(net).size() == 2);
  CHECK_THROWS_AS(first_layer_breakline(net, 2), std::out_of_range);
}

TEST_CASE("slicing pins coordinates without changing values") {
  auto r = make_random_net(5, 7, 4, 51);
  const std::vector<std::size_t> fixed{1, 3};
  const std::vector<double> values{0.37, -1.2};
  auto planar = slice_network(r.net, fixed, values);
  CHECK(planar.input_dim() == 3);

  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> free{unif(rng), unif(rng), unif(rng)};
    std::vector<double> full{free[0], values[0], free[1], values[1], free[2]};
    CHECK(planar.eval(free) == doctest::Approx(r.net.eval(full)).epsilon(1e-12));
  }

  // A unit that depends only on pinned coordinates folds into the bias.
  auto net = ReluNetwork(
      AffineLayer::dense(2, 2, {1.0, 0.0, 0.0, 1.0}, {0.0, -0.25}),
      AffineLayer::dense(1, 2, {1.0, 2.0}, {0.0}),
      AffineLayer::dense(1, 1, {1.0}, {0.0}));
  auto folded = slice_network(net, {1}, {0.5});
  CHECK(folded.width1() == 1);
  for (double x : {-1.0, 0.0, 0.3, 2.0}) {
    std::vector<double> full{x, 0.5};
    std::vector<double> part{x};
    CHECK(folded.eval(part) == doctest::Approx(net.eval(full)).epsilon(1e-14));
  }

  CHECK_THROWS_AS(slice_network(r.net, {0, 0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(slice_network(r.net, {9}, {1.0}), std::out_of_range);
  CHECK_THROWS_AS(slice_network(r.net, {0, 1, 2, 3, 4},
                                {0.0, 0.0, 0.0, 0.0, 0.0}),
                  std::invalid_argument);
}
