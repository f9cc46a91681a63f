#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace qmet;

TEST_CASE("Bell projectors form a complete orthogonal family") {
  const auto basis = bell_basis();
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(basis[i].norm() - 1.0) < 1e-14);
    for (int j = i + 1; j < 4; ++j)
      CHECK(std::abs(basis[i].dot(basis[j])) < 1e-14);
  }

  const auto povm = bell_povm();
  Mat sum = Mat::Zero(4, 4);
  for (const auto& e : povm.elements()) sum += e;
  CHECK(max_abs(sum - Mat::Identity(4, 4)) < 1e-14);

  // |00> has overlap 1/2 with the first (phi+) projector
  Vec e00 = Vec::Zero(4);
  e00(0) = 1.0;
  const double w = (e00.adjoint() * povm.elements()[0] * e00).value().real();
  CHECK(w == Catch::Approx(0.5).margin(1e-14));
}

TEST_CASE("bell_probs closed forms") {
  const auto zero = bell_probs({0.0, 0.0});
  CHECK(zero[0] == Catch::Approx(0.5).margin(1e-14));
  CHECK(zero[1] == Catch::Approx(0.0).margin(1e-14));
  CHECK(zero[2] == Catch::Approx(0.5).margin(1e-14));
  CHECK(zero[3] == Catch::Approx(0.0).margin(1e-14));

  const auto op = bell_probs({M_PI / 4.0, 0.1});
  CHECK(op[0] == Catch::Approx(0.25).margin(1e-14));
  CHECK(op[1] == Catch::Approx(0.25).margin(1e-14));
  CHECK(op[2] == Catch::Approx(0.25 * (1.0 + std::exp(-0.02))).margin(1e-14));

  const auto mixed = bell_probs({0.9, 10.0});
  for (double p : mixed) CHECK(p == Catch::Approx(0.25).margin(1e-14));
}

TEST_CASE("bell_probs equals the trace formula on random points") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> uphi(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> udel(0.0, 2.0);
  const auto povm = bell_povm();
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const ParamPoint p(uphi(rng), udel(rng));
    const Mat rho2 = two_copy(diffused_qubit(QubitPrep(M_PI / 2.0), p)).mat();
    const auto probs = bell_probs(p);
    for (int k = 0; k < 4; ++k)
      worst = std::max(worst,
                       std::abs(probs[k] - (rho2 * povm.elements()[k]).trace().real()));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("bell_probs symmetry phi -> pi/2 - phi swaps the first two ports") {
  for (double phi : {0.1, 0.5, 1.2})
    for (double delta : {0.05, 0.4}) {
      const auto a = bell_probs({phi, delta});
      const auto b = bell_probs({M_PI / 2.0 - phi, delta});
      CHECK(a[0] == Catch::Approx(b[1]).margin(1e-14));
      CHECK(a[1] == Catch::Approx(b[0]).margin(1e-14));
      CHECK(a[2] == Catch::Approx(b[2]).margin(1e-14));
      CHECK(a[3] == Catch::Approx(b[3]).margin(1e-14));
    }
}

TEST_CASE("build_walk_unitary basic cases") {
  WalkSpec empty;
  empty.min_pos = -1;
  empty.max_pos = 1;
  CHECK(max_abs(build_walk_unitary(empty) - Mat::Identity(empty.dim(), empty.dim())) <
        1e-14);

  // identity coins: one step is a pure conditional translation
  WalkSpec shift;
  shift.min_pos = -1;
  shift.max_pos = 1;
  WalkStep s;
  for (int x = -1; x <= 1; ++x) s.coins[x] = Mat::Identity(2, 2);
  shift.steps.push_back(s);
  const Mat u = build_walk_unitary(shift);
  // coin 0 moves right, coin 1 moves left; entries are 0/1
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j)
      CHECK((std::abs(u(i, j)) < 1e-14 || std::abs(u(i, j) - 1.0) < 1e-14));
  CHECK(std::abs(u(shift.flat(1, 0), shift.flat(0, 0)) - 1.0) < 1e-14);
  CHECK(std::abs(u(shift.flat(-1, 1), shift.flat(0, 1)) - 1.0) < 1e-14);
}

TEST_CASE("build_walk_unitary stays unitary for random coins") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    WalkSpec spec;
    spec.min_pos = -2;
    spec.max_pos = 2;
    for (int step = 0; step < 3; ++step) {
      WalkStep s;
      for (int x = -2; x <= 2; ++x) s.coins[x] = testutil::random_unitary(2, rng);
      spec.steps.push_back(s);
    }
    const Mat u = build_walk_unitary(spec);
    CHECK(max_abs(u.adjoint() * u - Mat::Identity(u.rows(), u.cols())) < 1e-12);
  }

  WalkSpec bad;
  bad.min_pos = 0;
  bad.max_pos = 1;
  WalkStep s;
  Mat notU(2, 2);
  notU << 1, 1, 0, 1;
  s.coins[0] = notU;
  bad.steps.push_back(s);
  CHECK_THROWS_AS(build_walk_unitary(bad), NonUnitaryCoinError);
}

TEST_CASE("three-step walk coin schedule matches the construction") {
  const WalkSpec spec = bell_walk_spec();
  REQUIRE(spec.steps.size() == 3);
  Mat z(2, 2), x(2, 2), h(2, 2);
  z << 1, 0, 0, -1;
  x << 0, 1, 1, 0;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  CHECK(max_abs(spec.steps[0].coins.at(1) - z) < 1e-14);
  CHECK(max_abs(spec.steps[0].coins.at(-1) - x) < 1e-14);
  CHECK(max_abs(spec.steps[1].coins.at(0) - z) < 1e-14);
  CHECK(max_abs(spec.steps[1].coins.at(2) - x) < 1e-14);
  CHECK(max_abs(spec.steps[1].coins.at(-2) - x) < 1e-14);
  CHECK(max_abs(spec.steps[2].coins.at(1) - h) < 1e-14);
  CHECK(max_abs(spec.steps[2].coins.at(-1) - h) < 1e-14);
}

TEST_CASE("after two steps the walker occupies positions {+-1, +-3}") {
  WalkSpec twoSteps = bell_walk_spec();
  twoSteps.steps.pop_back();
  const Mat u = build_walk_unitary(twoSteps);
  const Mat v = walk_embedding(twoSteps);
  const Mat out = u * v;  // columns: evolved two-qubit basis states
  for (int col = 0; col < 4; ++col)
    for (int x = twoSteps.min_pos; x <= twoSteps.max_pos; ++x)
      for (int coin = 0; coin < 2; ++coin)
        if (x != 1 && x != -1 && x != 3 && x != -3)
          CHECK(std::abs(out(twoSteps.flat(x, coin), col)) < 1e-14);
}

TEST_CASE("compiled walk implements the Bell measurement deterministically") {
  const auto port = walk_to_povm(bell_walk_spec(), default_readout_ports());
  CHECK(port.deterministic);
  CHECK(port.residual_norm < 1e-10);
  CHECK(port.bell_equivalent);
  REQUIRE(port.bell_permutation.size() == 4);

  const auto [eq, perm] = povm_equivalent(Povm(port.elements), bell_povm(), 1e-10);
  CHECK(eq);
  CHECK(perm == port.bell_permutation);
}

TEST_CASE("removing the final interference coins breaks Bell equivalence") {
  WalkSpec spec = bell_walk_spec();
  spec.steps.pop_back();
  // replace step 3 with identity coins: positions still land on the ports,
  // but no interference happens
  WalkStep s;
  s.coins[1] = Mat::Identity(2, 2);
  s.coins[-1] = Mat::Identity(2, 2);
  spec.steps.push_back(s);
  const auto port = walk_to_povm(spec, default_readout_ports());
  CHECK_FALSE(port.bell_equivalent);
}

TEST_CASE("identity walk reads out the computational basis") {
  WalkSpec spec;
  spec.min_pos = -1;
  spec.max_pos = 1;
  spec.initial_positions = {1, -1};
  const std::vector<Port> ports = {{1, 0}, {1, 1}, {-1, 0}, {-1, 1}};
  const auto out = walk_to_povm(spec, ports);
  CHECK(out.deterministic);
  for (int k = 0; k < 4; ++k) {
    Mat proj = Mat::Zero(4, 4);
    proj(k, k) = 1.0;
    CHECK(max_abs(out.elements[k] - proj) < 1e-14);
  }
}

TEST_CASE("povm_equivalent detects permutations and mismatches") {
  const auto bell = bell_povm();
  const auto [same, identity] = povm_equivalent(bell, bell, 1e-10);
  CHECK(same);
  CHECK(identity == std::vector<int>({0, 1, 2, 3}));

  auto rev = bell.elements();
  std::reverse(rev.begin(), rev.end());
  const auto [eq, perm] = povm_equivalent(Povm(rev), bell, 1e-10);
  CHECK(eq);
  CHECK(perm == std::vector<int>({3, 2, 1, 0}));

  std::vector<Mat> comp;
  for (int k = 0; k < 4; ++k) {
    Mat m = Mat::Zero(4, 4);
    m(k, k) = 1.0;
    comp.push_back(m);
  }
  CHECK_FALSE(povm_equivalent(Povm(comp), bell, 1e-10).first);
}

TEST_CASE("walk specs round-trip through JSON") {
  const WalkSpec spec = bell_walk_spec();
  const auto j = walk_spec_to_json(spec);
  const WalkSpec back = walk_spec_from_json(j);
  CHECK(back.min_pos == spec.min_pos);
  CHECK(back.max_pos == spec.max_pos);
  CHECK(back.initial_positions == spec.initial_positions);
  REQUIRE(back.steps.size() == spec.steps.size());
  CHECK(max_abs(build_walk_unitary(back) - build_walk_unitary(spec)) < 1e-14);
}
