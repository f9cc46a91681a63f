#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmet/encoding.hpp"
#include "qmet/linalg.hpp"

namespace qmet {

/// Bell states in the ordered basis {|00>, |01>, |10>, |11>}:
/// Phi+, Phi-, Psi+, Psi-.
inline std::array<Vec, 4> bell_basis() {
  const double r = 1.0 / std::sqrt(2.0);
  std::array<Vec, 4> states;
  for (auto& s : states) s = Vec::Zero(4);
  states[0](0) = r;
  states[0](3) = r;
  states[1](0) = r;
  states[1](3) = -r;
  states[2](1) = r;
  states[2](2) = r;
  states[3](1) = r;
  states[3](2) = -r;
  return states;
}

inline Povm bell_povm() {
  std::vector<Mat> elems;
  for (const auto& s : bell_basis()) elems.push_back(s * s.adjoint());
  return Povm(std::move(elems));
}

/// Closed-form Bell outcome probabilities on the two-copy equatorial state:
/// p1 = (1 + e^{-2d^2} cos 2phi)/4, p2 = (1 - e^{-2d^2} cos 2phi)/4,
/// p3 = (1 + e^{-2d^2})/4,          p4 = (1 - e^{-2d^2})/4.
inline std::array<double, 4> bell_probs(const ParamPoint& p) {
  const double damp = std::exp(-2.0 * p.delta * p.delta);
  const double c = std::cos(2.0 * p.phi);
  return {0.25 * (1.0 + damp * c), 0.25 * (1.0 - damp * c),
          0.25 * (1.0 + damp), 0.25 * (1.0 - damp)};
}

/// Discrete-time walk on a contiguous position range with per-step,
/// position-dependent coins. Flat state index = (x - min position) * 2 + coin,
/// positions ascending; the translation moves coin 0 to x+1 and coin 1 to
/// x-1 (cyclic at the range edges, so the full-space operator stays unitary).
struct WalkStep {
  std::map<int, Mat2c> coins;  // positions not listed get the identity coin
  bool translate = true;       // apply the conditional translation after the coins
};

struct WalkSpec {
  int min_pos = 0;
  int max_pos = 0;
  std::vector<WalkStep> steps;
  std::vector<int> initial_positions;  // order defines the path-qubit basis

  int num_positions() const { return max_pos - min_pos + 1; }
  int dim() const { return 2 * num_positions(); }
  int flat(int x, int coin) const { return 2 * (x - min_pos) + coin; }
};

/// The walk unitary: for every step, coins then (unless the step opts out)
/// the conditional translation.
inline Mat build_walk_unitary(const WalkSpec& spec) {
  const int d = spec.dim();
  const int n = spec.num_positions();
  Mat u = Mat::Identity(d, d);
  Mat t = Mat::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    t(2 * ((i + 1) % n), 2 * i) = 1.0;          // coin 0: x -> x+1
    t(2 * ((i - 1 + n) % n) + 1, 2 * i + 1) = 1.0;  // coin 1: x -> x-1
  }
  for (std::size_t s = 0; s < spec.steps.size(); ++s) {
    Mat c = Mat::Identity(d, d);
    for (const auto& [x, coin] : spec.steps[s].coins) {
      if (x < spec.min_pos || x > spec.max_pos)
        throw std::invalid_argument("build_walk_unitary: coin outside range");
      if (max_abs(coin.adjoint() * coin - Mat2c::Identity()) > 1e-12)
        throw NonUnitaryCoinError("build_walk_unitary: non-unitary coin");
      const int base = spec.flat(x, 0);
      c.block(base, base, 2, 2) = coin;
    }
    u = (spec.steps[s].translate ? Mat(t * c) : c) * u;
  }
  return u;
}

/// The three-step walk that realizes the deterministic Bell measurement:
/// step 1 applies Z at x=1 and X at x=-1; step 2 applies Z at x=0 and X at
/// x=+-2; step 3 applies Hadamards at x=+-1 with no further translation.
/// Input: path qubit on positions {+1, -1} (up/down), coin = second qubit.
inline WalkSpec bell_walk_spec() {
  WalkSpec spec;
  spec.min_pos = -3;
  spec.max_pos = 3;
  spec.initial_positions = {1, -1};
  Mat2c z, x, h;
  z << 1, 0, 0, -1;
  x << 0, 1, 1, 0;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  WalkStep s1, s2, s3;
  s1.coins = {{1, z}, {-1, x}};
  s2.coins = {{0, z}, {2, x}, {-2, x}};
  s3.coins = {{1, h}, {-1, h}};
  s3.translate = false;
  spec.steps = {s1, s2, s3};
  return spec;
}

struct Port {
  int position = 0;
  int coin = 0;
};

/// POVM induced on the 4-dim input subspace by position/coin readout after
/// the walk. `residual` collects amplitude outside the listed ports; the
/// measurement is deterministic when its norm stays below 1e-10.
struct PortPovm {
  std::vector<Mat> elements;  // one per port, on the input subspace
  std::vector<Port> ports;
  Mat residual;
  double residual_norm = 0.0;
  bool deterministic = false;
  std::vector<int> bell_permutation;  // port index -> Bell index, if matched
  bool bell_equivalent = false;
};

/// Isometry from the two-qubit input basis {|00>,|01>,|10>,|11>} into the
/// walk space: qubit 1 selects the initial position, qubit 2 the coin.
inline Mat walk_embedding(const WalkSpec& spec) {
  if (spec.initial_positions.size() != 2)
    throw std::invalid_argument("walk_embedding: need exactly 2 initial positions");
  Mat v = Mat::Zero(spec.dim(), 4);
  for (int q1 = 0; q1 < 2; ++q1)
    for (int q2 = 0; q2 < 2; ++q2)
      v(spec.flat(spec.initial_positions[q1], q2), 2 * q1 + q2) = 1.0;
  return v;
}

/// Searches outcome permutations for an entrywise match between two POVMs.
inline std::pair<bool, std::vector<int>> povm_equivalent(const Povm& a,
                                                         const Povm& b,
                                                         double tol = 1e-9) {
  if (a.size() != b.size() || a.dim() != b.dim()) return {false, {}};
  std::vector<int> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i)
      ok = max_abs(a.elements()[i] - b.elements()[perm[i]]) < tol;
    if (ok) return {true, perm};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {false, {}};
}

inline PortPovm walk_to_povm(const WalkSpec& spec, const std::vector<Port>& readout) {
  const Mat u = build_walk_unitary(spec);
  const Mat v = walk_embedding(spec);
  const Mat uv = u * v;  // input basis -> final walk state
  PortPovm out;
  out.ports = readout;
  Mat sum = Mat::Zero(4, 4);
  for (const auto& port : readout) {
    const int idx = spec.flat(port.position, port.coin);
    Vec row = uv.row(idx).adjoint();
    Mat e = row * row.adjoint();  // V^dag U^dag |port><port| U V
    out.elements.push_back(e);
    sum += e;
  }
  out.residual = Mat::Identity(4, 4) - sum;
  out.residual_norm = max_abs(out.residual);
  out.deterministic = out.residual_norm < 1e-10;
  if (out.deterministic && out.elements.size() == 4) {
    auto [ok, perm] = povm_equivalent(Povm(out.elements, 1e-9), bell_povm(), 1e-9);
    out.bell_equivalent = ok;
    out.bell_permutation = perm;
  }
  return out;
}

inline std::vector<Port> default_readout_ports() {
  return {{1, 0}, {1, 1}, {-1, 0}, {-1, 1}};
}

// --- JSON schema for walk specs: positions, steps as arrays of
// {x, matrix rows}, complex entries as [re, im]. ---

inline nlohmann::json complex_to_json(const Complex& c) {
  return nlohmann::json::array({c.real(), c.imag()});
}

inline nlohmann::json matrix_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

inline Mat matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.size();
  const auto cols = j.at(0).size();
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k)
      m(i, k) = Complex(j.at(i).at(k).at(0).get<double>(),
                        j.at(i).at(k).at(1).get<double>());
  return m;
}

inline nlohmann::json walk_spec_to_json(const WalkSpec& spec) {
  nlohmann::json j;
  nlohmann::json positions = nlohmann::json::array();
  for (int x = spec.min_pos; x <= spec.max_pos; ++x) positions.push_back(x);
  j["positions"] = positions;
  j["initial_positions"] = spec.initial_positions;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : spec.steps) {
    nlohmann::json coins = nlohmann::json::array();
    for (const auto& [x, c] : s.coins)
      coins.push_back({{"x", x}, {"matrix", matrix_to_json(c)}});
    steps.push_back({{"coins", coins}, {"translate", s.translate}});
  }
  j["steps"] = steps;
  return j;
}

inline WalkSpec walk_spec_from_json(const nlohmann::json& j) {
  WalkSpec spec;
  const auto& positions = j.at("positions");
  spec.min_pos = positions.front().get<int>();
  spec.max_pos = positions.back().get<int>();
  spec.initial_positions = j.at("initial_positions").get<std::vector<int>>();
  for (const auto& s : j.at("steps")) {
    WalkStep step;
    for (const auto& c : s.at("coins"))
      step.coins[c.at("x").get<int>()] = matrix_from_json(c.at("matrix"));
    step.translate = s.value("translate", true);
    spec.steps.push_back(std::move(step));
  }
  return spec;
}

}  // namespace qmet
