#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qpn/net.hpp"

namespace qpn::oracle {

/// Detector outcome probabilities of one protocol run.
struct DetectionReport {
  double d1 = 0.0;
  double d2 = 0.0;
  double absorbed = 0.0;   // Bob-side losses (blocking mode)
  double discarded = 0.0;  // D3-side losses (passing mode)

  double total() const noexcept { return d1 + d2 + absorbed + discarded; }
};

struct ZenoProbabilities {
  double p10 = 0.0;
  double p01 = 0.0;
};

/// N weak rotations by pi/(2N): |10> survives with cos^{2N}, |01> gets
/// cos^{2(N-1)} sin^2. Requires N >= 1.
ZenoProbabilities zeno_oracle(std::int64_t n);

/// Passing mode: D1 = cos^{2M}(pi/2M), the rest lost to D3. Independent of N.
DetectionReport passing_oracle(std::int64_t n, std::int64_t m);

/// Blocking mode recursion. With a = cos^N(pi/2N) and theta = pi/2M, starting
/// from (L, R) = (1, 0), each of the M outer cycles first absorbs (1 - a^2) R^2
/// at Bob and then rotates:
///
///   L' = cos(theta) L - sin(theta) a R
///   R' = sin(theta) L + cos(theta) a R
///
/// D1 = L^2, D2 = R^2, absorbed = the accumulated loss. Requires N, M >= 2.
DetectionReport blocking_oracle(std::int64_t n, std::int64_t m);

struct TransitionProbability {
  TransitionId transition;
  double probability = 0.0;
};

/// Born distribution over the single conflict group enabled at the initial
/// marking. Throws MultipleGroups or ZeroWeightGroup.
std::vector<TransitionProbability> exact_measurement_dist(const PetriNet& net);

struct ReachSet {
  std::vector<Marking> markings;  // BFS order, initial marking first
  std::vector<std::size_t> quiescent;
};

/// Breadth-first closure of an integer net (Counter places, constant integer
/// weights), fired with plain integer vector arithmetic. Throws NotIntegerNet
/// or StateExplosion once more than `max_states` markings are found.
ReachSet bfs_reach(const PetriNet& net, std::size_t max_states);

/// NotIntegerNet unless every place is a Counter and every Consume/Guard/
/// Deposit weight is a constant non-negative integer.
void require_integer_net(const PetriNet& net);

}  // namespace qpn::oracle
