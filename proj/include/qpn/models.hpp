#pragma once

#include <cstdint>
#include <string>

#include "qpn/net.hpp"
#include "qpn/oracle.hpp"
#include "qpn/quantum.hpp"

namespace qpn::models {

struct ProtocolParams {
  std::int64_t n = 2;  // inner cycles
  std::int64_t m = 2;  // outer cycles
  double k = 1.0;
};

struct ModelNet {
  PetriNet net;
  QuantumMapping mapping;
};

inline constexpr const char* kLabelD1 = "|100>";
inline constexpr const char* kLabelD2 = "|010>";
inline constexpr const char* kLabelAbsorbed = "bob";
inline constexpr const char* kLabelDiscarded = "d3";

/// One photon spread evenly over three detector places (p2..p4).
ModelNet measurement_net();

/// Bell-triplet net: p1 feeds t1/t2, p2 feeds t3/t4; t1 and t3 deposit into
/// p3 and p5, t2 and t4 into p4 and p6.
PetriNet entanglement_net();
/// Labels p3/p5 as the |1>/|0> halves of one branch and p4/p6 of the other.
QuantumMapping entanglement_mapping();

/// N-cycle Zeno interferometer; p11/p12 end as cos^{N-1}(theta) * (cos, sin)
/// with theta = pi/2N. Requires N >= 2.
ModelNet zeno_net(const ProtocolParams& params);

/// Blocking mode: N inner Zeno cycles on the right arm (Bob absorbing), then
/// an outer rotation by pi/2M, repeated M times. D2 = k M(p21)^2.
ModelNet slaz_blocking_net(const ProtocolParams& params);

/// Passing mode: outer rotation, then N inner rotations that carry the right
/// arm into p31, which is discarded at D3; M times. D1 = k M(p2)^2.
ModelNet slaz_passing_net(const ProtocolParams& params);

/// Reads D1/D2/absorbed/discarded from a protocol net's final marking by
/// label; labels the mapping lacks read as 0.
oracle::DetectionReport detection_report(const ModelNet& model, const Marking& final_marking);

enum class Mode { Passing, Blocking };
std::string to_string(Mode mode);

ModelNet slaz_net(Mode mode, const ProtocolParams& params);

}  // namespace qpn::models
