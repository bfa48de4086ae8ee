#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qpn/engine.hpp"
#include "qpn/net.hpp"

namespace qpn {

struct Assignment {
  std::string place;
  std::string label;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Places standing for eigenstates; amplitude C_i = sqrt(k) * M(p_i).
struct QuantumMapping {
  double k = 1.0;
  std::vector<Assignment> assignments;

  /// Throws InvalidParams on k <= 0 or repeated places/labels.
  void validate() const;
  /// validate() plus UnknownPlace for places missing from `net`.
  void validate(const PetriNet& net) const;

  friend bool operator==(const QuantumMapping&, const QuantumMapping&) = default;
};

struct LabeledValue {
  std::string label;
  double value = 0.0;
};

using StateVector = std::vector<LabeledValue>;

struct ProbabilityReport {
  std::vector<LabeledValue> entries;
  double total = 0.0;

  /// Throws InvalidParams for a label not in the report.
  double operator[](const std::string& label) const;
};

StateVector amplitudes(const QuantumMapping& q, const PetriNet& net, const Marking& m);

/// k * M(p_i)^2 per assignment; the total is reported, never normalized.
ProbabilityReport probabilities(const QuantumMapping& q, const PetriNet& net, const Marking& m);

/// Entrywise sum. Throws DimensionMismatch.
Marking superpose(const Marking& a, const Marking& b);

struct Outcome {
  PlaceId place;
  std::string label;
};

/// Samples one assigned place with probability k * M(p)^2, divided by the
/// total when `normalize` is set. Throws AllZero, or NotNormalized when
/// `normalize` is false and the total is more than 1e-6 away from 1.
Outcome measure(const QuantumMapping& q, const PetriNet& net, const Marking& m, Rng& rng,
                bool normalize);

}  // namespace qpn
