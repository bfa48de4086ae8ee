#include "qpn/quantum.hpp"

#include <cmath>
#include <set>

#include "qpn/error.hpp"

namespace qpn {

void QuantumMapping::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw Error(ErrorCode::InvalidParams, "scale constant k must be positive");
  }
  std::set<std::string> places;
  std::set<std::string> labels;
  for (const auto& a : assignments) {
    if (!places.insert(a.place).second) {
      throw Error(ErrorCode::InvalidParams, "place '" + a.place + "' mapped twice");
    }
    if (!labels.insert(a.label).second) {
      throw Error(ErrorCode::InvalidParams, "label '" + a.label + "' used twice");
    }
  }
}

void QuantumMapping::validate(const PetriNet& net) const {
  validate();
  for (const auto& a : assignments) net.place_id(a.place);
}

double ProbabilityReport::operator[](const std::string& label) const {
  for (const auto& e : entries) {
    if (e.label == label) return e.value;
  }
  throw Error(ErrorCode::InvalidParams, "no label '" + label + "' in report");
}

namespace {

void check_size(const PetriNet& net, const Marking& m) {
  if (m.size() != net.place_count()) {
    throw Error(ErrorCode::DimensionMismatch, "marking does not match net");
  }
}

}  // namespace

StateVector amplitudes(const QuantumMapping& q, const PetriNet& net, const Marking& m) {
  check_size(net, m);
  const double root_k = std::sqrt(q.k);
  StateVector out;
  out.reserve(q.assignments.size());
  for (const auto& a : q.assignments) {
    out.push_back({a.label, root_k * m[net.place_id(a.place)]});
  }
  return out;
}

ProbabilityReport probabilities(const QuantumMapping& q, const PetriNet& net, const Marking& m) {
  check_size(net, m);
  ProbabilityReport out;
  for (const auto& a : q.assignments) {
    const double v = m[net.place_id(a.place)];
    const double p = q.k * v * v;
    out.entries.push_back({a.label, p});
    out.total += p;
  }
  return out;
}

Marking superpose(const Marking& a, const Marking& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cannot superpose markings of sizes " +
                                                  std::to_string(a.size()) + " and " +
                                                  std::to_string(b.size()));
  }
  std::vector<double> sum(a.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = a.at(i) + b.at(i);
  return Marking(std::move(sum));
}

Outcome measure(const QuantumMapping& q, const PetriNet& net, const Marking& m, Rng& rng,
                bool normalize) {
  const ProbabilityReport probs = probabilities(q, net, m);
  if (!(probs.total > 0.0)) throw Error(ErrorCode::AllZero, "every mapped place is empty");
  if (!normalize && std::abs(probs.total - 1.0) > 1e-6) {
    throw Error(ErrorCode::NotNormalized,
                "probabilities sum to " + format_number(probs.total) + ", not 1");
  }
  const double u = rng.uniform() * probs.total;
  double acc = 0.0;
  std::size_t pick = probs.entries.size();
  for (std::size_t i = 0; i < probs.entries.size(); ++i) {
    acc += probs.entries[i].value;
    if (u < acc) {
      pick = i;
      break;
    }
  }
  if (pick == probs.entries.size()) {
    // Rounding edge: last outcome with positive probability.
    for (std::size_t i = probs.entries.size(); i-- > 0;) {
      if (probs.entries[i].value > 0.0) {
        pick = i;
        break;
      }
    }
  }
  const auto& a = q.assignments[pick];
  return Outcome{net.place_id(a.place), a.label};
}

}  // namespace qpn
