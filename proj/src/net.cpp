#include "qpn/net.hpp"

#include <cmath>
#include <unordered_set>

#include "qpn/error.hpp"

namespace qpn {

std::string_view to_string(PlaceKind kind) noexcept {
  return kind == PlaceKind::Counter ? "counter" : "amplitude";
}

std::string_view to_string(ArcKind kind) noexcept {
  switch (kind) {
    case ArcKind::Consume: return "consume";
    case ArcKind::Drain: return "drain";
    case ArcKind::Guard: return "guard";
    case ArcKind::Deposit: return "deposit";
  }
  return "?";
}

std::optional<PlaceId> PetriNet::find_place(std::string_view id) const {
  auto it = place_index_.find(std::string(id));
  if (it == place_index_.end()) return std::nullopt;
  return PlaceId{it->second};
}

std::optional<TransitionId> PetriNet::find_transition(std::string_view id) const {
  auto it = transition_index_.find(std::string(id));
  if (it == transition_index_.end()) return std::nullopt;
  return TransitionId{it->second};
}

PlaceId PetriNet::place_id(std::string_view id) const {
  if (auto p = find_place(id)) return *p;
  throw Error(ErrorCode::UnknownPlace, "unknown place '" + std::string(id) + "'");
}

TransitionId PetriNet::transition_id(std::string_view id) const {
  if (auto t = find_transition(id)) return *t;
  throw Error(ErrorCode::InvalidParams, "unknown transition '" + std::string(id) + "'");
}

Marking PetriNet::initial_marking() const {
  std::vector<double> v;
  v.reserve(places_.size());
  for (const auto& p : places_) v.push_back(p.initial);
  return Marking(std::move(v));
}

bool operator==(const PetriNet& a, const PetriNet& b) {
  return a.name_ == b.name_ && a.places_ == b.places_ && a.transitions_ == b.transitions_ &&
         a.arcs_ == b.arcs_;
}

NetBuilder& NetBuilder::place(std::string id, PlaceKind kind, double initial) {
  places_.push_back(PlaceDecl{std::move(id), kind, initial});
  return *this;
}

NetBuilder& NetBuilder::transition(std::string id, int priority) {
  transitions_.push_back(TransitionDecl{std::move(id), priority});
  return *this;
}

NetBuilder& NetBuilder::input(std::string place, std::string transition, WeightExpr weight,
                              ArcKind kind) {
  arcs_.push_back(ArcDecl{std::move(place), std::move(transition), true, kind, std::move(weight)});
  return *this;
}

NetBuilder& NetBuilder::output(std::string transition, std::string place, WeightExpr weight) {
  arcs_.push_back(ArcDecl{std::move(place), std::move(transition), false, ArcKind::Deposit,
                          std::move(weight)});
  return *this;
}

NetBuilder& NetBuilder::input(std::string place, std::string transition, std::string_view weight,
                              ArcKind kind) {
  return input(std::move(place), std::move(transition), parse_expr(weight), kind);
}

NetBuilder& NetBuilder::output(std::string transition, std::string place,
                               std::string_view weight) {
  return output(std::move(transition), std::move(place), parse_expr(weight));
}

bool NetBuilder::has_place(std::string_view id) const {
  for (const auto& p : places_) {
    if (p.id == id) return true;
  }
  return false;
}

PetriNet NetBuilder::build() const {
  if (places_.empty() && transitions_.empty()) {
    throw Error(ErrorCode::InvalidNet, "net '" + name_ + "' has no places or transitions");
  }

  PetriNet net;
  net.name_ = name_;
  net.places_ = places_;
  net.transitions_ = transitions_;
  net.arcs_ = arcs_;

  for (std::uint32_t i = 0; i < places_.size(); ++i) {
    const PlaceDecl& p = places_[i];
    if (!net.place_index_.emplace(p.id, i).second) {
      throw Error(ErrorCode::DuplicateId, "place '" + p.id + "' declared twice");
    }
    if (!std::isfinite(p.initial)) {
      throw Error(ErrorCode::InvalidInitialMarking, "place '" + p.id + "' has non-finite initial value");
    }
    if (p.kind == PlaceKind::Counter &&
        (p.initial < 0.0 || std::abs(p.initial - std::round(p.initial)) > kIntegerTolerance)) {
      throw Error(ErrorCode::InvalidInitialMarking,
                  "counter place '" + p.id + "' needs a non-negative integer initial value");
    }
  }
  for (std::uint32_t i = 0; i < transitions_.size(); ++i) {
    const TransitionDecl& t = transitions_[i];
    if (net.place_index_.count(t.id) != 0) {
      throw Error(ErrorCode::DuplicateId, "'" + t.id + "' is both a place and a transition");
    }
    if (!net.transition_index_.emplace(t.id, i).second) {
      throw Error(ErrorCode::DuplicateId, "transition '" + t.id + "' declared twice");
    }
  }

  net.inputs_.resize(transitions_.size());
  net.outputs_.resize(transitions_.size());
  const CompiledExpr::Resolver resolve = [&net](const std::string& id) -> std::optional<std::uint32_t> {
    auto it = net.place_index_.find(id);
    if (it == net.place_index_.end()) return std::nullopt;
    return it->second;
  };

  for (const ArcDecl& a : arcs_) {
    const std::string where = a.input ? a.place + " -> " + a.transition : a.transition + " -> " + a.place;
    auto p = net.find_place(a.place);
    auto t = net.find_transition(a.transition);
    if (!p) throw Error(ErrorCode::UndeclaredReference, "arc " + where + ": undeclared place '" + a.place + "'");
    if (!t) {
      throw Error(ErrorCode::UndeclaredReference,
                  "arc " + where + ": undeclared transition '" + a.transition + "'");
    }
    for (const std::string& ref : free_places(a.weight)) {
      if (!net.find_place(ref)) {
        throw Error(ErrorCode::UndeclaredReference,
                    "arc " + where + ": weight reads undeclared place '" + ref + "'");
      }
    }
    if (!a.input && a.kind != ArcKind::Deposit) {
      throw Error(ErrorCode::InvalidNet, "arc " + where + ": output arcs are always deposits");
    }
    if (a.input && a.kind == ArcKind::Deposit) {
      throw Error(ErrorCode::InvalidNet, "arc " + where + ": input arcs cannot be deposits");
    }
    if (a.kind == ArcKind::Drain && !(a.weight == WeightExpr::mark(a.place))) {
      throw Error(ErrorCode::InvalidNet, "arc " + where + ": drain weight must be m(" + a.place + ")");
    }
    PetriNet::Arc arc{*p, *t, a.kind, a.weight, CompiledExpr(a.weight, resolve)};
    (a.input ? net.inputs_ : net.outputs_)[t->index].push_back(std::move(arc));
  }
  return net;
}

}  // namespace qpn
