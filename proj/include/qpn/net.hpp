#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qpn/expr.hpp"

namespace qpn {

/// Ordinal of a place within its net.
struct PlaceId {
  std::uint32_t index = 0;
  friend auto operator<=>(const PlaceId&, const PlaceId&) = default;
};

/// Ordinal of a transition within its net.
struct TransitionId {
  std::uint32_t index = 0;
  friend auto operator<=>(const TransitionId&, const TransitionId&) = default;
};

enum class PlaceKind { Counter, Amplitude };

enum class ArcKind {
  Consume,  // input: requires and removes eval(w) tokens
  Drain,    // input: requires a nonzero amplitude and empties the place
  Guard,    // input: requires eval(w) tokens, leaves them in place
  Deposit,  // output: adds eval(w), sign preserved
};

std::string_view to_string(PlaceKind kind) noexcept;
std::string_view to_string(ArcKind kind) noexcept;

/// Tolerance for integrality of Counter places.
inline constexpr double kIntegerTolerance = 1e-9;

struct PlaceDecl {
  std::string id;
  PlaceKind kind = PlaceKind::Counter;
  double initial = 0.0;

  friend bool operator==(const PlaceDecl&, const PlaceDecl&) = default;
};

struct TransitionDecl {
  std::string id;
  int priority = 0;

  friend bool operator==(const TransitionDecl&, const TransitionDecl&) = default;
};

/// Arc as declared, by name. Input arcs run place -> transition.
struct ArcDecl {
  std::string place;
  std::string transition;
  bool input = true;
  ArcKind kind = ArcKind::Consume;
  WeightExpr weight;

  friend bool operator==(const ArcDecl&, const ArcDecl&) = default;
};

/// Dense token vector indexed by place ordinal.
class Marking {
public:
  Marking() = default;
  explicit Marking(std::size_t places) : tokens_(places, 0.0) {}
  explicit Marking(std::vector<double> tokens) : tokens_(std::move(tokens)) {}
  Marking(std::initializer_list<double> tokens) : tokens_(tokens) {}

  std::size_t size() const noexcept { return tokens_.size(); }
  double operator[](PlaceId p) const { return tokens_[p.index]; }
  double& operator[](PlaceId p) { return tokens_[p.index]; }
  double at(std::size_t i) const { return tokens_.at(i); }
  std::span<const double> values() const noexcept { return tokens_; }
  std::vector<double>& raw() noexcept { return tokens_; }

  friend bool operator==(const Marking&, const Marking&) = default;
  friend auto operator<=>(const Marking&, const Marking&) = default;

private:
  std::vector<double> tokens_;
};

class NetBuilder;

/// Immutable net structure with weight expressions compiled against the
/// place ordering. Safe to share between concurrent runs.
class PetriNet {
public:
  struct Arc {
    PlaceId place;
    TransitionId transition;
    ArcKind kind;
    WeightExpr weight;
    CompiledExpr compiled;
  };

  const std::string& name() const noexcept { return name_; }
  std::size_t place_count() const noexcept { return places_.size(); }
  std::size_t transition_count() const noexcept { return transitions_.size(); }

  const std::vector<PlaceDecl>& places() const noexcept { return places_; }
  const std::vector<TransitionDecl>& transitions() const noexcept { return transitions_; }
  const PlaceDecl& place(PlaceId p) const { return places_.at(p.index); }
  const TransitionDecl& transition(TransitionId t) const { return transitions_.at(t.index); }

  std::optional<PlaceId> find_place(std::string_view id) const;
  std::optional<TransitionId> find_transition(std::string_view id) const;
  /// Throws UnknownPlace.
  PlaceId place_id(std::string_view id) const;
  /// Throws InvalidParams.
  TransitionId transition_id(std::string_view id) const;

  const std::vector<Arc>& inputs(TransitionId t) const { return inputs_.at(t.index); }
  const std::vector<Arc>& outputs(TransitionId t) const { return outputs_.at(t.index); }
  std::size_t arc_count() const noexcept { return arcs_.size(); }
  /// Arcs in declaration order.
  const std::vector<ArcDecl>& arcs() const noexcept { return arcs_; }

  Marking initial_marking() const;

  /// Structural equality: same declarations in the same order.
  friend bool operator==(const PetriNet& a, const PetriNet& b);

private:
  friend class NetBuilder;
  PetriNet() = default;

  std::string name_;
  std::vector<PlaceDecl> places_;
  std::vector<TransitionDecl> transitions_;
  std::vector<ArcDecl> arcs_;
  std::vector<std::vector<Arc>> inputs_;
  std::vector<std::vector<Arc>> outputs_;
  std::unordered_map<std::string, std::uint32_t> place_index_;
  std::unordered_map<std::string, std::uint32_t> transition_index_;
};

/// Collects declarations in any order; build() validates and compiles.
///
/// Validation rules: ids unique across places and transitions, net nonempty,
/// every arc endpoint and every place read by a weight declared, initial
/// values finite, Counter initial values non-negative integers, Guard/Drain
/// only on input arcs, Drain weights exactly `m(<source>)`.
class NetBuilder {
public:
  explicit NetBuilder(std::string name) : name_(std::move(name)) {}

  NetBuilder& place(std::string id, PlaceKind kind, double initial = 0.0);
  NetBuilder& counter(std::string id, double initial = 0.0) {
    return place(std::move(id), PlaceKind::Counter, initial);
  }
  NetBuilder& amplitude(std::string id, double initial = 0.0) {
    return place(std::move(id), PlaceKind::Amplitude, initial);
  }
  NetBuilder& transition(std::string id, int priority = 0);

  NetBuilder& input(std::string place, std::string transition, WeightExpr weight,
                    ArcKind kind = ArcKind::Consume);
  NetBuilder& output(std::string transition, std::string place, WeightExpr weight);
  /// Text overloads parse the weight.
  NetBuilder& input(std::string place, std::string transition, std::string_view weight,
                    ArcKind kind = ArcKind::Consume);
  NetBuilder& output(std::string transition, std::string place, std::string_view weight);

  bool has_place(std::string_view id) const;

  PetriNet build() const;

private:
  std::string name_;
  std::vector<PlaceDecl> places_;
  std::vector<TransitionDecl> transitions_;
  std::vector<ArcDecl> arcs_;
};

}  // namespace qpn
