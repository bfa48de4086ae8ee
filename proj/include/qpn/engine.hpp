#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "qpn/net.hpp"

namespace qpn {

enum class Policy {
  DeterministicPriority,  // lowest priority rank, then lowest ordinal
  BornRandom,             // Born-weighted choice inside a conflict group
};

std::string_view to_string(Policy p) noexcept;
/// Accepts "det"/"deterministic" and "born".
std::optional<Policy> parse_policy(std::string_view text) noexcept;

inline constexpr double kDefaultEpsilon = 1e-12;

struct RunConfig {
  Policy policy = Policy::DeterministicPriority;
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 10'000'000;
  double epsilon = kDefaultEpsilon;
  /// When set, every non-quiescent step must have exactly one enabled
  /// transition; otherwise the run fails with NondeterministicStep.
  bool require_unique = false;

  /// Throws InvalidParams when max_steps == 0 or epsilon <= 0.
  void validate() const;
};

/// 64-bit generator whose output sequence depends only on the seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;

private:
  std::uint64_t state_;
};

/// Fixed bijective 64-bit mix (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x) noexcept;

enum class TerminalStatus { Quiescent, StepLimit };
std::string_view to_string(TerminalStatus s) noexcept;

struct Firing {
  TransitionId transition;
  Marking marking;
};

struct Trace {
  Marking initial;
  std::vector<Firing> steps;
  TerminalStatus status = TerminalStatus::Quiescent;

  const Marking& final_marking() const { return steps.empty() ? initial : steps.back().marking; }
};

/// Final state of a run without the per-step record.
struct RunSummary {
  Marking final_marking;
  std::uint64_t firings = 0;
  TerminalStatus status = TerminalStatus::Quiescent;
};

bool is_enabled(const PetriNet& net, const Marking& m, TransitionId t,
                double epsilon = kDefaultEpsilon);

std::vector<TransitionId> enabled_transitions(const PetriNet& net, const Marking& m,
                                              double epsilon = kDefaultEpsilon);

/// Fires `t` atomically: every weight is evaluated on `m` before any place
/// changes. Throws NotEnabled, an evaluation error, or CounterViolation.
Marking fire(const PetriNet& net, const Marking& m, TransitionId t,
             double epsilon = kDefaultEpsilon);

/// Enabled transitions grouped by the equivalence closure of sharing a
/// Consume or Drain input place. Groups are ordered by their lowest ordinal.
std::vector<std::vector<TransitionId>> conflict_groups(const PetriNet& net, const Marking& m,
                                                       double epsilon = kDefaultEpsilon);

/// Sum of squared output weights of `t` evaluated at `m`.
double born_weight(const PetriNet& net, const Marking& m, TransitionId t);

/// One step under `config.policy`; nullopt when nothing is enabled.
std::optional<Firing> step(const PetriNet& net, const Marking& m, const RunConfig& config,
                           Rng& rng);

/// Called after every firing with the 1-based step index.
using StepObserver = std::function<void(std::uint64_t, const Firing&)>;

Trace run(const PetriNet& net, const Marking& m0, const RunConfig& config);
RunSummary run_summary(const PetriNet& net, const Marking& m0, const RunConfig& config,
                       const StepObserver& observer = {});

}  // namespace qpn
