#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "qpn/engine.hpp"
#include "qpn/net.hpp"
#include "qpn/quantum.hpp"

namespace qpn::netfile {

/// Run settings a file may pin; unset fields leave the caller's defaults.
struct ConfigOverrides {
  std::optional<std::uint64_t> max_steps;
  std::optional<Policy> policy;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;

  bool empty() const noexcept { return !max_steps && !policy && !seed && !epsilon; }
  void apply(RunConfig& config) const;

  friend bool operator==(const ConfigOverrides&, const ConfigOverrides&) = default;
};

struct NetDocument {
  PetriNet net;
  std::optional<QuantumMapping> mapping;
  ConfigOverrides config;

  friend bool operator==(const NetDocument&, const NetDocument&) = default;
};

/// Parses a `.qpn` document, one statement per line, `#` starts a comment:
///
///   net <name>
///   place <id> init=<number> kind=<counter|amplitude>
///   trans <id> [priority=<int>]
///   arc <pid> -> <tid> w="<expr>" [kind=consume|drain|guard]
///   arc <tid> -> <pid> w="<expr>"
///   k = <number>
///   map <pid> = "<label>"
///   config [max_steps=<int>] [policy=<det|born>] [seed=<uint64>] [epsilon=<number>]
///
/// `net` must be the first statement. Errors carry the line and column.
NetDocument load(std::string_view text);
NetDocument load_file(const std::filesystem::path& path);

/// Canonical text: header, places, transitions, arcs (each in declaration
/// order), then mapping and config. load(save(d)) == d.
std::string save(const NetDocument& doc);
std::string save(const PetriNet& net, const std::optional<QuantumMapping>& mapping = {});

}  // namespace qpn::netfile
