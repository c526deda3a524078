#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ghostsim/engine.hpp"

namespace ghostsim {

// Config documents are JSON. Missing optional fields take the documented
// defaults; a "preset" key starts from a named preset and overrides fields.
// Throws Error{kParseError} (with line) or Error{kValidationError} (with field path).
SimConfig parse_config(std::string_view document);

// Canonical, fully explicit document; parse_config(emit_config(c)) == c.
std::string emit_config(const SimConfig& config);

std::vector<std::string> preset_names();
SimConfig preset(std::string_view name);  // throws kValidationError for unknown names

// Scripted avalanche replay: slots 1..k adversarial, then k(k+2)/4 honest slots.
SimConfig avalanche_replay_config(std::uint32_t k);

struct Viewpoint {
  bool global = true;
  ValidatorId validator;

  static Viewpoint parse(std::string_view text);  // "global" or a validator index
};

// Throws Error{kTickOutOfRange}.
std::string export_dot(const Trace& trace, Tick tick, const Viewpoint& viewpoint);

// JSON Lines, schema-versioned; byte-identical for identical configs.
void export_trace(const Trace& trace, std::ostream& out);
std::string export_trace(const Trace& trace);

struct Summary {
  std::uint32_t honest_displaced = 0;
  std::uint32_t honest_permanent = 0;
  std::uint32_t releases = 0;
  std::uint32_t equivocations = 0;
  std::uint32_t safety_witnesses = 0;
  std::vector<StallInterval> stalls;
  std::uint32_t max_ledger_length = 0;
  std::map<std::uint32_t, std::uint32_t> max_ledger_length_by_validator;
  bool attack_sustained = false;
  std::vector<std::string> outcomes;
};

Summary summarize(const Trace& trace);
std::string summary_to_json(const Summary& summary);

inline constexpr int kTraceSchemaVersion = 1;
inline constexpr int kConfigSchemaVersion = 1;

}  // namespace ghostsim
