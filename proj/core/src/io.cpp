#include "ghostsim/io.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <unordered_set>

#include "ghostsim/error.hpp"
#include "json.hpp"

namespace ghostsim {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kValidationError, path + ": " + what);
}

std::string format_ranges(std::vector<ValidatorId> ids) {
  std::sort(ids.begin(), ids.end());
  std::string out;
  for (std::size_t i = 0; i < ids.size();) {
    std::size_t j = i;
    while (j + 1 < ids.size() && ids[j + 1].index == ids[j].index + 1) ++j;
    if (!out.empty()) out += ',';
    out += std::to_string(ids[i].index);
    if (j > i) out += '-' + std::to_string(ids[j].index);
    i = j + 1;
  }
  return out;
}

std::uint64_t parse_number(std::string_view text, const std::string& path) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    invalid(path, "expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::pair<std::uint64_t, std::uint64_t> parse_range(std::string_view text, const std::string& path) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    const auto v = parse_number(text, path);
    return {v, v};
  }
  const auto lo = parse_number(text.substr(0, dash), path);
  const auto hi = parse_number(text.substr(dash + 1), path);
  if (hi < lo) invalid(path, "range '" + std::string(text) + "' is decreasing");
  return {lo, hi};
}

std::vector<ValidatorId> parse_ranges(std::string_view text, const std::string& path) {
  std::vector<ValidatorId> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto [lo, hi] = parse_range(text.substr(0, comma), path);
    for (auto v = lo; v <= hi; ++v) out.push_back(ValidatorId{static_cast<std::uint32_t>(v)});
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
  }
  return out;
}

std::string format_fraction(const Fraction& f) {
  return std::to_string(f.num) + "/" + std::to_string(f.den);
}

std::string_view to_string(SamplingMode m) {
  return m == SamplingMode::kRandom ? "random" : "exact-fraction";
}

std::string_view to_string(ProposerClass c) {
  return c == ProposerClass::kAdversarial ? "adversarial" : "honest";
}

json config_to_json(const SimConfig& c) {
  json lottery;
  lottery["num_validators"] = c.lottery.num_validators;
  lottery["committee_size"] = c.lottery.committee_size;
  lottery["adversary_fraction"] = format_fraction(c.lottery.adversary_fraction);
  lottery["seed"] = c.lottery.seed;
  lottery["sampling"] = to_string(c.lottery.sampling);
  json overrides = json::array();
  for (const SlotOverride& o : c.lottery.overrides) {
    json item;
    item["slots"] = o.first == o.last ? std::to_string(o.first)
                                      : std::to_string(o.first) + "-" + std::to_string(o.last);
    if (o.proposer) item["proposer"] = o.proposer->index;
    if (o.proposer_class) item["proposer_class"] = to_string(*o.proposer_class);
    if (o.committee) item["committee"] = format_ranges(*o.committee);
    overrides.push_back(std::move(item));
  }
  lottery["overrides"] = std::move(overrides);

  json doc;
  doc["schema_version"] = kConfigSchemaVersion;
  doc["num_slots"] = c.num_slots;
  doc["mode"] = to_string(c.mode);
  doc["boost_weight"] = c.boost_weight;
  doc["confirmation_depth"] = c.confirmation_depth;
  doc["tiebreak"] = to_string(c.tiebreak);
  doc["stall_window"] = c.stall_window;
  doc["lottery"] = std::move(lottery);
  doc["partition"] = {{"layout", to_string(c.partition.layout)}, {"jitter", c.partition.jitter}};
  doc["attack"] = {{"kind", to_string(c.attack.kind)},
                   {"initial_k", c.attack.avalanche.initial_k},
                   {"drift_threshold", c.attack.balancing.drift_threshold},
                   {"setup", to_string(c.attack.balancing.setup)},
                   {"setup_start", c.attack.balancing.setup_start}};
  return doc;
}

// Typed field access that reports the dotted path on failure.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) invalid(path_.empty() ? "document" : path_, "expected an object");
  }

  std::string path_of(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return node_.contains(key); }
  const json& at(const std::string& key) const { return node_.at(key); }

  void only(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, value] : node_.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) invalid(path_of(key), "unknown field");
    }
  }

  template <typename T>
  T integer(const std::string& key, std::optional<T> fallback, T lo, T hi) const {
    if (!has(key)) {
      if (!fallback) invalid(path_of(key), "required field missing");
      return *fallback;
    }
    const json& v = node_.at(key);
    if (!v.is_number_integer()) invalid(path_of(key), "expected an integer");
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(hi)) invalid(path_of(key), "out of range");
      return static_cast<T>(u);
    }
    // Non-negative literals parse as unsigned, so only negatives land here.
    const auto s = v.get<std::int64_t>();
    if (s < static_cast<std::int64_t>(lo)) invalid(path_of(key), "out of range");
    return static_cast<T>(s);
  }

  std::string text(const std::string& key, std::optional<std::string> fallback) const {
    if (!has(key)) {
      if (!fallback) invalid(path_of(key), "required field missing");
      return *fallback;
    }
    const json& v = node_.at(key);
    if (!v.is_string()) invalid(path_of(key), "expected a string");
    return v.get<std::string>();
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number()) invalid(path_of(key), "expected a number");
    return v.get<double>();
  }

 private:
  const json& node_;
  std::string path_;
};

template <typename T, typename F>
T choice(const Reader& r, const std::string& key, std::optional<std::string> fallback, F parse) {
  const std::string value = r.text(key, std::move(fallback));
  auto parsed = parse(value);
  if (!parsed) invalid(r.path_of(key), "unknown value '" + value + "'");
  return *parsed;
}

Fraction parse_fraction(const json& v, const std::string& path) {
  if (v.is_number()) {
    const double d = v.get<double>();
    if (!(d >= 0.0 && d < 1.0)) invalid(path, "must lie in [0, 1)");
    return Fraction::from_double(d);
  }
  if (!v.is_string()) invalid(path, "expected a number or a 'num/den' string");
  const std::string s = v.get<std::string>();
  const auto slash = s.find('/');
  if (slash == std::string::npos) invalid(path, "expected 'num/den', got '" + s + "'");
  Fraction f{static_cast<std::int64_t>(parse_number(std::string_view(s).substr(0, slash), path)),
             static_cast<std::int64_t>(parse_number(std::string_view(s).substr(slash + 1), path))};
  if (f.den == 0 || f.num >= f.den) invalid(path, "must lie in [0, 1)");
  return f;
}

LotteryConfig parse_lottery(const json& node) {
  const Reader r(node, "lottery");
  r.only({"num_validators", "committee_size", "adversary_fraction", "seed", "sampling", "overrides"});
  LotteryConfig c;
  c.num_validators = r.integer<std::uint32_t>("num_validators", std::nullopt, 1, 10'000'000);
  c.committee_size = r.integer<std::uint32_t>("committee_size", std::nullopt, 0, 10'000'000);
  if (c.committee_size > c.num_validators) {
    invalid(r.path_of("committee_size"), "exceeds num_validators (" +
                                             std::to_string(c.num_validators) + ")");
  }
  if (!r.has("adversary_fraction")) invalid(r.path_of("adversary_fraction"), "required field missing");
  c.adversary_fraction = parse_fraction(r.at("adversary_fraction"), r.path_of("adversary_fraction"));
  c.seed = r.integer<std::uint64_t>("seed", 0, 0, std::numeric_limits<std::uint64_t>::max());
  c.sampling = choice<SamplingMode>(r, "sampling", "random", [](const std::string& s) {
    if (s == "random") return std::optional(SamplingMode::kRandom);
    if (s == "exact-fraction") return std::optional(SamplingMode::kExactFraction);
    return std::optional<SamplingMode>();
  });
  if (r.has("overrides")) {
    const json& list = r.at("overrides");
    if (!list.is_array()) invalid(r.path_of("overrides"), "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = r.path_of("overrides") + "[" + std::to_string(i) + "]";
      const Reader o(list[i], path);
      o.only({"slots", "proposer", "proposer_class", "committee"});
      SlotOverride item;
      if (!o.has("slots")) invalid(o.path_of("slots"), "required field missing");
      const json& slots = o.at("slots");
      if (slots.is_number_unsigned()) {
        item.first = item.last = slots.get<Slot>();
      } else if (slots.is_string()) {
        const auto [lo, hi] = parse_range(slots.get<std::string>(), o.path_of("slots"));
        item.first = static_cast<Slot>(lo);
        item.last = static_cast<Slot>(hi);
      } else {
        invalid(o.path_of("slots"), "expected a slot number or 'first-last'");
      }
      if (item.first < 1) invalid(o.path_of("slots"), "slots start at 1");
      if (o.has("proposer")) {
        item.proposer = ValidatorId{o.integer<std::uint32_t>("proposer", std::nullopt, 0,
                                                              c.num_validators - 1)};
      }
      if (o.has("proposer_class")) {
        item.proposer_class =
            choice<ProposerClass>(o, "proposer_class", std::nullopt, [](const std::string& s) {
              if (s == "adversarial") return std::optional(ProposerClass::kAdversarial);
              if (s == "honest") return std::optional(ProposerClass::kHonest);
              return std::optional<ProposerClass>();
            });
      }
      if (o.has("committee")) {
        const json& committee = o.at("committee");
        std::vector<ValidatorId> ids;
        if (committee.is_string()) {
          ids = parse_ranges(committee.get<std::string>(), o.path_of("committee"));
        } else if (committee.is_array()) {
          for (const json& v : committee) {
            if (!v.is_number_unsigned()) invalid(o.path_of("committee"), "expected validator ids");
            ids.push_back(ValidatorId{v.get<std::uint32_t>()});
          }
        } else {
          invalid(o.path_of("committee"), "expected 'a-b,c-d' or an array of ids");
        }
        for (ValidatorId v : ids) {
          if (v.index >= c.num_validators) invalid(o.path_of("committee"), "validator id out of range");
        }
        std::sort(ids.begin(), ids.end());
        item.committee = std::move(ids);
      }
      c.overrides.push_back(std::move(item));
    }
  }
  return c;
}

SimConfig parse_object(const json& doc) {
  const Reader r(doc, "");
  r.only({"schema_version", "num_slots", "mode", "boost_weight", "confirmation_depth", "tiebreak",
          "stall_window", "lottery", "partition", "attack"});
  if (r.has("schema_version")) {
    const int version = r.integer<int>("schema_version", std::nullopt, 0, 1'000'000);
    if (version != kConfigSchemaVersion) {
      invalid("schema_version", "unsupported version " + std::to_string(version));
    }
  }
  SimConfig c;
  std::vector<std::string> missing;
  if (!r.has("num_slots")) missing.emplace_back("num_slots");
  if (!r.has("lottery") || r.at("lottery").is_object()) {
    for (const char* key : {"num_validators", "committee_size", "adversary_fraction"}) {
      if (!r.has("lottery") || !r.at("lottery").contains(key)) {
        missing.push_back(std::string("lottery.") + key);
      }
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::kValidationError, "missing required fields: " + list);
  }

  if (r.has("attack")) {
    const Reader a(r.at("attack"), "attack");
    a.only({"kind", "initial_k", "drift_threshold", "setup", "setup_start"});
    c.attack.kind = choice<AttackKind>(a, "kind", "none", parse_attack_kind);
    c.attack.avalanche.initial_k = a.integer<std::uint32_t>("initial_k", 0, 0, 1'000'000);
    c.attack.balancing.drift_threshold = a.integer<Weight>("drift_threshold", 0, 0, 1'000'000'000);
    c.attack.balancing.setup = choice<SetupMode>(a, "setup", "strict", parse_setup_mode);
    c.attack.balancing.setup_start = a.integer<Slot>("setup_start", 1, 1, 1'000'000'000);
  }
  const std::string default_mode = c.attack.kind == AttackKind::kAvalanche   ? "vanilla-ghost"
                                   : c.attack.kind == AttackKind::kBalancing ? "committee-ghost-lmd"
                                                                             : "committee-ghost";
  c.mode = choice<ForkChoiceMode>(r, "mode", default_mode, parse_fork_choice_mode);
  c.num_slots = r.integer<Slot>("num_slots", std::nullopt, 1, 1'000'000);
  c.boost_weight = r.integer<Weight>("boost_weight", 0, 0, 1'000'000'000);
  c.confirmation_depth = r.integer<Slot>("confirmation_depth", 2, 1, 1'000'000);
  c.tiebreak = choice<TieBreakPolicy>(r, "tiebreak", "adversarial-preference", parse_tie_break_policy);
  c.stall_window = r.integer<Slot>("stall_window", 10, 1, 1'000'000);
  c.lottery = parse_lottery(r.at("lottery"));
  if (r.has("partition")) {
    const Reader p(r.at("partition"), "partition");
    p.only({"layout", "jitter"});
    c.partition.layout = choice<PartitionLayout>(p, "layout", "halves", parse_partition_layout);
    c.partition.jitter = p.real("jitter", 0.0);
    if (c.partition.jitter < 0.0 || c.partition.jitter > 1.0) {
      invalid("partition.jitter", "must lie in [0, 1]");
    }
  }
  try {
    validate(c);
  } catch (const Error& e) {
    invalid("config", e.what());
  }
  return c;
}

SlotOverride class_override(Slot first, Slot last, ProposerClass cls) {
  SlotOverride o;
  o.first = first;
  o.last = last;
  o.proposer_class = cls;
  return o;
}

std::vector<ValidatorId> id_range(std::uint32_t first, std::uint32_t count) {
  std::vector<ValidatorId> out;
  for (std::uint32_t i = 0; i < count; ++i) out.push_back(ValidatorId{first + i});
  return out;
}

SimConfig balancing_fig_sequence() {
  SimConfig c;
  c.mode = ForkChoiceMode::kCommitteeGhostLmd;
  c.num_slots = 60;
  c.boost_weight = 70;
  c.confirmation_depth = 2;
  c.lottery.num_validators = 500;
  c.lottery.committee_size = 100;
  c.lottery.adversary_fraction = Fraction{1, 5};
  c.lottery.sampling = SamplingMode::kExactFraction;
  c.attack.kind = AttackKind::kBalancing;
  // Adversarial ids 0-99, H_Left 100-299, H_Right 300-499. Committees rotate
  // through five disjoint blocks of each group, so every committee holds 20
  // adversarial, 40 H_Left and 40 H_Right members and slots 1-4 use 80
  // distinct adversarial voters.
  for (Slot t = 1; t <= c.num_slots; ++t) {
    const auto phase = static_cast<std::uint32_t>((t - 1) % 5);
    SlotOverride o;
    o.first = o.last = t;
    std::vector<ValidatorId> committee = id_range(20 * phase, 20);
    for (auto v : id_range(100 + 40 * phase, 40)) committee.push_back(v);
    for (auto v : id_range(300 + 40 * phase, 40)) committee.push_back(v);
    o.committee = std::move(committee);
    if (t <= 5) {
      o.proposer = ValidatorId{20 * phase};
    } else if (t % 2 == 0) {
      o.proposer = ValidatorId{100 + static_cast<std::uint32_t>(t % 200)};
    } else {
      o.proposer = ValidatorId{300 + static_cast<std::uint32_t>(t % 200)};
    }
    c.lottery.overrides.push_back(std::move(o));
  }
  return c;
}

SimConfig avalanche_poc(ForkChoiceMode mode) {
  SimConfig c;
  c.mode = mode;
  c.num_slots = 100;
  c.attack.kind = AttackKind::kAvalanche;
  c.stall_window = 20;
  if (mode == ForkChoiceMode::kVanillaGhost) {
    c.lottery.num_validators = 100;
    c.lottery.committee_size = 10;
    c.lottery.adversary_fraction = Fraction{3, 10};
    c.lottery.seed = 3;
    c.attack.avalanche.initial_k = 4;
  } else {
    c.lottery.num_validators = 500;
    c.lottery.committee_size = 100;
    c.lottery.adversary_fraction = Fraction{1, 5};
    c.lottery.seed = 5;
    c.attack.avalanche.initial_k = 12;
  }
  return c;
}

SimConfig baseline() {
  SimConfig c;
  c.mode = ForkChoiceMode::kCommitteeGhostLmd;
  c.num_slots = 50;
  c.boost_weight = 8;
  c.lottery.num_validators = 100;
  c.lottery.committee_size = 20;
  c.lottery.adversary_fraction = Fraction{0, 1};
  c.lottery.seed = 1;
  return c;
}

}  // namespace

SimConfig parse_config(std::string_view document) {
  if (document.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorCode::kValidationError,
                "empty document; missing required fields: num_slots, lottery.num_validators, "
                "lottery.committee_size, lottery.adversary_fraction (or a preset)");
  }
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, document.size());
    const auto line = 1 + std::count(document.begin(), document.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + e.what());
  }
  if (!doc.is_object()) invalid("document", "expected a JSON object");
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) invalid("preset", "expected a string");
    json base = config_to_json(preset(doc["preset"].get<std::string>()));
    doc.erase("preset");
    base.merge_patch(doc);
    return parse_object(base);
  }
  return parse_object(doc);
}

std::string emit_config(const SimConfig& config) { return config_to_json(config).dump(2) + "\n"; }

std::vector<std::string> preset_names() {
  return {"avalanche-committee-ghost", "avalanche-fig1-4", "avalanche-pos-ghost",
          "balancing-fig-sequence", "baseline"};
}

SimConfig preset(std::string_view name) {
  if (name == "avalanche-fig1-4") return avalanche_replay_config(6);
  if (name == "avalanche-pos-ghost") return avalanche_poc(ForkChoiceMode::kVanillaGhost);
  if (name == "avalanche-committee-ghost") return avalanche_poc(ForkChoiceMode::kCommitteeGhost);
  if (name == "balancing-fig-sequence") return balancing_fig_sequence();
  if (name == "baseline") return baseline();
  invalid("preset", "unknown preset '" + std::string(name) + "'");
}

SimConfig avalanche_replay_config(std::uint32_t k) {
  if (k < 2) invalid("initial_k", "replay needs at least two withheld blocks");
  Slot honest = 0;
  for (Slot j = k; j >= 2; j -= 2) honest += j;
  SimConfig c;
  c.mode = ForkChoiceMode::kVanillaGhost;
  c.num_slots = static_cast<Slot>(k) + honest;
  c.lottery.num_validators = 10;
  c.lottery.committee_size = 4;
  c.lottery.adversary_fraction = Fraction{3, 10};
  c.lottery.seed = 6;
  c.lottery.overrides.push_back(class_override(1, k, ProposerClass::kAdversarial));
  c.lottery.overrides.push_back(class_override(k + 1, c.num_slots, ProposerClass::kHonest));
  c.attack.kind = AttackKind::kAvalanche;
  c.attack.avalanche.initial_k = k;
  return c;
}

Viewpoint Viewpoint::parse(std::string_view text) {
  if (text == "global") return Viewpoint{};
  return Viewpoint{false, ValidatorId{static_cast<std::uint32_t>(parse_number(text, "view"))}};
}

std::string export_dot(const Trace& trace, Tick tick, const Viewpoint& viewpoint) {
  if (tick < trace.first_tick() || tick > trace.last_tick()) {
    throw Error(ErrorCode::kTickOutOfRange, "tick " + std::to_string(tick) + " outside [" +
                                                std::to_string(trace.first_tick()) + ", " +
                                                std::to_string(trace.last_tick()) + "]");
  }
  const ViewSnapshot& snap = viewpoint.global ? trace.global_snapshot(tick)
                                              : trace.snapshot(tick, viewpoint.validator);

  // Opportunity number: rank of the block's slot among slots with a proposer
  // of the same kind.
  std::vector<std::uint32_t> opportunity(static_cast<std::size_t>(trace.schedule.num_slots() + 1), 0);
  std::uint32_t adversarial = 0;
  std::uint32_t honest = 0;
  for (Slot s = 1; s <= trace.schedule.num_slots(); ++s) {
    opportunity[static_cast<std::size_t>(s)] =
        trace.schedule.adversarial_proposer(s) ? ++adversarial : ++honest;
  }
  const std::unordered_set<BlockId> withheld(snap.withheld.begin(), snap.withheld.end());
  auto node = [](BlockId id) { return "\"b" + to_string(id) + "\""; };

  std::ostringstream out;
  out << "digraph blocktree {\n";
  out << "  rankdir=BT;\n";
  out << "  label=\"tick " << tick << ", "
      << (viewpoint.global ? std::string("global view")
                           : "validator " + std::to_string(viewpoint.validator.index))
      << "\";\n";
  out << "  labelloc=t;\n";
  out << "  node [shape=box, style=filled];\n";
  for (std::size_t i = 0; i < snap.blocks.size(); ++i) {
    const BlockId id = snap.blocks[i];
    const BlockRecord* rec = trace.find_block(id);
    const Block& b = *rec->block;
    std::string label;
    std::string color;
    if (b.is_genesis()) {
      label = "G";
      color = "palegreen";
    } else {
      label = std::to_string(opportunity[static_cast<std::size_t>(b.slot)]);
      color = rec->adversarial ? "red" : "palegreen";
    }
    out << "  " << node(id) << " [label=\"" << label << "\", fillcolor=" << color
        << ", xlabel=\"w=" << snap.scores[i] << "\"";
    if (withheld.contains(id)) out << ", style=\"filled,dashed\"";
    if (id == snap.head) out << ", peripheries=2";
    if (snap.boosted && *snap.boosted == id) out << ", penwidth=3";
    out << "];\n";
  }
  for (BlockId id : snap.blocks) {
    const Block& b = trace.block(id);
    if (!b.is_genesis()) out << "  " << node(id) << " -> " << node(b.parent) << ";\n";
  }
  out << "}\n";
  return out.str();
}

void export_trace(const Trace& trace, std::ostream& out) {
  json header;
  header["schema"] = "ghostsim-trace";
  header["version"] = kTraceSchemaVersion;
  header["config"] = config_to_json(trace.config);
  header["partition"] = {{"left", format_ranges(trace.partition.left())},
                         {"right", format_ranges(trace.partition.right())}};
  out << header.dump() << '\n';

  for (Slot s = 1; s <= trace.schedule.num_slots(); ++s) {
    json line;
    line["type"] = "slot";
    line["slot"] = s;
    line["proposer"] = trace.schedule.proposer(s).index;
    line["adversarial_proposer"] = trace.schedule.adversarial_proposer(s);
    line["committee"] = format_ranges(trace.schedule.committee(s));
    out << line.dump() << '\n';
  }

  for (const Event& event : trace.events) {
    json line;
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          line["tick"] = e.tick;
          if constexpr (std::is_same_v<T, MintEvent>) {
            const Block& b = trace.block(e.block);
            line["type"] = "mint";
            line["block"] = to_string(b.id);
            line["slot"] = b.slot;
            line["proposer"] = b.proposer.index;
            line["parent"] = to_string(b.parent);
            line["carried_votes"] = b.carried_votes.size();
            line["adversarial"] = e.adversarial;
            line["withheld"] = e.withheld;
            line["equivocation"] = e.equivocation;
          } else if constexpr (std::is_same_v<T, VoteEvent>) {
            line["type"] = "vote";
            line["voter"] = e.vote.voter.index;
            line["slot"] = e.vote.slot;
            line["target"] = to_string(e.vote.target);
            line["adversarial"] = e.adversarial;
            line["equivocation"] = e.equivocation;
          } else if constexpr (std::is_same_v<T, WithholdEvent>) {
            line["type"] = "withhold";
            line["message"] = e.message;
          } else if constexpr (std::is_same_v<T, DeliverEvent>) {
            line["type"] = "deliver";
            line["message"] = e.message;
            line["at"] = e.at;
            line["group"] = e.group;
            line["recipients"] = e.recipients;
          } else if constexpr (std::is_same_v<T, ReleaseEvent>) {
            line["type"] = "release";
            line["kind"] = e.kind;
            line["blocks"] = e.blocks;
            line["votes"] = e.votes;
          } else if constexpr (std::is_same_v<T, HeadEvent>) {
            line["type"] = "head";
            line["head"] = to_string(e.head);
            line["holders"] = format_ranges(e.holders);
          } else if constexpr (std::is_same_v<T, IgnoreEvent>) {
            line["type"] = "ignore";
            line["votes"] = e.votes;
            line["holders"] = format_ranges(e.holders);
          } else {
            line["type"] = "outcome";
            line["outcome"] = e.outcome;
          }
        },
        event);
    out << line.dump() << '\n';
  }

  for (const LedgerRecord& r : trace.ledgers) {
    json line;
    line["type"] = "ledger";
    line["slot"] = r.slot;
    line["tip"] = to_string(r.tip);
    line["length"] = r.length;
    line["holders"] = format_ranges(r.holders);
    out << line.dump() << '\n';
  }
  for (const FinalView& f : trace.final_views) {
    json line;
    line["type"] = "final_view";
    line["head"] = to_string(f.head);
    line["holders"] = format_ranges(f.holders);
    line["ever_canonical"] = f.ever_canonical.size();
    out << line.dump() << '\n';
  }
  for (const SafetyWitness& w : trace.safety_witnesses) {
    json line;
    line["type"] = "safety_violation";
    line["first"] = {{"validator", w.first_validator.index}, {"slot", w.first_slot},
                     {"block", to_string(w.first_block)}};
    line["second"] = {{"validator", w.second_validator.index}, {"slot", w.second_slot},
                      {"block", to_string(w.second_block)}};
    out << line.dump() << '\n';
  }
  for (const StallInterval& s : trace.stalls) {
    json line;
    line["type"] = "liveness_stall";
    line["first"] = s.first;
    line["last"] = s.last;
    line["length"] = s.length();
    out << line.dump() << '\n';
  }
  json end;
  end["type"] = "end";
  end["attack_sustained"] = trace.attack_sustained;
  out << end.dump() << '\n';
}

std::string export_trace(const Trace& trace) {
  std::ostringstream out;
  export_trace(trace, out);
  return out.str();
}

Summary summarize(const Trace& trace) {
  Summary s;
  // Displaced: honest blocks left off every honest validator's final chain.
  // Permanent: honest blocks on all of them.
  std::vector<std::unordered_set<BlockId>> finals;
  for (const FinalView& f : trace.final_views) {
    const Ledger chain = trace.chain(f.head);
    finals.emplace_back(chain.blocks.begin(), chain.blocks.end());
  }
  for (const BlockRecord& r : trace.blocks) {
    if (r.adversarial || r.block->is_genesis()) continue;
    const BlockId id = r.block->id;
    auto on = [&](const auto& f) { return f.contains(id); };
    if (std::none_of(finals.begin(), finals.end(), on)) ++s.honest_displaced;
    if (!finals.empty() && std::all_of(finals.begin(), finals.end(), on)) ++s.honest_permanent;
  }
  for (const Event& e : trace.events) {
    if (std::holds_alternative<ReleaseEvent>(e)) ++s.releases;
    if (const auto* m = std::get_if<MintEvent>(&e); m && m->equivocation) ++s.equivocations;
    if (const auto* v = std::get_if<VoteEvent>(&e); v && v->equivocation) ++s.equivocations;
    if (const auto* o = std::get_if<OutcomeEvent>(&e)) s.outcomes.push_back(o->outcome);
  }
  s.safety_witnesses = static_cast<std::uint32_t>(trace.safety_witnesses.size());
  s.stalls = trace.stalls;
  for (const LedgerRecord& r : trace.ledgers) {
    s.max_ledger_length = std::max(s.max_ledger_length, r.length);
    for (ValidatorId v : r.holders) {
      auto& best = s.max_ledger_length_by_validator[v.index];
      best = std::max(best, r.length);
    }
  }
  s.attack_sustained = trace.attack_sustained;
  return s;
}

std::string summary_to_json(const Summary& s) {
  json doc;
  doc["honest_displaced"] = s.honest_displaced;
  doc["honest_permanent"] = s.honest_permanent;
  doc["releases"] = s.releases;
  doc["equivocations"] = s.equivocations;
  doc["safety_witnesses"] = s.safety_witnesses;
  json stalls = json::array();
  for (const StallInterval& st : s.stalls) {
    stalls.push_back({{"first", st.first}, {"last", st.last}, {"length", st.length()}});
  }
  doc["stalls"] = std::move(stalls);
  doc["max_ledger_length"] = s.max_ledger_length;
  // Validators with equal maxima are grouped to keep the document short.
  std::map<std::uint32_t, std::vector<ValidatorId>> by_length;
  for (const auto& [v, len] : s.max_ledger_length_by_validator) by_length[len].push_back(ValidatorId{v});
  json per_validator = json::object();
  for (const auto& [len, ids] : by_length) per_validator[format_ranges(ids)] = len;
  doc["max_ledger_length_by_validator"] = std::move(per_validator);
  doc["attack_sustained"] = s.attack_sustained;
  doc["outcomes"] = s.outcomes;
  return doc.dump(2) + "\n";
}

}  // namespace ghostsim
