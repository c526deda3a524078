#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace ghostsim::testing {
namespace {

bool in_subtree(const NaiveTree& t, std::size_t node, std::size_t root) {
  for (;;) {
    if (node == root) return true;
    if (node == 0) return false;
    node = t.parent[node];
  }
}

std::vector<std::size_t> children(const NaiveTree& t, std::size_t node) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < t.parent.size(); ++i) {
    if (t.parent[i] == node) out.push_back(i);
  }
  return out;
}

std::size_t naive_tiebreak(const NaiveInput& in, const std::vector<std::size_t>& tied) {
  switch (in.policy) {
    case TieBreakPolicy::kLowestId:
      return *std::min_element(tied.begin(), tied.end(), [&](std::size_t a, std::size_t b) {
        return in.ids[a] < in.ids[b];
      });
    case TieBreakPolicy::kAdversarialPreference:
      for (std::size_t p : in.preferred) {
        if (std::find(tied.begin(), tied.end(), p) != tied.end()) return p;
      }
      [[fallthrough]];
    case TieBreakPolicy::kFirstInserted:
      break;
  }
  return *std::min_element(tied.begin(), tied.end());
}

void collect_paths(const NaiveTree& t, std::vector<std::size_t>& prefix,
                   std::vector<std::vector<std::size_t>>& out) {
  const auto kids = children(t, prefix.back());
  if (kids.empty()) {
    out.push_back(prefix);
    return;
  }
  for (std::size_t c : kids) {
    prefix.push_back(c);
    collect_paths(t, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

Weight naive_weight(const NaiveInput& in, std::size_t root) {
  Weight w = 0;
  switch (in.mode) {
    case ForkChoiceMode::kVanillaGhost:
      for (std::size_t i = 0; i < in.tree.parent.size(); ++i) w += in_subtree(in.tree, i, root) ? 1 : 0;
      break;
    case ForkChoiceMode::kCommitteeGhost: {
      std::set<std::pair<std::uint32_t, Slot>> pairs;
      for (const NaiveVote& v : in.votes) {
        if (v.slot < in.current_slot && in_subtree(in.tree, v.target, root)) pairs.insert({v.voter, v.slot});
      }
      w = static_cast<Weight>(pairs.size());
      break;
    }
    case ForkChoiceMode::kCommitteeGhostLmd: {
      std::map<std::uint32_t, NaiveVote> latest;
      for (const NaiveVote& v : in.votes) {
        auto it = latest.find(v.voter);
        if (it == latest.end() || v.slot > it->second.slot) latest[v.voter] = v;
      }
      for (const auto& [voter, v] : latest) {
        if (v.slot < in.current_slot && in_subtree(in.tree, v.target, root)) ++w;
      }
      break;
    }
  }
  if (in.boosted && in_subtree(in.tree, *in.boosted, root)) w += in.boost_weight;
  return w;
}

std::vector<std::size_t> naive_head_path(const NaiveInput& in) {
  std::vector<std::vector<std::size_t>> paths;
  std::vector<std::size_t> prefix{0};
  collect_paths(in.tree, prefix, paths);
  for (const auto& path : paths) {
    bool greedy = true;
    for (std::size_t step = 0; step + 1 < path.size() && greedy; ++step) {
      const auto kids = children(in.tree, path[step]);
      Weight best = 0;
      bool first = true;
      std::vector<std::size_t> tied;
      for (std::size_t c : kids) {
        const Weight w = naive_weight(in, c);
        if (first || w > best) {
          best = w;
          tied.assign(1, c);
          first = false;
        } else if (w == best) {
          tied.push_back(c);
        }
      }
      greedy = naive_tiebreak(in, tied) == path[step + 1];
    }
    if (greedy) return path;
  }
  throw std::logic_error("no greedy path");
}

NaiveTree random_tree(std::mt19937_64& rng, std::size_t max_blocks, Slot max_slot) {
  NaiveTree t;
  const std::size_t n = 1 + rng() % max_blocks;
  t.parent.push_back(0);
  t.slot.push_back(0);
  t.proposer.push_back(0);
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t parent = rng() % i;
    while (t.slot[parent] >= max_slot) parent = t.parent[parent];
    const Slot room = max_slot - t.slot[parent];
    t.parent.push_back(parent);
    t.slot.push_back(t.slot[parent] + 1 + static_cast<Slot>(rng() % static_cast<std::uint64_t>(std::min<Slot>(room, 3))));
    t.proposer.push_back(static_cast<std::uint32_t>(rng() % 4));
  }
  return t;
}

NaiveInput random_input(std::mt19937_64& rng, ForkChoiceMode mode) {
  constexpr Slot kMaxSlot = 10;
  NaiveInput in;
  in.mode = mode;
  in.tree = random_tree(rng, 12, kMaxSlot);
  const std::size_t n = in.tree.parent.size();
  const std::size_t num_votes = rng() % 41;
  for (std::size_t i = 0; i < num_votes; ++i) {
    NaiveVote v;
    if (!in.votes.empty() && rng() % 4 == 0) {
      const NaiveVote& prior = in.votes[rng() % in.votes.size()];
      v.voter = prior.voter;
      v.slot = prior.slot;
    } else {
      v.voter = static_cast<std::uint32_t>(rng() % 8);
      v.slot = 1 + static_cast<Slot>(rng() % (kMaxSlot + 1));
    }
    std::vector<std::size_t> eligible;
    for (std::size_t b = 0; b < n; ++b) {
      if (in.tree.slot[b] <= v.slot) eligible.push_back(b);
    }
    v.target = eligible[rng() % eligible.size()];
    in.votes.push_back(v);
  }
  in.current_slot = 1 + static_cast<Slot>(rng() % (kMaxSlot + 2));
  if (n > 1 && rng() % 2 == 0) {
    in.boosted = 1 + rng() % (n - 1);
    in.boost_weight = static_cast<Weight>(rng() % 11);
  }
  in.policy = static_cast<TieBreakPolicy>(rng() % 3);
  for (std::size_t b = 1; b < n; ++b) {
    if (rng() % 3 == 0) in.preferred.push_back(b);
  }
  std::shuffle(in.preferred.begin(), in.preferred.end(), rng);
  return in;
}

BoostState boost_of(const NaiveInput& in, const Materialized& m) {
  BoostState boost;
  if (in.boosted) {
    boost.boosted_block = m.ids[*in.boosted];
    boost.weight = in.boost_weight;
    boost.slot = in.current_slot;
  }
  return boost;
}

TieBreaker tiebreaker_of(const NaiveInput& in, const Materialized& m) {
  std::vector<BlockId> preferred;
  for (std::size_t p : in.preferred) preferred.push_back(m.ids[p]);
  return TieBreaker(in.policy, std::move(preferred));
}

SlotSchedule everyone_schedule(std::uint32_t num_validators, std::uint32_t num_adversarial,
                               Slot num_slots) {
  std::vector<SlotAssignment> slots;
  for (Slot s = 1; s <= num_slots; ++s) {
    SlotAssignment a;
    a.proposer = ValidatorId{0};
    a.adversarial_proposer = num_adversarial > 0;
    for (std::uint32_t v = 0; v < num_validators; ++v) a.committee.push_back(ValidatorId{v});
    slots.push_back(std::move(a));
  }
  return SlotSchedule(num_validators, num_adversarial, std::move(slots));
}

Materialized materialize(NaiveInput& in, std::uint32_t num_validators, Slot num_slots) {
  Materialized m;
  m.schedule = everyone_schedule(num_validators, 0, num_slots);
  m.ids.push_back(m.tree.genesis());
  for (std::size_t i = 1; i < in.tree.parent.size(); ++i) {
    BlockPtr b = make_block(in.tree.slot[i], ValidatorId{in.tree.proposer[i]}, m.ids[in.tree.parent[i]],
                            static_cast<std::uint32_t>(i));
    m.tree.append(b);
    m.ids.push_back(b->id);
  }
  in.ids.clear();
  for (BlockId id : m.ids) in.ids.push_back(id.value);
  for (const NaiveVote& v : in.votes) {
    record_vote(m.store, m.table, Vote{ValidatorId{v.voter}, v.slot, m.ids[v.target]}, in.mode);
  }
  return m;
}

namespace {

class DotLexer {
 public:
  explicit DotLexer(const std::string& text) : text_(text) {}

  std::optional<std::string> next() {
    skip_space();
    if (pos_ >= text_.size()) return std::nullopt;
    const char c = text_[pos_];
    if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      pos_ += 2;
      return "->";
    }
    if (std::string("{}[]=;,").find(c) != std::string::npos) {
      ++pos_;
      return std::string(1, c);
    }
    if (c == '"') {
      std::string out = "\"";
      ++pos_;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) out += text_[pos_++];
        out += text_[pos_++];
      }
      if (pos_ >= text_.size()) throw std::runtime_error("unterminated string");
      ++pos_;
      return out + "\"";
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-') {
      std::string out;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                     text_[pos_] == '_' || text_[pos_] == '.' ||
                                     (text_[pos_] == '-' && out.empty()))) {
        out += text_[pos_++];
      }
      return out;
    }
    throw std::runtime_error(std::string("unexpected character '") + c + "'");
  }

 private:
  void skip_space() {
    for (;;) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (text_.compare(pos_, 2, "//") == 0) {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        continue;
      }
      return;
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

bool is_id(const std::string& tok) {
  return !tok.empty() && std::string("{}[]=;,").find(tok[0]) == std::string::npos && tok != "->";
}

std::string unquote(const std::string& tok) {
  if (tok.size() >= 2 && tok.front() == '"') return tok.substr(1, tok.size() - 2);
  return tok;
}

}  // namespace

DotGraph parse_dot(const std::string& text) {
  DotLexer lex(text);
  std::vector<std::string> toks;
  while (auto t = lex.next()) toks.push_back(*t);
  std::size_t i = 0;
  auto peek = [&]() -> const std::string& {
    static const std::string end;
    return i < toks.size() ? toks[i] : end;
  };
  auto expect = [&](const std::string& want) {
    if (peek() != want) throw std::runtime_error("expected '" + want + "' got '" + peek() + "'");
    ++i;
  };
  auto id = [&]() {
    if (!is_id(peek())) throw std::runtime_error("expected identifier, got '" + peek() + "'");
    return unquote(toks[i++]);
  };
  auto attr_list = [&]() {
    std::map<std::string, std::string> attrs;
    expect("[");
    while (peek() != "]") {
      const std::string key = id();
      expect("=");
      attrs[key] = id();
      if (peek() == "," || peek() == ";") ++i;
    }
    expect("]");
    return attrs;
  };

  DotGraph g;
  expect("digraph");
  if (peek() != "{") g.name = id();
  expect("{");
  while (peek() != "}") {
    if (i >= toks.size()) throw std::runtime_error("unexpected end of input");
    const std::string first = id();
    if (first == "node" || first == "edge" || first == "graph") {
      attr_list();
    } else if (peek() == "=") {
      ++i;
      g.graph_attrs[first] = id();
    } else if (peek() == "->") {
      ++i;
      const std::string second = id();
      if (peek() == "[") attr_list();
      g.edges.emplace_back(first, second);
    } else {
      if (g.node_attrs.contains(first)) throw std::runtime_error("node declared twice: " + first);
      g.nodes.push_back(first);
      g.node_attrs[first] = peek() == "[" ? attr_list() : std::map<std::string, std::string>{};
    }
    if (peek() == ";") ++i;
  }
  expect("}");
  if (i != toks.size()) throw std::runtime_error("trailing tokens after graph");
  return g;
}

std::uint32_t recount_displaced(const std::string& jsonl) {
  struct Minted {
    std::string parent;
    bool adversarial;
  };
  std::unordered_map<std::string, Minted> blocks;
  std::vector<std::string> order;
  std::vector<std::string> heads;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    if (!j.contains("type")) continue;
    const std::string type = j["type"];
    if (type == "mint") {
      const std::string id = j["block"];
      if (blocks.emplace(id, Minted{j["parent"], j["adversarial"]}).second) order.push_back(id);
    } else if (type == "final_view") {
      heads.push_back(j["head"]);
    }
  }
  std::unordered_set<std::string> on_some_chain;
  for (std::string id : heads) {
    while (blocks.contains(id)) {
      on_some_chain.insert(id);
      id = blocks[id].parent;
    }
  }
  std::uint32_t displaced = 0;
  for (const std::string& id : order) {
    if (!blocks[id].adversarial && !on_some_chain.contains(id)) ++displaced;
  }
  return displaced;
}

}  // namespace ghostsim::testing
