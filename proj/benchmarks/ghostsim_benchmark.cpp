#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ghostsim/engine.hpp"
#include "ghostsim/forkchoice.hpp"
#include "ghostsim/io.hpp"

namespace ghostsim {
namespace {

constexpr std::uint32_t kVoters = 128;

struct RandomView {
  BlockTree tree;
  VoteStore store;
  LatestMessageTable table;
  Slot max_slot = 0;
};

RandomView build_view(std::size_t blocks, ForkChoiceMode mode, std::uint64_t seed) {
  RandomView view;
  std::mt19937_64 rng(seed);
  std::vector<BlockId> ids{view.tree.genesis()};
  std::vector<Slot> slots{0};
  for (std::size_t i = 1; i < blocks; ++i) {
    const std::size_t parent = i - 1 - rng() % std::min<std::size_t>(i, 4);
    const Slot slot = slots[parent] + 1 + static_cast<Slot>(rng() % 2);
    BlockPtr b = make_block(slot, ValidatorId{static_cast<std::uint32_t>(rng() % kVoters)}, ids[parent],
                            static_cast<std::uint32_t>(i));
    view.tree.append(b);
    ids.push_back(b->id);
    slots.push_back(slot);
    view.max_slot = std::max(view.max_slot, slot);
  }
  for (std::size_t i = 1; i < blocks; ++i) {
    for (int k = 0; k < 8; ++k) {
      const Vote v{ValidatorId{static_cast<std::uint32_t>(rng() % kVoters)}, slots[i], ids[i]};
      record_vote(view.store, view.table, v, mode);
    }
  }
  return view;
}

void BM_GhostHead(benchmark::State& state, ForkChoiceMode mode) {
  const RandomView view = build_view(static_cast<std::size_t>(state.range(0)), mode, 42);
  const ForkChoiceContext ctx{view.tree, view.store, view.table, mode, {}, view.max_slot + 1};
  const TieBreaker tiebreak;
  for (auto _ : state) benchmark::DoNotOptimize(ghost_head(ctx, tiebreak));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK_CAPTURE(BM_GhostHead, vanilla, ForkChoiceMode::kVanillaGhost)->Range(64, 4096);
BENCHMARK_CAPTURE(BM_GhostHead, committee, ForkChoiceMode::kCommitteeGhost)->Range(64, 4096);
BENCHMARK_CAPTURE(BM_GhostHead, lmd, ForkChoiceMode::kCommitteeGhostLmd)->Range(64, 4096);

void BM_RunPreset(benchmark::State& state, const char* name) {
  const SimConfig config = preset(name);
  for (auto _ : state) benchmark::DoNotOptimize(run(config));
  state.SetItemsProcessed(state.iterations() * config.num_slots);
}

BENCHMARK_CAPTURE(BM_RunPreset, avalanche_fig, "avalanche-fig1-4")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunPreset, avalanche_vanilla, "avalanche-pos-ghost")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunPreset, avalanche_committee, "avalanche-committee-ghost")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunPreset, balancing, "balancing-fig-sequence")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunPreset, baseline, "baseline")->Unit(benchmark::kMillisecond);

void BM_ExportTrace(benchmark::State& state) {
  const Trace trace = run(preset("balancing-fig-sequence"));
  for (auto _ : state) benchmark::DoNotOptimize(export_trace(trace));
}

BENCHMARK(BM_ExportTrace)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace ghostsim

BENCHMARK_MAIN();
