/*
 * Copyright 2026 The vebpf-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include "vebpf/assembler.hpp"
#include "vebpf/core.hpp"
#include "vebpf/engine.hpp"
#include "vebpf/experiment.hpp"
#include "vebpf/rules.hpp"

using namespace vebpf;

namespace {

pktio::HeaderSlice benign_header() {
  const pktio::Packet pkt{pktio::make_udp_frame(0x0a000001, 0xc0a80001, 1234, 4000, 64)};
  return pktio::slice_header(pkt, pktio::AutoSlice{}, 136);
}

void BM_CoreStepLoop(benchmark::State& state) {
  const auto image = isa::assemble(
      ".rule loop\n mov r0, 0\n mov r2, 1000\nhead:\n add r0, r2\n xor r0, 0x55\n sub r2, 1\n jne r2, 0, head\n"
      " mov r0, 2\n exit\n");
  vcore::CoreConfig cfg;
  cfg.tick_budget = 1 << 20;
  vcore::Core core(cfg);
  for (std::size_t i = 0; i < image.words.size(); ++i) core.write_prog_word(i, image.words[i]);
  std::uint64_t insns = 0;
  for (auto _ : state) {
    core.assert_reset();
    core.reset(0);
    core.release();
    core.run_until_halt();
    insns += core.retired();
  }
  state.counters["insn/s"] = benchmark::Counter(static_cast<double>(insns), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_CoreStepLoop);

void BM_ProcessPacket(benchmark::State& state) {
  manycore::EngineConfig cfg;
  cfg.n_cores = static_cast<std::size_t>(state.range(0));
  manycore::Engine engine(cfg);
  engine.upload_rules(rules::build_ruleset(std::vector<int>{4}));
  const auto hdr = benign_header();
  for (auto _ : state) benchmark::DoNotOptimize(engine.process_packet(hdr));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ProcessPacket)->Arg(1)->Arg(4)->Arg(12)->Arg(17);

void BM_Baseline(benchmark::State& state) {
  const auto image = rules::build_ruleset(std::vector<int>{4});
  const auto hdr = benign_header();
  for (auto _ : state) benchmark::DoNotOptimize(rules::baseline_run(image, hdr, {}));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Baseline);

void BM_AssembleRuleset(benchmark::State& state) {
  const auto text = rules::ruleset_assembly(std::vector<int>{4});
  for (auto _ : state) benchmark::DoNotOptimize(isa::assemble(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_AssembleRuleset);

void BM_RunPoint(benchmark::State& state) {
  experiment::RunConfig cfg;
  pktio::TrafficSpec spec;
  spec.count = 1000;
  spec.mix = pktio::TrafficMix::Type4;
  spec.malicious_fraction = 0.3;
  cfg.traffic = spec;
  const auto image = experiment::load_ruleset(cfg);
  const auto packets = experiment::load_packets(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(experiment::simulate_point(cfg, image, packets, 12));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(packets.size()));
}
BENCHMARK(BM_RunPoint)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
