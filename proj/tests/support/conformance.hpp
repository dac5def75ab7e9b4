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

// Differential run of the library core against the reference interpreter
// on generated programs.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "program_gen.hpp"
#include "reference_vm.hpp"
#include "vebpf/core.hpp"

namespace conformance {

inline constexpr std::size_t kDataDepth = 136;
inline constexpr std::uint64_t kBudget = 300;

struct Mismatch {
  std::uint64_t trial;
  std::string detail;
};

inline refvm::Fault to_ref(std::optional<vebpf::vcore::CoreError> e) {
  using vebpf::vcore::CoreError;
  if (!e) return refvm::Fault::None;
  switch (*e) {
    case CoreError::OutOfBoundsLoad: return refvm::Fault::OutOfBoundsLoad;
    case CoreError::OutOfBoundsStore: return refvm::Fault::OutOfBoundsStore;
    case CoreError::PcOutOfRange: return refvm::Fault::PcOutOfRange;
    case CoreError::UnknownOpcode: return refvm::Fault::UnknownOpcode;
    case CoreError::UnknownHelper: return refvm::Fault::UnknownHelper;
    case CoreError::TickBudgetExceeded: return refvm::Fault::TickBudget;
  }
  return refvm::Fault::None;
}

struct Stats {
  std::uint64_t trials = 0;
  std::uint64_t faulted = 0;
  std::uint64_t instructions = 0;
  std::vector<Mismatch> mismatches;
};

inline Stats run(std::uint64_t seed, std::uint64_t trials) {
  progen::Generator gen(seed);
  vebpf::vcore::CallHandlerRegistry helpers;
  helpers.add(progen::kKnownHelper, [](std::span<const std::uint64_t, 5> a) {
    return vebpf::vcore::HelperResult{progen::helper_fn(a[0], a[1], a[2], a[3], a[4]), progen::kHelperExtraTicks};
  });

  Stats stats;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::size_t words = 4 + gen.below(60);
    const progen::Program prog = gen.make(words, kDataDepth);
    std::vector<std::uint8_t> data(kDataDepth);
    for (auto& b : data) b = static_cast<std::uint8_t>(gen.next());
    std::array<std::uint64_t, 5> inputs{0, kDataDepth, gen.next(), gen.below(200), gen.next() >> gen.below(64)};

    refvm::Vm ref(prog.bytes, data);
    ref.add_helper(progen::kKnownHelper, {progen::helper_fn, progen::kHelperExtraTicks});
    const refvm::Outcome want = ref.run(0, inputs, kBudget);

    vebpf::vcore::Core core({prog.words.size(), kDataDepth, kBudget}, &helpers);
    for (std::size_t i = 0; i < prog.words.size(); ++i) core.write_prog_word(i, prog.words[i]);
    for (std::size_t i = 0; i < data.size(); ++i) core.write_data_word(i, data[i], 1);
    for (unsigned r = 1; r <= 5; ++r) core.set_input_register(r, inputs[r - 1]);
    core.reset(0);
    core.release();
    core.run_until_halt();

    ++stats.trials;
    stats.instructions += core.retired();
    if (core.errored()) ++stats.faulted;
    const refvm::Fault got_fault = to_ref(core.error());
    std::string diff;
    if (core.r0() != want.r0) diff += " r0 " + std::to_string(core.r0()) + " vs " + std::to_string(want.r0);
    if (got_fault != want.fault) {
      diff += std::string(" fault ") + refvm::fault_name(got_fault) + " vs " + refvm::fault_name(want.fault);
    }
    if (core.ticks() != want.ticks) diff += " ticks " + std::to_string(core.ticks()) + " vs " + std::to_string(want.ticks);
    for (unsigned r = 0; r < 11 && diff.empty(); ++r) {
      if (core.regs()[r] != want.regs[r]) diff += " r" + std::to_string(r) + " differs";
    }
    if (!diff.empty()) stats.mismatches.push_back({t, diff});
  }
  return stats;
}

}  // namespace conformance
