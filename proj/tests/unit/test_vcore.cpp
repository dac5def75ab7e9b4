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

#include <doctest.h>

#include <random>

#include "../support/conformance.hpp"
#include "vebpf/assembler.hpp"
#include "vebpf/core.hpp"
#include "vebpf/error.hpp"

using namespace vebpf;
using namespace vebpf::vcore;

namespace {

Core loaded(std::string_view text, CoreConfig cfg = {}, const CallHandlerRegistry* helpers = nullptr) {
  const auto img = isa::assemble(text);
  Core core(cfg, helpers);
  for (std::size_t i = 0; i < img.words.size(); ++i) core.write_prog_word(i, img.words[i]);
  return core;
}

Core run_text(std::string_view text, CoreConfig cfg = {}) {
  Core core = loaded(text, cfg);
  core.reset(0);
  core.release();
  core.run_until_halt();
  return core;
}

}  // namespace

TEST_SUITE("vcore") {
  TEST_CASE("arithmetic edge cases") {
    CHECK(run_text("mov r0, 7\ndiv r0, 0\nexit").r0() == 0);
    CHECK(run_text("mov r0, 7\nmod r0, 0\nexit").r0() == 7);
    CHECK(run_text("mov r0, 1\nlsh r0, 65\nexit").r0() == 2);           // shift masked to 63
    CHECK(run_text("mov32 r0, 1\nlsh32 r0, 33\nexit").r0() == 2);       // masked to 31
    CHECK(run_text("mov r0, -1\nadd32 r0, 1\nexit").r0() == 0);         // 32-bit wrap, zero-extended
    CHECK(run_text("mov r0, -8\narsh r0, 1\nexit").r0() == static_cast<std::uint64_t>(-4));
    CHECK(run_text("mov r0, 5\nneg r0\nexit").r0() == static_cast<std::uint64_t>(-5));
    CHECK(run_text("lddw r0, 0x1122334455667788\nbe16 r0\nexit").r0() == 0x8877);
    CHECK(run_text("lddw r0, 0x1122334455667788\nle32 r0\nexit").r0() == 0x55667788);
  }

  TEST_CASE("exit after k instructions costs k ticks") {
    Core c = run_text("mov r0, 1\nmov r1, 2\nexit");
    CHECK(c.halted());
    CHECK(c.ticks() == 3);
    CHECK(c.retired() == 3);
    CHECK(c.status() == CoreStatus::Halted);
  }

  TEST_CASE("tick budget") {
    CoreConfig cfg;
    cfg.tick_budget = 1000;
    Core c = run_text("ja -1\nexit", cfg);
    CHECK(c.errored());
    CHECK(c.error() == CoreError::TickBudgetExceeded);
    CHECK(c.ticks() == 1001);

    Core exact = run_text("mov r0, 1\nexit", CoreConfig{4096, 136, 2});
    CHECK(exact.halted());
  }

  TEST_CASE("memory map") {
    Core stack = run_text("mov r1, 77\nstxdw [r10-8], r1\nldxdw r0, [r10-8]\nexit");
    CHECK(stack.r0() == 77);
    CHECK(run_text("ldxb r0, [r10+0]\nexit").error() == CoreError::OutOfBoundsLoad);
    CHECK(run_text("stb [r10-513], 1\nexit").error() == CoreError::OutOfBoundsStore);
    CHECK(run_text("ldxdw r0, [r1+129]\nexit").error() == CoreError::OutOfBoundsLoad);
    CHECK(run_text("ldxdw r0, [r1+128]\nexit").halted());
    Core wrote = run_text("stw [r1+4], 0x01020304\nexit");
    CHECK(wrote.data_mem()[4] == 0x04);
    CHECK(wrote.data_mem()[7] == 0x01);
  }

  TEST_CASE("faulting instruction is not retired") {
    Core c = run_text("mov r0, 1\nldxb r0, [r10+8]\nexit");
    CHECK(c.retired() == 1);
    CHECK(c.ticks() == 1);
    CHECK(c.r0() == 1);
  }

  TEST_CASE("pc runs off the program") {
    Core c = loaded("ja +5\nexit", CoreConfig{2, 136, 100});
    c.reset(0);
    c.release();
    c.run_until_halt();
    CHECK(c.error() == CoreError::PcOutOfRange);
  }

  TEST_CASE("call handlers") {
    CallHandlerRegistry helpers;
    helpers.add(3, [](std::span<const std::uint64_t, 5> a) { return HelperResult{a[0] + a[1], 5}; });
    Core c = loaded("mov r1, 2\nmov r2, 40\ncall 3\nexit", {}, &helpers);
    c.reset(0);
    c.release();
    c.run_until_halt();
    CHECK(c.r0() == 42);
    CHECK(c.ticks() == 4 + 5);
    CHECK(c.regs()[1] == 2);

    Core unknown = loaded("call 9\nexit", {}, &helpers);
    unknown.reset(0);
    unknown.release();
    unknown.run_until_halt();
    CHECK(unknown.error() == CoreError::UnknownHelper);
  }

  TEST_CASE("bus writes and reset need the core in reset") {
    Core c = loaded("exit");
    c.reset(0);
    c.release();
    CHECK_THROWS_AS(c.write_prog_word(0, 0x95), Error);
    CHECK_THROWS_AS(c.write_data_word(0, 1, 1), Error);
    CHECK_THROWS_AS(c.reset(0), Error);
    c.assert_reset();
    CHECK_NOTHROW(c.write_data_word(0, 1, 1));
    CHECK_THROWS_AS(c.reset(4096), Error);
    CHECK_THROWS_AS(c.write_data_word(130, 0, 8), Error);
  }

  TEST_CASE("step while held in reset does nothing") {
    Core c = loaded("mov r0, 1\nexit");
    c.reset(0);
    CHECK(c.step() == CoreStatus::Running);
    CHECK(c.ticks() == 0);
  }

  TEST_CASE("reset preserves r1-r5 and clears the rest (10^4 random resets)") {
    Core c = loaded("mov r0, 9\nmov r6, 9\nmov r7, 9\nmov r8, 9\nmov r9, 9\nexit");
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
      std::array<std::uint64_t, 5> in{rng(), rng(), rng(), rng(), rng()};
      c.assert_reset();
      for (unsigned r = 1; r <= 5; ++r) c.set_input_register(r, in[r - 1]);
      if (rng() % 2) {
        c.reset(0);
        c.release();
        c.run_until_halt();
        c.assert_reset();
      }
      const std::size_t pc = rng() % 6;
      REQUIRE(c.reset(pc) == kResetCycles);
      REQUIRE(c.pc() == pc);
      for (unsigned r = 1; r <= 5; ++r) REQUIRE(c.regs()[r] == in[r - 1]);
      REQUIRE(c.regs()[0] == 0);
      for (unsigned r = 6; r <= 9; ++r) REQUIRE(c.regs()[r] == 0);
      REQUIRE(c.regs()[10] == kStackTop);
      REQUIRE(c.ticks() == 0);
      REQUIRE_FALSE(c.halted());
      REQUIRE_FALSE(c.errored());
    }
  }

  TEST_CASE("differential check against the reference interpreter") {
    const auto stats = conformance::run(2024, 2000);
    for (const auto& m : stats.mismatches) {
      INFO("trial " << m.trial << ":" << m.detail);
      CHECK(false);
    }
    CHECK(stats.faulted > 0);
    CHECK(stats.faulted < stats.trials);
  }
}
