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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vebpf/assembler.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "vebpf_cli_test.log";
  const std::string cmd = std::string("\"") + VEBPF_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path scratch(const std::string& name) { return fs::temp_directory_path() / ("vebpf_cli_" + name); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("malformed assembly exits 1 with the line number") {
    const auto src = scratch("bad.asm");
    std::ofstream(src) << ".rule a\n    mov r0, 2\n    frobnicate r1\n    exit\n";
    const auto r = run_cli("asm \"" + src.string() + "\" -o \"" + scratch("bad.bin").string() + "\"");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("line 3") != std::string::npos);
  }

  TEST_CASE("asm and disasm round trip") {
    const auto src = fs::path(VEBPF_SOURCE_DIR) / "rules" / "type4.asm";
    const auto bin = scratch("t4.bin");
    const auto listing = scratch("t4.asm");
    REQUIRE(run_cli("asm \"" + src.string() + "\" -o \"" + bin.string() + "\"").exit_code == 0);
    REQUIRE(run_cli("disasm \"" + bin.string() + "\" -o \"" + listing.string() + "\"").exit_code == 0);
    std::ifstream a(src), b(listing);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(vebpf::isa::assemble(sa.str()) == vebpf::isa::assemble(sb.str()));
    CHECK(vebpf::isa::load_flat(bin) == vebpf::isa::assemble(sa.str()));
  }

  TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("run --cores 0 --count 3").exit_code == 1);
    CHECK(run_cli("no-such-command").exit_code == 1);
    CHECK(run_cli("run --config \"" + scratch("missing.json").string() + "\"").exit_code == 1);
  }

  TEST_CASE("run prints a summary and writes a CSV report") {
    const auto out = scratch("report.csv");
    const auto r = run_cli("run --count 20 --sweep 1,12 --format csv --out \"" + out.string() + "\"");
    CHECK(r.exit_code == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("n_cores,pkt_id", 0) == 0);
  }

  TEST_CASE("trace emits JSON lines") {
    const auto r = run_cli("trace --count 1");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"module\":\"arbiter\"") != std::string::npos);
  }
}
