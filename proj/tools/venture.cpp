// venture: run instruction scripts or an interactive session.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "venture/engine.hpp"
#include "venture/errors.hpp"

using namespace venture;

namespace {

std::uint64_t defaultSeed() {
  if (const char* s = std::getenv("VENTURE_SEED")) return std::strtoull(s, nullptr, 10);
  return 0;
}

void emit(const InstructionResult& r, bool json) {
  if (!r.value) return;
  if (json)
    std::cout << r.toJson().dump() << "\n";
  else
    std::cout << r.toText() << "\n";
}

int runScript(const std::string& path, std::uint64_t seed, bool json) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    return 1;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  Engine engine(seed);
  try {
    for (const auto& instr : parseProgram(ss.str())) emit(engine.execute(instr), json);
  } catch (const std::exception& e) {
    std::cout.flush();
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int bracketDepth(const std::string& s) {
  int depth = 0;
  for (char c : s) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
  }
  return depth;
}

BlockSpec parseBlock(const std::string& word) {
  BlockSpec b;
  if (word == "one") b.mode = BlockMode::One;
  else if (word == "all") b.mode = BlockMode::All;
  else if (word == "ordered") b.mode = BlockMode::Ordered;
  else {
    b.mode = BlockMode::Literal;
    b.literal = parseExpression(word);
  }
  return b;
}

void command(Engine& engine, const std::string& line) {
  std::istringstream is(line);
  std::string cmd;
  is >> cmd;
  if (cmd == ":trace-dot") {
    std::string file;
    is >> file;
    std::ofstream(file) << engine.trace().toDot();
    std::cout << "wrote " << file << "\n";
  } else if (cmd == ":scaffold") {
    std::string scope, block, file;
    is >> scope >> block >> file;
    Selection sel = selectPrincipals(engine.trace(), parseExpression(scope), parseBlock(block));
    Scaffold sc = constructScaffold(engine.trace(), sel.sets);
    std::ofstream(file) << engine.trace().toDot(&sc);
    std::cout << sc.toJson().dump() << "\n";
  } else if (cmd == ":stats") {
    auto& st = engine.trace().stats();
    nlohmann::json j = engine.trace().summary();
    j["nodeVisits"] = st.nodeVisits;
    j["transitions"] = st.transitions;
    j["accepted"] = st.accepted;
    j["scopeViolations"] = st.scopeViolations;
    j["rejectionAttempts"] = st.rejectionAttempts;
    j["retries"] = engine.retries();
    std::cout << j.dump() << "\n";
  } else if (cmd == ":seed") {
    std::uint64_t s = 0;
    is >> s;
    engine.reseed(s);
  } else {
    std::cout << "unknown command " << cmd << "\n";
  }
}

int repl(std::uint64_t seed, bool json) {
  Engine engine(seed);
  std::string line, pending;
  while (std::cout << (pending.empty() ? "venture> " : "... ") << std::flush, std::getline(std::cin, line)) {
    if (pending.empty() && (line == ":quit" || line == ":q")) break;
    if (pending.empty() && !line.empty() && line[0] == ':') {
      try {
        command(engine, line);
      } catch (const std::exception& e) {
        std::cout << "error: " << e.what() << "\n";
      }
      continue;
    }
    pending += line + "\n";
    if (bracketDepth(pending) > 0) continue;
    try {
      for (const auto& instr : parseProgram(pending)) emit(engine.execute(instr), json);
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << "\n";
    }
    pending.clear();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probabilistic programming virtual machine"};
  app.require_subcommand(1);
  std::uint64_t seed = defaultSeed();
  bool text = false;

  auto* run = app.add_subcommand("run", "execute a script");
  std::string script;
  run->add_option("script", script, "instruction file")->required();
  run->add_option("--seed", seed, "generator seed");
  auto* jsonFlag = run->add_flag("--json", "one JSON object per result (default)");
  run->add_flag("--text", text, "plain text results")->excludes(jsonFlag);

  auto* rep = app.add_subcommand("repl", "interactive session");
  rep->add_option("--seed", seed, "generator seed");
  rep->add_flag("--text", text, "plain text results");

  CLI11_PARSE(app, argc, argv);
  if (run->parsed()) return runScript(script, seed, !text);
  return repl(seed, !text);
}
