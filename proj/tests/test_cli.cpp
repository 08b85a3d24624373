#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "ced/cli.hpp"
#include "ced/rules.hpp"

using namespace ced;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;

  TempDir() {
    path = fs::temp_directory_path() / ("ced_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const char* name) const { return (path / name).string(); }

  static int& counter() {
    static int value = 0;
    return value;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

int cli(std::initializer_list<std::string> args) { return run_cli(std::vector<std::string>(args)); }

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("validate accepts the builtins and rejects a non-total rule") {
  TempDir dir;
  const auto good = dir.file("good.ced");
  write_file(good, builtin_rules_text());
  CHECK(cli({"validate", "--rules", good}) == 0);

  const auto bad = dir.file("bad.ced");
  write_file(bad, "automaton e9 { state s { on walk -> s; } }\n");
  CHECK(cli({"validate", "--rules", bad}) == 2);

  CHECK(cli({"validate", "--rules", dir.file("missing.ced")}) == 3);
  CHECK(cli({"validate"}) == 1);  // --rules is required
}

TEST_CASE("gen writes byte-identical files for the same seed and any job count") {
  TempDir dir;
  const auto a = dir.file("a.jsonl");
  const auto b = dir.file("b.jsonl");
  const auto c = dir.file("c.jsonl");
  CHECK(cli({"gen", "--n", "40", "--span", "5m", "--seed", "42", "--out", a}) == 0);
  CHECK(cli({"gen", "--n", "40", "--span", "5m", "--seed", "42", "--out", b}) == 0);
  CHECK(cli({"gen", "--n", "40", "--span", "5m", "--seed", "42", "--jobs", "4", "--out", c}) == 0);
  const auto bytes = slurp(a);
  CHECK(bytes == slurp(b));
  CHECK(bytes == slurp(c));
  CHECK(bytes.find("\"labels\"") != std::string::npos);

  const auto noisy = dir.file("noisy.jsonl");
  CHECK(cli({"gen", "--n", "5", "--span", "60w", "--seed", "1", "--noise", "0.9", "--out",
             noisy}) == 0);
  CHECK(slurp(noisy).find("\"soft\"") != std::string::npos);
}

TEST_CASE("gen -> detect -> eval is a clean pipeline on clean data") {
  TempDir dir;
  const auto data = dir.file("data.jsonl");
  const auto pred = dir.file("pred.jsonl");
  const auto report = dir.file("report.json");
  REQUIRE(cli({"gen", "--n", "50", "--span", "5m", "--seed", "7", "--out", data}) == 0);
  REQUIRE(cli({"detect", "--mode", "crisp", "--in", data, "--out", pred}) == 0);
  REQUIRE(cli({"eval", "--pred", pred, "--truth", data, "--report", report}) == 0);
  const std::string doc = slurp(report);
  CHECK(doc.find("\"length_accuracy\": 1.0") != std::string::npos);
  CHECK(doc.find("\"average\": 1.0") != std::string::npos);
  CHECK(doc.find("null") == std::string::npos);  // every type occurs in 50 traces

  // detect is deterministic and parallel-safe too
  const auto pred4 = dir.file("pred4.jsonl");
  REQUIRE(cli({"detect", "--mode", "crisp", "--in", data, "--jobs", "4", "--out", pred4}) == 0);
  CHECK(slurp(pred) == slurp(pred4));
}

TEST_CASE("detect needs soft distributions for argmax and belief modes") {
  TempDir dir;
  const auto data = dir.file("data.jsonl");
  REQUIRE(cli({"gen", "--n", "3", "--span", "36w", "--seed", "3", "--out", data}) == 0);
  CHECK(cli({"detect", "--mode", "argmax", "--in", data, "--out", dir.file("p.jsonl")}) == 2);

  const auto noisy = dir.file("noisy.jsonl");
  REQUIRE(cli({"gen", "--n", "3", "--span", "36w", "--seed", "3", "--noise", "0.9", "--out",
               noisy}) == 0);
  CHECK(cli({"detect", "--mode", "argmax", "--in", noisy, "--out", dir.file("p1.jsonl")}) == 0);
  CHECK(cli({"detect", "--mode", "belief:0.5", "--in", noisy, "--out", dir.file("p2.jsonl")}) ==
        0);
  CHECK(cli({"detect", "--mode", "belief:2", "--in", noisy, "--out", dir.file("p3.jsonl")}) == 2);
  CHECK(cli({"detect", "--mode", "sideways", "--in", noisy, "--out", dir.file("p4.jsonl")}) == 1);
}

TEST_CASE("detect --timing records per-window latencies") {
  TempDir dir;
  const auto data = dir.file("data.jsonl");
  const auto pred = dir.file("pred.jsonl");
  REQUIRE(cli({"gen", "--n", "2", "--span", "36w", "--seed", "5", "--out", data}) == 0);
  REQUIRE(cli({"detect", "--mode", "crisp", "--timing", "--in", data, "--out", pred}) == 0);
  CHECK(slurp(pred).find("per_window_latency_ns") != std::string::npos);
}

TEST_CASE("label fills ground truth via the labelers or the engine") {
  TempDir dir;
  const auto data = dir.file("data.jsonl");
  REQUIRE(cli({"gen", "--n", "4", "--span", "60w", "--seed", "11", "--out", data}) == 0);

  // strip the labels, then restore them
  const auto stripped = dir.file("stripped.jsonl");
  {
    std::ifstream in(data);
    std::ofstream out(stripped, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      const auto at = line.find(",\"labels\":");
      REQUIRE(at != std::string::npos);
      const auto end = line.find(",\"seed\":");
      out << line.substr(0, at) << line.substr(end) << '\n';
    }
  }
  const auto relabeled = dir.file("relabeled.jsonl");
  REQUIRE(cli({"label", "--in", stripped, "--out", relabeled}) == 0);
  CHECK(slurp(relabeled) == slurp(data));  // canonical field order restores the bytes

  // a custom rule file goes through the engine path and its own catalog
  const auto rules = dir.file("custom.ced");
  write_file(rules,
             "automaton eat_alert { state s { on eat -> s emit; otherwise -> s; } }\n");
  const auto custom = dir.file("custom.jsonl");
  REQUIRE(cli({"label", "--rules", rules, "--in", stripped, "--out", custom}) == 0);
  CHECK(slurp(custom).find("eat_alert") != std::string::npos);
}

TEST_CASE("eval failures exit with code 2") {
  TempDir dir;
  const auto data = dir.file("data.jsonl");
  const auto pred = dir.file("pred.jsonl");
  REQUIRE(cli({"gen", "--n", "2", "--span", "36w", "--seed", "2", "--out", data}) == 0);
  write_file(pred, "{\"id\":\"nope\",\"labels\":[[]]}\n{\"id\":\"t-000001\",\"labels\":[[]]}\n");
  CHECK(cli({"eval", "--pred", pred, "--truth", data, "--report", dir.file("r.json")}) == 2);
}

TEST_CASE("bench prints a latency report") {
  CHECK(cli({"bench", "--span", "3m", "--trials", "2", "--seed", "9"}) == 0);
}

TEST_SUITE_END();
