#include <doctest.h>

#include <map>
#include <sstream>

#include "procedit/cli.hpp"
#include "stub_server.hpp"
#include "support.hpp"

using namespace procedit;
using namespace procedit::cli;

namespace {

struct Harness {
  std::istringstream in;
  std::ostringstream out;
  std::ostringstream err;
  std::map<std::string, std::string> env;
  std::vector<std::string> transports_made;
  std::shared_ptr<RefusingTransport> refusing = std::make_shared<RefusingTransport>();
  bool allow_network = false;

  int run(std::vector<std::string> args) {
    out.str("");
    err.str("");
    args.insert(args.begin(), "procedit");
    CliIo io{in, out, err,
             [this](const std::string& name) -> std::optional<std::string> {
               auto it = env.find(name);
               if (it == env.end()) return std::nullopt;
               return it->second;
             },
             [this](const std::string& base_url) -> std::shared_ptr<Transport> {
               transports_made.push_back(base_url);
               if (allow_network) return make_http_transport(base_url);
               return refusing;
             }};
    return dispatch(args, io);
  }
};

std::string src(const std::string& relative) { return testing::source_path(relative).string(); }

} // namespace

TEST_CASE("apply-edits with an empty edit file reproduces the input") {
  testing::TempDir dir("cli");
  testing::write_file(dir / "p.txt", "1. Boil water.\n2. Add pasta, salt (a pinch).\n3. Drain.\n");
  testing::write_file(dir / "none.txt", "");
  Harness h;
  CHECK(h.run({"apply-edits", "--procedure", (dir / "p.txt").string(), "--edits", (dir / "none.txt").string()}) == kOk);
  CHECK(h.out.str() == testing::read_file(dir / "p.txt"));
}

TEST_CASE("apply-edits applies and reports drops") {
  testing::TempDir dir("cli");
  testing::write_file(dir / "p.txt", "1. a\n2. b\n");
  testing::write_file(dir / "e.txt", "insert(0, z)\nreplace(2, )\nreplace(7, x)\nnonsense\n");
  Harness h;
  CHECK(h.run({"apply-edits", "--procedure", (dir / "p.txt").string(), "--edits", (dir / "e.txt").string()}) == kOk);
  CHECK(h.out.str() == "1. z\n2. a\n");
  CHECK(h.err.str().find("replace(7, x)") != std::string::npos);
  CHECK(h.run({"apply-edits", "--strict", "--procedure", (dir / "p.txt").string(), "--edits",
               (dir / "e.txt").string()}) == kInvalidInput);
}

TEST_CASE("parse-edits and diff") {
  testing::TempDir dir("cli");
  testing::write_file(dir / "e.txt", "- INSERT( 1 , \"x\" )\nhello\n");
  Harness h;
  CHECK(h.run({"parse-edits", (dir / "e.txt").string()}) == kOk);
  CHECK(h.out.str() == "insert(1, x)\n");
  CHECK(h.err.str().find("line 2") != std::string::npos);
  CHECK(h.run({"parse-edits", "--strict", (dir / "e.txt").string()}) == kInvalidInput);

  h.in.str("replace(2, y)\n");
  CHECK(h.run({"parse-edits", "-"}) == kOk);
  CHECK(h.out.str() == "replace(2, y)\n");

  testing::write_file(dir / "a.txt", "1. a\n2. b\n3. c\n");
  testing::write_file(dir / "b.txt", "1. a\n2. B\n3. c\n4. d\n");
  CHECK(h.run({"diff", (dir / "a.txt").string(), (dir / "b.txt").string()}) == kOk);
  CHECK(h.out.str() == "replace(2, B)\ninsert(3, d)\n");
}

TEST_CASE("report prints the main results rows") {
  Harness h;
  CHECK(h.run({"report", "--judgments", src("data/fixtures/table1_judgments.jsonl")}) == kOk);
  std::string out = h.out.str();
  for (const char* value : {"60.68%", "72.33%", "51.94%", "54.85%", "71.36%", "47.09%", "53.88%", "70.87%", "45.63%",
                            "42.23%", "63.59%", "34.47%"})
    CHECK(out.find(value) != std::string::npos);

  CHECK(h.run({"report", "--judgments", src("data/fixtures/e2e_errors.jsonl"), "--errors"}) == kOk);
  CHECK(h.out.str().find("32.50%") != std::string::npos);

  CHECK(h.run({"report", "--judgments", src("data/fixtures/table1_judgments.jsonl"), "--group-by", "expertise"}) ==
        kInvalidInput);
}

TEST_CASE("stats subcommand") {
  Harness h;
  CHECK(h.run({"stats", src("data/samples/dataset.jsonl")}) == kOk);
  CHECK(h.out.str().find("records       10") != std::string::npos);
  CHECK(h.run({"stats", "--strict", src("data/fixtures/malformed_dataset.jsonl")}) == kInvalidInput);
  CHECK(h.run({"stats", src("data/fixtures/malformed_dataset.jsonl")}) == kOk);
}

TEST_CASE("offline subcommands never build a transport") {
  testing::TempDir dir("cli");
  testing::write_file(dir / "p.txt", "1. a\n");
  testing::write_file(dir / "e.txt", "insert(1, b)\n");
  Harness h;
  h.run({"apply-edits", "--procedure", (dir / "p.txt").string(), "--edits", (dir / "e.txt").string()});
  h.run({"parse-edits", (dir / "e.txt").string()});
  h.run({"diff", (dir / "p.txt").string(), (dir / "p.txt").string()});
  h.run({"stats", src("data/samples/dataset.jsonl")});
  h.run({"report", "--judgments", src("data/fixtures/table1_judgments.jsonl")});
  CHECK(h.transports_made.empty());
  CHECK(h.refusing->attempts() == 0);
}

TEST_CASE("usage errors") {
  Harness h;
  CHECK(h.run({}) == kUsage);
  CHECK(h.run({"frobnicate"}) == kUsage);
  CHECK(h.run({"apply-edits"}) == kUsage);
  CHECK(h.run({"--help"}) == kOk);
  CHECK(h.run({"diff", "/nonexistent/a", "/nonexistent/b"}) == kInvalidInput);
}

TEST_CASE("customize in mock mode") {
  testing::TempDir dir("cli");
  testing::write_file(dir / "p.txt",
                      "1. doodle on shoes.\n2. add embellishments.\n3. change out laces for ribbon.\n"
                      "4. glue rhinestones on straps.\n5. wrap ribbon around straps.\n");
  Harness h;
  std::vector<std::string> base{"customize", "--mode", "mock", "--mock-fixtures", src("data/samples/mock_outputs.jsonl"),
                                "--goal", "Customize Shoes", "--procedure", (dir / "p.txt").string(), "--hint",
                                "I am a ballet dancer and would like to improve the comfort of my shoes."};

  SUBCASE("known record") {
    auto args = base;
    args.insert(args.end(), {"--record-id", "customize-shoes"});
    CHECK(h.run(args) == kOk);
    CHECK(h.out.str() == "1. Identify areas of discomfort.\n2. add embellishments.\n3. change out laces for ribbon.\n"
                         "4. glue rhinestones on straps.\n5. wrap ribbon around straps.\n"
                         "6. Insert gel pads into the shoes.\n");
  }
  SUBCASE("missing fixture names the record") {
    auto args = base;
    args.insert(args.end(), {"--record-id", "no-such-record"});
    CHECK(h.run(args) == kInvalidInput);
    CHECK(h.err.str().find("no-such-record") != std::string::npos);
  }
  SUBCASE("resolver outage in parallel mode still succeeds") {
    auto args = base;
    args.insert(args.end(), {"--record-id", "customize-shoes", "--topology", "parallel"});
    CHECK(h.run(args) == kOk);
  }
  CHECK(h.transports_made.empty());
}

TEST_CASE("configuration precedence") {
  ConfigLayer file{{"model", "from-file"}, {"topology", "unified"}, {"parallelism", "2"}};
  ConfigLayer env{{"model", "from-env"}, {"merge_policy", "execute_wins"}};
  ConfigLayer flags{{"model", "from-flag"}};
  CliConfig config = resolve_config(flags, env, file);
  CHECK(config.model == "from-flag");
  CHECK(config.topology == Topology::unified);
  CHECK(config.parallelism == 2);
  CHECK(config.merge_policy == MergePolicy::execute_wins);
  CHECK(resolve_config({}, env, file).model == "from-env");
  CHECK(resolve_config({}, {}, file).model == "from-file");
  CHECK(resolve_config({}, {}, {}).endpoint == "https://api.openai.com/v1");

  CHECK_THROWS_AS(resolve_config({{"colour", "blue"}}, {}, {}), InputError);
  CHECK_THROWS_AS(resolve_config({{"parallelism", "zero"}}, {}, {}), InputError);
  CHECK_THROWS_AS(resolve_config({{"mode", "mock"}}, {}, {}), InputError);
  CHECK_THROWS_AS(resolve_config({{"mode", "replay"}}, {}, {}), InputError);

  testing::TempDir dir("cfg");
  testing::write_file(dir / "c.json", R"({"model": "m", "parallelism": 3, "verify_sees_hint": true})");
  ConfigLayer loaded = load_config_file(dir / "c.json");
  CHECK(loaded["parallelism"] == "3");
  CHECK(resolve_config({}, {}, loaded).verify_sees_hint);
}

TEST_CASE("environment and show-config reach the command") {
  testing::TempDir dir("cli");
  testing::write_file(dir / "p.txt", "1. a\n");
  Harness h;
  h.env["PROCEDIT_MODE"] = "mock";
  h.env["PROCEDIT_MOCK_FIXTURES"] = src("data/samples/mock_outputs.jsonl");
  CHECK(h.run({"customize", "--show-config", "--goal", "g", "--procedure", (dir / "p.txt").string(), "--hint", "h"}) ==
        kInvalidInput);
  CHECK(h.err.str().find("\"mode\": \"mock\"") != std::string::npos);
}

TEST_CASE("live mode needs a model and a credential") {
  testing::TempDir dir("cli");
  testing::write_file(dir / "p.txt", "1. a\n");
  Harness h;
  std::vector<std::string> args{"customize", "--goal", "g", "--procedure", (dir / "p.txt").string(), "--hint", "h"};
  CHECK(h.run(args) == kInvalidInput);
  args.insert(args.end(), {"--model", "m"});
  CHECK(h.run(args) == kInvalidInput);
  CHECK(h.err.str().find("OPENAI_API_KEY") != std::string::npos);
}

TEST_CASE("record then replay is byte deterministic") {
  testing::TempDir dir("cli");
  testing::write_file(dir / "p.txt", "1. Mix.\n2. Knead.\n3. Bake.\n");
  auto cache = (dir / "cache.jsonl").string();
  testing::StubEndpoint stub;

  auto args = [&](const std::string& mode, const std::string& trace) {
    return std::vector<std::string>{"customize", "--mode", mode, "--cache", cache, "--endpoint", stub.base_url(),
                                    "--model", "m", "--goal", "Bake Bread", "--procedure", (dir / "p.txt").string(),
                                    "--hint", "I like nuts.", "--record-id", "r1", "--trace-out", trace};
  };

  Harness recorder;
  recorder.allow_network = true;
  recorder.env["OPENAI_API_KEY"] = "sk-test";
  REQUIRE(recorder.run(args("record", (dir / "recorded.jsonl").string())) == kOk);
  CHECK(stub.requests() == 2);

  Harness replayer;
  std::size_t before = stub.requests();
  REQUIRE(replayer.run(args("replay", (dir / "replay1.jsonl").string())) == kOk);
  std::string first_out = replayer.out.str();
  REQUIRE(replayer.run(args("replay", (dir / "replay2.jsonl").string())) == kOk);
  CHECK(replayer.out.str() == first_out);
  CHECK(stub.requests() == before);
  CHECK(replayer.transports_made.empty());
  CHECK(testing::read_file(dir / "replay1.jsonl") == testing::read_file(dir / "recorded.jsonl"));
  CHECK(testing::read_file(dir / "replay2.jsonl") == testing::read_file(dir / "recorded.jsonl"));

  SUBCASE("replay miss is an endpoint failure") {
    auto other = args("replay", (dir / "miss.jsonl").string());
    other[other.size() - 5] = "Something else entirely.";  // the hint
    CHECK(replayer.run(other) == kEndpointFailure);
  }
}

TEST_CASE("batch in mock mode writes one trace per line") {
  testing::TempDir dir("cli");
  Harness h;
  auto traces = (dir / "t.jsonl").string();
  CHECK(h.run({"batch", "--mode", "mock", "--mock-fixtures", src("data/samples/mock_outputs.jsonl"), "--dataset",
               src("data/samples/dataset.jsonl"), "--topology", "parallel", "--parallelism", "3", "--traces-out",
               traces}) == kOk);
  CHECK(testing::read_file(traces) == testing::read_file(testing::source_path("tests/golden/parallel.jsonl")));
}
