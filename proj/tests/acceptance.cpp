// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "procedit/cli.hpp"
#include "procedit/dataset.hpp"
#include "procedit/edit_dsl.hpp"
#include "procedit/edit_engine.hpp"
#include "procedit/eval.hpp"
#include "procedit/gateway.hpp"
#include "procedit/topology.hpp"
#include "stub_server.hpp"
#include "support.hpp"

using namespace procedit;
namespace t = procedit::testing;

namespace {

// Collects the first few failure messages of one criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
  }
  bool passed() const { return failures.empty(); }
};

struct Acceptance {
  int number;
  std::string title;
  double budget_seconds;
  std::function<void(Check&)> body;
};

std::string run_cli(std::vector<std::string> args, int& code) {
  std::istringstream in;
  std::ostringstream out, err;
  auto refusing = std::make_shared<RefusingTransport>();
  cli::CliIo io{in, out, err, [](const std::string&) { return std::nullopt; },
                [refusing](const std::string&) -> std::shared_ptr<Transport> { return refusing; }};
  args.insert(args.begin(), "procedit");
  code = cli::dispatch(args, io);
  return out.str();
}

// The table row for `method`, or "" when missing.
std::string row_for(const std::string& table, const std::string& method) {
  std::istringstream lines(table);
  for (std::string line; std::getline(lines, line);)
    if (line.rfind(method + " ", 0) == 0) return line;
  return "";
}

void metric_arithmetic(Check& check) {
  int code = 0;
  std::string table =
      run_cli({"report", "--judgments", t::source_path("data/fixtures/table1_judgments.jsonl").string()}, code);
  check.expect(code == 0, "report exit code " + std::to_string(code));
  struct Row {
    const char* method;
    std::vector<const char*> values;
  };
  const Row rows[] = {{"Sequential", {"60.68%", "72.33%", "51.94%"}},
                      {"Unified", {"54.85%", "71.36%", "47.09%"}},
                      {"Parallel", {"53.88%", "70.87%", "45.63%"}},
                      {"Reverse-Sequential", {"42.23%", "63.59%", "34.47%"}}};
  for (const Row& row : rows) {
    std::istringstream fields(row_for(table, row.method));
    std::vector<std::string> tokens;
    for (std::string token; fields >> token;) tokens.push_back(token);
    bool ok = tokens.size() == 5 && tokens[1] == "206" && tokens[2] == row.values[0] && tokens[3] == row.values[1] &&
              tokens[4] == row.values[2];
    check.expect(ok, std::string("row ") + row.method + " printed as '" + row_for(table, row.method) + "'");
  }
}

void error_share(Check& check) {
  auto judgments = load_judgments(t::source_path("data/fixtures/e2e_errors.jsonl"));
  std::set<std::string> items;
  for (const auto& j : judgments) items.insert(j.record_id);
  check.expect(items.size() == 40, "fixture has " + std::to_string(items.size()) + " items");
  auto dist = error_distribution(judgments, "E2E");
  check.expect(dist.total_marks == 40, "total marks " + std::to_string(dist.total_marks));
  check.expect(dist.count(ErrorCategory::extra_steps) == 13, "extra_steps marks");
  check.expect(format_hundredths(dist.percent(ErrorCategory::extra_steps)) == "32.50",
               "extra_steps share " + format_hundredths(dist.percent(ErrorCategory::extra_steps)));
}

EditBag random_bag(std::mt19937& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> count(0, 8), anchor(0, n + 1);
  std::uniform_int_distribution<int> kind(0, 3);
  EditBag bag;
  for (std::size_t i = 0, m = count(rng); i < m; ++i) {
    std::string text = t::awkward_texts()[i % t::awkward_texts().size()] + " " + std::to_string(i);
    int k = kind(rng);
    bag.push_back(k == 0 ? Edit::remove(anchor(rng)) : k == 1 ? Edit::replace(anchor(rng), text)
                                                              : Edit::insert(anchor(rng), text));
  }
  return bag;
}

void edit_properties(Check& check) {
  constexpr int kCases = 1000;
  std::mt19937 rng(2024);
  int identity = 0, length = 0, permutation = 0, round_trip = 0;
  for (int i = 0; i < kCases; ++i) {
    Procedure p = t::random_procedure(rng, 8);
    identity += procedit::apply({}, p) == p;

    EditBag bag = validate(random_bag(rng, p.size()), p).applicable;
    EditCounts counts = count_edits(bag);
    Procedure expected = procedit::apply(bag, p);
    length += expected.size() == p.size() + counts.inserts - counts.deletions;

    // Any reordering that keeps same-anchor inserts in relative order.
    EditBag shuffled = bag;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::map<std::size_t, std::vector<Edit>> inserts;
    for (const Edit& e : bag)
      if (e.kind == EditKind::insert) inserts[e.anchor].push_back(e);
    std::map<std::size_t, std::size_t> used;
    for (Edit& e : shuffled)
      if (e.kind == EditKind::insert) e = inserts[e.anchor][used[e.anchor]++];
    permutation += procedit::apply(shuffled, p) == expected;

    Edit edit = bag.empty() ? Edit::insert(i % 101, t::awkward_texts()[i % t::awkward_texts().size()]) : bag.front();
    round_trip += parse_edit(serialize_edit(edit)) == edit;
  }
  check.expect(identity == kCases, "identity held in " + std::to_string(identity) + " cases");
  check.expect(length == kCases, "length accounting held in " + std::to_string(length) + " cases");
  check.expect(permutation == kCases, "permutation invariance held in " + std::to_string(permutation) + " cases");
  check.expect(round_trip == kCases, "DSL round trip held in " + std::to_string(round_trip) + " cases");

  std::vector<Procedure> all{Procedure{}};
  std::vector<std::vector<std::string>> layer{{}};
  for (int len = 1; len <= 4; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& prefix : layer)
      for (const char* s : {"a", "b", "c"}) {
        auto steps = prefix;
        steps.push_back(s);
        all.push_back(Procedure::from_steps(steps));
        next.push_back(std::move(steps));
      }
    layer = std::move(next);
  }
  std::size_t pairs = 0, good = 0;
  for (const auto& from : all)
    for (const auto& to : all) {
      ++pairs;
      good += procedit::apply(diff(from, to), from) == to;
    }
  check.expect(pairs == 121 * 121 && good == pairs,
               "diff/apply held for " + std::to_string(good) + " of " + std::to_string(pairs) + " pairs");
}

void golden_traces(Check& check) {
  auto entries = load_entries(t::source_path("data/samples/dataset.jsonl"), LoadMode::strict);
  auto backend = std::make_shared<ScriptedBackend>(ScriptedBackend::load(t::source_path("data/samples/mock_outputs.jsonl")));
  Agents agents(backend, TemplateSet::defaults());
  check.expect(entries.size() == 10, "sample dataset has " + std::to_string(entries.size()) + " records");
  for (Topology topology : kAllTopologies) {
    std::string name(to_string(topology));
    auto traces = run_batch(topology, entries, agents, 4);
    check.expect(format_traces(traces) == t::read_file(t::source_path("tests/golden/" + name + ".jsonl")),
                 name + " traces differ from the golden file");
    for (const auto& trace : traces)
      if (auto problem = check_trace_replay(trace)) check.expect(false, name + "/" + trace.record_id + ": " + *problem);
  }
}

void parallel_conflicts(Check& check) {
  CustomizationRecord record{"conflict", Goal("Make Tea"), Procedure::from_steps({"Boil water.", "Steep the tea.", "Serve."}),
                             make_hint("I like it strong.", ConstraintSubtype::preference, Expertise::beginner,
                                       CriticalType::constraint),
                             RecordSource::simulated};
  // Modify and Verify disagree on step 2; the resolver is unavailable.
  ScriptedBackend outage;
  outage.script(AgentRole::modify, "conflict", "replace(2, Steep the tea for 5 minutes.)");
  outage.script(AgentRole::verify, "conflict", "replace(2, Steep the tea for 2 minutes.)\ninsert(3, Wash the cup.)");
  outage.script_outage(AgentRole::resolve, "conflict");
  Agents fallback(std::make_shared<ScriptedBackend>(outage), TemplateSet::defaults(),
                  {false, MergePolicy::customize_wins});
  auto trace = run_pipeline(Topology::parallel, record, fallback);
  check.expect(trace.final && trace.final->step(2) == "Steep the tea for 5 minutes.",
               "customize_wins did not keep the Modify text");
  check.expect(trace.final && trace.final->size() == 4, "non-conflicting Verify insert was lost");
  bool loser_logged = false;
  for (const auto& d : trace.dropped_edits)
    loser_logged |= d.edit == Edit::replace(2, "Steep the tea for 2 minutes.") && d.reason == "lost conflict";
  check.expect(loser_logged, "losing Verify edit not recorded");

  Agents execute_wins(std::make_shared<ScriptedBackend>(outage), TemplateSet::defaults(),
                      {false, MergePolicy::execute_wins});
  auto ew = run_pipeline(Topology::parallel, record, execute_wins);
  check.expect(ew.final && ew.final->step(2) == "Steep the tea for 2 minutes.", "execute_wins did not keep Verify text");

  // The resolver answers but plants an edit that cannot be applied.
  ScriptedBackend planted = outage;
  planted.script(AgentRole::resolve, "conflict", "replace(2, Steep the tea for 5 minutes.)\nreplace(9, Planted.)");
  Agents resolver(std::make_shared<ScriptedBackend>(planted), TemplateSet::defaults());
  auto filtered = run_pipeline(Topology::parallel, record, resolver);
  bool merged_clean = false;
  for (const auto& stage : filtered.stages)
    if (stage.label == stage::resolve_merged)
      merged_clean = std::get<EditBag>(stage.payload) == EditBag{Edit::replace(2, "Steep the tea for 5 minutes.")};
  check.expect(merged_clean, "planted out-of-range edit reached the merged bag");
  bool planted_dropped = false;
  for (const auto& d : filtered.dropped_edits)
    planted_dropped |= d.edit == Edit::replace(9, "Planted.") && d.reason == "anchor out of range";
  check.expect(planted_dropped, "planted edit not reported as dropped");
  check.expect(filtered.final && filtered.final->size() == 3, "filtered result has the wrong length");
}

void gateway_determinism(Check& check) {
  t::TempDir dir("acceptance");
  auto cache = dir / "cache.jsonl";
  auto entries = load_entries(t::source_path("data/samples/dataset.jsonl"), LoadMode::strict);
  GenerationSettings settings;
  settings.model = "stub-model";

  t::StubEndpoint stub;
  Gateway::Options options;
  options.sleep = [](std::chrono::milliseconds) {};
  auto recorder = std::make_shared<Gateway>(make_http_transport(stub.base_url()), std::make_shared<ResponseCache>(cache),
                                            options);
  Agents live(std::make_shared<GatewayBackend>(recorder, settings), TemplateSet::defaults());
  std::string recorded = format_traces(run_batch(Topology::sequential, entries, live, 4));
  check.expect(stub.requests() > 0, "record mode sent no requests");

  auto refusing = std::make_shared<RefusingTransport>();
  Gateway::Options replay_options;
  replay_options.replay = true;
  auto replayer = std::make_shared<Gateway>(refusing, std::make_shared<ResponseCache>(cache), replay_options);
  Agents replay(std::make_shared<GatewayBackend>(replayer, settings), TemplateSet::defaults());
  std::size_t before = stub.requests();
  std::string first = format_traces(run_batch(Topology::sequential, entries, replay, 4));
  std::string second = format_traces(run_batch_serial(Topology::sequential, entries, replay));
  check.expect(first == recorded, "replayed traces differ from recorded traces");
  check.expect(second == recorded, "second replay differs");
  check.expect(refusing->attempts() == 0, "replay touched the transport");
  check.expect(replayer->requests_sent() == 0, "replay counted requests");
  check.expect(stub.requests() == before, "stub saw traffic during replay");
}

void defaults_audit(Check& check) {
  GenerationSettings s;
  check.expect(s.temperature == 0.0, "temperature");
  check.expect(s.max_tokens == 500, "max_tokens");
  check.expect(s.top_p == 1.0, "top_p");
  check.expect(s.frequency_penalty == 0.1, "frequency_penalty");
  check.expect(s.presence_penalty == 0.0, "presence_penalty");
}

void dataset_validation(Check& check) {
  auto sample = load_records(t::source_path("data/samples/dataset.jsonl"));
  check.expect(sample.diagnostics.empty(), "sample dataset has diagnostics");
  check.expect(sample.records.size() == 10, "sample dataset record count");

  auto bad = load_records(t::source_path("data/fixtures/malformed_dataset.jsonl"));
  std::istringstream expected(t::read_file(t::source_path("data/fixtures/malformed_dataset.expected")));
  std::vector<std::string> want, got;
  for (std::string line; std::getline(expected, line);) want.push_back(line);
  for (const auto& d : bad.diagnostics) got.push_back(std::to_string(d.line_number) + "\t" + d.message);
  check.expect(want.size() == 12, "expected-diagnostics file lists " + std::to_string(want.size()));
  check.expect(got == want, "lenient load produced " + std::to_string(got.size()) + " diagnostics, not the expected 12");

  bool strict_failed = false;
  try {
    load_records(t::source_path("data/fixtures/malformed_dataset.jsonl"), LoadMode::strict);
  } catch (const DatasetError&) {
    strict_failed = true;
  }
  check.expect(strict_failed, "strict load did not fail");
}

} // namespace

int main() {
  const std::vector<Acceptance> criteria{
      {1, "metric arithmetic: report reproduces the four main-results rows", 1, metric_arithmetic},
      {2, "error share: 13 of 40 extra_steps marks gives 32.50%", 1, error_share},
      {3, "edit engine properties and exhaustive diff/apply", 60, edit_properties},
      {4, "golden traces and replay invariant for all topologies", 30, golden_traces},
      {5, "parallel conflict policy and resolver post-filter", 10, parallel_conflicts},
      {6, "record then replay gives identical traces with zero requests", 30, gateway_determinism},
      {7, "generation settings defaults", 1, defaults_audit},
      {8, "dataset validation: clean samples, 12 malformed lines", 5, dataset_validation},
  };

  int failed = 0;
  for (const auto& criterion : criteria) {
    Check check;
    auto start = std::chrono::steady_clock::now();
    try {
      criterion.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > criterion.budget_seconds)
      check.failures.push_back("took " + std::to_string(seconds) + " s, budget " +
                               std::to_string(criterion.budget_seconds) + " s");
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3f s", seconds);
    std::cout << (check.passed() ? "PASS" : "FAIL") << "  criterion " << criterion.number << "  "
              << criterion.title << "  (" << timing << ")\n";
    for (const auto& failure : check.failures) std::cout << "      " << failure << '\n';
    failed += !check.passed();
  }
  std::cout << (criteria.size() - failed) << " of " << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
