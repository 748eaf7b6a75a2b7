// Serial reference vs OpenMP batch runner on a synthetic dataset.
//
// The scripted backend can add a fixed delay per completion to stand in for
// endpoint latency; that is where record-level parallelism pays off.

#include <benchmark/benchmark.h>

#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include "procedit/agents.hpp"
#include "procedit/dataset.hpp"
#include "procedit/topology.hpp"

using namespace procedit;

namespace {

class SyntheticBackend final : public CompletionBackend {
public:
  explicit SyntheticBackend(std::chrono::microseconds delay) : delay_(delay) {}
  std::string complete(AgentRole role, std::string_view, const std::string& prompt) override {
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    switch (role) {
    case AgentRole::e2e: return "1. First.\n2. Second.\n3. Third.";
    case AgentRole::resolve: return "insert(1, Resolved " + std::to_string(prompt.size() % 97) + ".)\nreplace(2, )";
    default: return "insert(1, Added " + std::to_string(prompt.size() % 89) + ".)\nreplace(3, Changed.)\nreplace(9, x)";
    }
  }

private:
  std::chrono::microseconds delay_;
};

std::vector<DatasetEntry> synthetic_entries(std::size_t count) {
  std::vector<CustomizationRecord> records;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::string> steps;
    for (int s = 1; s <= 8; ++s) steps.push_back("Step " + std::to_string(s) + " of task " + std::to_string(i) + ".");
    records.push_back({"r" + std::to_string(i), Goal("Task " + std::to_string(i)), Procedure::from_steps(steps),
                       make_hint("Hint " + std::to_string(i), ConstraintSubtype::preference, Expertise::beginner,
                                 CriticalType::constraint),
                       RecordSource::simulated});
  }
  return entries_of(records);
}

Agents make_agents(long delay_us) {
  return Agents(std::make_shared<SyntheticBackend>(std::chrono::microseconds(delay_us)), TemplateSet::defaults());
}

// Args: records, backend delay in microseconds.
void BM_BatchSerial(benchmark::State& state) {
  auto entries = synthetic_entries(static_cast<std::size_t>(state.range(0)));
  Agents agents = make_agents(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(run_batch_serial(Topology::parallel, entries, agents));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// Args: records, backend delay in microseconds, threads.
void BM_BatchOpenMP(benchmark::State& state) {
  auto entries = synthetic_entries(static_cast<std::size_t>(state.range(0)));
  Agents agents = make_agents(state.range(1));
  int threads = static_cast<int>(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(Topology::parallel, entries, agents, threads));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_BatchSerial)->Args({200, 0})->Args({64, 500})->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchOpenMP)
    ->ArgsProduct({{200}, {0}, {1, 2, 4}})
    ->ArgsProduct({{64}, {500}, {1, 2, 4, 8}})
    ->UseRealTime()
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
