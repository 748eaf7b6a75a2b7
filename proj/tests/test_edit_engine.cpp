#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "procedit/edit_dsl.hpp"
#include "procedit/edit_engine.hpp"
#include "support.hpp"

using namespace procedit;

namespace {

// Independent oracle: filters the bag by hand, then edits a plain vector from
// the highest anchor down so earlier anchors never shift. At one anchor the
// inserts go in first (reverse bag order at the same slot), then step k is
// replaced or erased.
std::vector<std::string> oracle_apply(const EditBag& bag, std::vector<std::string> steps) {
  const std::size_t n = steps.size();
  std::map<std::size_t, std::string> replaces;
  std::map<std::size_t, std::vector<std::string>> inserts;
  for (const Edit& e : bag) {
    if (e.kind == EditKind::replace && e.anchor >= 1 && e.anchor <= n) replaces[e.anchor] = e.text;
    if (e.kind == EditKind::insert && e.anchor <= n && !e.text.empty()) inserts[e.anchor].push_back(e.text);
  }
  for (std::size_t k = n + 1; k-- > 0;) {
    auto ins = inserts.find(k);
    if (ins != inserts.end())
      for (auto it = ins->second.rbegin(); it != ins->second.rend(); ++it)
        steps.insert(steps.begin() + static_cast<std::ptrdiff_t>(k), *it);
    auto rep = replaces.find(k);
    if (rep != replaces.end()) {
      if (rep->second.empty())
        steps.erase(steps.begin() + static_cast<std::ptrdiff_t>(k - 1));
      else
        steps[k - 1] = rep->second;
    }
  }
  return steps;
}

EditBag random_bag(std::mt19937& rng, std::size_t n, std::size_t max_edits, std::size_t overshoot) {
  std::uniform_int_distribution<std::size_t> count(0, max_edits);
  std::uniform_int_distribution<std::size_t> anchor(0, n + overshoot);
  std::uniform_int_distribution<int> kind(0, 5);
  EditBag bag;
  std::size_t m = count(rng);
  for (std::size_t i = 0; i < m; ++i) {
    std::string text = "e" + std::to_string(i);
    switch (kind(rng)) {
    case 0: bag.push_back(Edit::remove(anchor(rng))); break;
    case 1:
    case 2: bag.push_back(Edit::replace(anchor(rng), text)); break;
    case 3: bag.push_back(Edit::insert(anchor(rng), "")); break;
    default: bag.push_back(Edit::insert(anchor(rng), text)); break;
    }
  }
  return bag;
}

std::vector<Procedure> all_small_procedures() {
  std::vector<Procedure> out{Procedure{}};
  std::vector<std::vector<std::string>> layer{{}};
  for (int length = 1; length <= 4; ++length) {
    std::vector<std::vector<std::string>> next;
    for (const auto& prefix : layer)
      for (const char* symbol : {"a", "b", "c"}) {
        auto steps = prefix;
        steps.push_back(symbol);
        out.push_back(Procedure::from_steps(steps));
        next.push_back(std::move(steps));
      }
    layer = std::move(next);
  }
  return out;
}

} // namespace

TEST_CASE("apply follows the original numbering") {
  Procedure p = Procedure::from_steps({"one", "two", "three"});
  SUBCASE("insert after, including prepend") {
    EditBag bag{Edit::insert(0, "zero"), Edit::insert(3, "four"), Edit::insert(1, "1a"), Edit::insert(1, "1b")};
    CHECK(procedit::apply(bag, p) == Procedure::from_steps({"zero", "one", "1a", "1b", "two", "three", "four"}));
  }
  SUBCASE("deleting a step does not move later anchors") {
    EditBag bag{Edit::remove(1), Edit::replace(3, "THREE"), Edit::insert(1, "after one")};
    CHECK(procedit::apply(bag, p) == Procedure::from_steps({"after one", "two", "THREE"}));
  }
  SUBCASE("deleting everything") {
    CHECK(procedit::apply({Edit::remove(1), Edit::remove(2), Edit::remove(3)}, p).empty());
  }
}

TEST_CASE("validate partitions a bag") {
  Procedure p = Procedure::from_steps({"one", "two"});
  EditBag bag{Edit::replace(0, "x"), Edit::replace(3, "x"), Edit::insert(3, "x"), Edit::insert(2, ""),
              Edit::replace(1, "first"), Edit::replace(1, "second"), Edit::insert(2, "ok")};
  auto report = validate(bag, p);
  CHECK(report.applicable == EditBag{Edit::replace(1, "second"), Edit::insert(2, "ok")});
  REQUIRE(report.rejected.size() == 5);
  CHECK(report.rejected[0].reason == RejectReason::anchor_out_of_range);
  CHECK(report.rejected[1].reason == RejectReason::anchor_out_of_range);
  CHECK(report.rejected[2].reason == RejectReason::anchor_out_of_range);
  CHECK(report.rejected[3].reason == RejectReason::empty_insert);
  CHECK(report.rejected[4].reason == RejectReason::duplicate_replace_anchor);
  CHECK(report.rejected[4].edit == Edit::replace(1, "first"));

  CHECK_THROWS_AS(validate(bag, p, ValidationMode::strict), DuplicateReplace);

  auto applied = apply_edits(bag, p);
  CHECK(applied.procedure == Procedure::from_steps({"second", "two", "ok"}));
  CHECK(applied.dropped.size() == 5);
}

TEST_CASE("apply agrees with the descending-anchor oracle") {
  std::mt19937 rng(11);
  for (int i = 0; i < 3000; ++i) {
    Procedure p = testing::random_procedure(rng, 7);
    EditBag bag = random_bag(rng, p.size(), 8, 2);
    CAPTURE(serialize_edit_bag(bag));
    REQUIRE(procedit::apply(bag, p).steps() == oracle_apply(bag, p.steps()));
  }
}

TEST_CASE("empty bag is the identity") {
  std::mt19937 rng(1);
  for (int i = 0; i < 1000; ++i) {
    Procedure p = testing::random_procedure(rng, 10);
    REQUIRE(procedit::apply({}, p) == p);
  }
}

TEST_CASE("length accounting on validated bags") {
  std::mt19937 rng(2);
  for (int i = 0; i < 2000; ++i) {
    Procedure p = testing::random_procedure(rng, 8);
    EditBag bag = validate(random_bag(rng, p.size(), 10, 2), p).applicable;
    EditCounts counts = count_edits(bag);
    REQUIRE(procedit::apply(bag, p).size() == p.size() + counts.inserts - counts.deletions);
  }
}

TEST_CASE("validated bags are order independent up to same-anchor inserts") {
  std::mt19937 rng(3);
  for (int i = 0; i < 2000; ++i) {
    Procedure p = testing::random_procedure(rng, 6);
    EditBag bag = validate(random_bag(rng, p.size(), 8, 1), p).applicable;
    Procedure expected = procedit::apply(bag, p);

    // Shuffle, then restore the relative order of inserts sharing an anchor.
    EditBag shuffled = bag;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::map<std::size_t, std::vector<Edit>> inserts;
    for (const Edit& e : bag)
      if (e.kind == EditKind::insert) inserts[e.anchor].push_back(e);
    std::map<std::size_t, std::size_t> used;
    for (Edit& e : shuffled)
      if (e.kind == EditKind::insert) e = inserts[e.anchor][used[e.anchor]++];

    CAPTURE(serialize_edit_bag(bag));
    CAPTURE(serialize_edit_bag(shuffled));
    REQUIRE(procedit::apply(shuffled, p) == expected);
  }
}

TEST_CASE("diff then apply reproduces the target for every small pair") {
  auto procedures = all_small_procedures();
  REQUIRE(procedures.size() == 121);
  std::size_t pairs = 0;
  for (const Procedure& from : procedures)
    for (const Procedure& to : procedures) {
      EditBag bag = diff(from, to);
      REQUIRE(validate(bag, from).rejected.empty());
      REQUIRE(procedit::apply(bag, from) == to);
      ++pairs;
    }
  CHECK(pairs == 121 * 121);
}

TEST_CASE("diff is minimal on simple cases") {
  Procedure p = Procedure::from_steps({"a", "b", "c"});
  CHECK(diff(p, p).empty());
  CHECK(diff(p, Procedure::from_steps({"a", "c"})) == EditBag{Edit::remove(2)});
  CHECK(diff(p, Procedure::from_steps({"a", "b", "x", "c"})) == EditBag{Edit::insert(2, "x")});
  CHECK(diff(p, Procedure::from_steps({"a", "B", "c"})) == EditBag{Edit::replace(2, "B")});
}

TEST_CASE("conflict detection") {
  EditBag c{Edit::replace(2, "mine"), Edit::remove(3), Edit::insert(1, "x"), Edit::replace(4, "same")};
  EditBag e{Edit::replace(2, "yours"), Edit::insert(3, "y"), Edit::replace(4, "same"), Edit::replace(1, "z")};
  auto conflicts = detect_conflicts(c, e);
  REQUIRE(conflicts.size() == 2);
  CHECK(conflicts[0] == Conflict{Edit::replace(2, "mine"), Edit::replace(2, "yours"), ConflictReason::contradictory_text});
  CHECK(conflicts[1] == Conflict{Edit::remove(3), Edit::insert(3, "y"), ConflictReason::delete_vs_insert});
}

TEST_CASE("conflict detection is symmetric") {
  std::mt19937 rng(4);
  for (int i = 0; i < 1000; ++i) {
    EditBag a = random_bag(rng, 4, 5, 0);
    EditBag b = random_bag(rng, 4, 5, 0);
    auto ab = detect_conflicts(a, b);
    auto ba = detect_conflicts(b, a);
    std::multiset<std::pair<std::string, std::string>> left, right;
    for (const auto& c : ab) left.emplace(serialize_edit(c.left), serialize_edit(c.right));
    for (const auto& c : ba) right.emplace(serialize_edit(c.right), serialize_edit(c.left));
    REQUIRE(left == right);
  }
}

TEST_CASE("deterministic merge policies") {
  EditBag c{Edit::replace(2, "mine"), Edit::insert(1, "shared")};
  EditBag e{Edit::replace(2, "yours"), Edit::insert(1, "shared"), Edit::insert(3, "extra")};

  auto cw = merge_deterministic(c, e, MergePolicy::customize_wins);
  CHECK(cw.merged == EditBag{Edit::replace(2, "mine"), Edit::insert(1, "shared"), Edit::insert(3, "extra")});
  CHECK(cw.dropped == std::vector<Edit>{Edit::replace(2, "yours")});

  auto ew = merge_deterministic(c, e, MergePolicy::execute_wins);
  CHECK(ew.merged == EditBag{Edit::insert(1, "shared"), Edit::replace(2, "yours"), Edit::insert(3, "extra")});
  CHECK(ew.dropped == std::vector<Edit>{Edit::replace(2, "mine")});

  auto rc = merge_deterministic(c, e, MergePolicy::reject_conflicts);
  CHECK(rc.merged == EditBag{Edit::insert(1, "shared"), Edit::insert(3, "extra")});
  CHECK(rc.dropped.size() == 2);

  SUBCASE("a losing execute edit equal to a kept customize edit is still dropped once") {
    EditBag c2{Edit::replace(1, "a"), Edit::replace(1, "b")};
    EditBag e2{Edit::replace(1, "a")};
    auto m = merge_deterministic(c2, e2, MergePolicy::customize_wins);
    CHECK(std::count(m.merged.begin(), m.merged.end(), Edit::replace(1, "a")) == 1);
  }
}

TEST_CASE("merged bags are conflict free and account for every edit") {
  std::mt19937 rng(5);
  for (int i = 0; i < 1500; ++i) {
    EditBag c = random_bag(rng, 4, 5, 0);
    EditBag e = random_bag(rng, 4, 5, 0);
    for (MergePolicy policy : {MergePolicy::customize_wins, MergePolicy::execute_wins, MergePolicy::reject_conflicts}) {
      auto result = merge_deterministic(c, e, policy);
      std::set<std::string> inputs, outputs;
      for (const Edit& x : c) inputs.insert(serialize_edit(x));
      for (const Edit& x : e) inputs.insert(serialize_edit(x));
      for (const Edit& x : result.merged) outputs.insert(serialize_edit(x));
      for (const Edit& x : result.dropped) outputs.insert(serialize_edit(x));
      REQUIRE(std::includes(inputs.begin(), inputs.end(), outputs.begin(), outputs.end()));
      for (const std::string& x : inputs) REQUIRE(outputs.count(x) == 1);
      // Only conflicts across the two bags are settled; a bag may contradict
      // itself, and such pairs are left alone.
      auto in = [](const EditBag& bag, const Edit& x) { return std::find(bag.begin(), bag.end(), x) != bag.end(); };
      for (const Conflict& conflict : detect_conflicts(result.merged, result.merged)) {
        bool internal = (in(c, conflict.left) && in(c, conflict.right)) || (in(e, conflict.left) && in(e, conflict.right));
        CAPTURE(serialize_edit(conflict.left));
        CAPTURE(serialize_edit(conflict.right));
        REQUIRE(internal);
      }
    }
  }
}

TEST_CASE("without conflicts a merge applies like the concatenated bags") {
  std::mt19937 rng(6);
  int checked = 0;
  for (int i = 0; i < 3000 && checked < 1000; ++i) {
    Procedure p = testing::random_procedure(rng, 5);
    EditBag c = validate(random_bag(rng, p.size(), 4, 0), p).applicable;
    EditBag e = validate(random_bag(rng, p.size(), 4, 0), p).applicable;
    for (Edit& x : e)
      if (!x.text.empty()) x.text += "'";
    if (!detect_conflicts(c, e).empty()) continue;
    EditBag both = c;
    both.insert(both.end(), e.begin(), e.end());
    auto merged = merge_deterministic(c, e, MergePolicy::reject_conflicts);
    CHECK(merged.dropped.empty());
    REQUIRE(procedit::apply(merged.merged, p) == procedit::apply(both, p));
    ++checked;
  }
  CHECK(checked == 1000);
}
