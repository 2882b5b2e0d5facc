#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "healsim/analyzer.hpp"
#include "healsim/error.hpp"
#include "healsim/fault_injector.hpp"
#include "test_support.hpp"

namespace healsim {
namespace {

using namespace testing;

ChangeEvent state_changed(const std::string& slot, ComponentState from, ComponentState to) {
  return {ChangeKind::kStateChanged, SlotName(slot), from, to, {}, {}, 10};
}

ChangeEvent exceptions_changed(const std::string& slot, std::int64_t from, std::int64_t to) {
  return {ChangeKind::kExceptionsChanged, SlotName(slot), {}, {}, from, to, 10};
}

FailureReport component_failure(std::uint64_t id, FaultKind kind, const std::string& slot,
                                LogicalMs at = 0) {
  FailureReport r;
  r.report_id = id;
  r.kind = kind;
  r.subject = slot;
  r.detected_at = at;
  r.dependent_slots = default_blueprint()->dependencies_of(slot);
  return r;
}

TEST(Classify, UnknownStateIsCf1WithDependencies) {
  auto m = build_default_model();
  auto reports =
      classify({state_changed(kQuery, ComponentState::kStarted, ComponentState::kUnknown)}, m, 5);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].kind, FaultKind::kCF1);
  EXPECT_EQ(reports[0].subject_text(), kQuery);
  EXPECT_EQ(reports[0].dependent_slots, (std::vector<SlotName>{kFilter, kReputation}));
  EXPECT_EQ(reports[0].detected_at, 10);
}

TEST(Classify, ExceptionsAboveThresholdIsCf2) {
  auto m = build_default_model();
  auto reports = classify({exceptions_changed(kBid, 0, 6)}, m, 5);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].kind, FaultKind::kCF2);
  EXPECT_EQ(reports[0].exception_count, 6);
  EXPECT_TRUE(classify({exceptions_changed(kBid, 0, 5)}, m, 5).empty());
}

TEST(Classify, AdditionsAndBenignChangesYieldNothing) {
  auto m = build_default_model();
  std::vector<ChangeEvent> events = {
      {ChangeKind::kConnectorAdded, intended(kFrontend, kBid), {}, {}, {}, {}, 0},
      {ChangeKind::kComponentAdded, SlotName(kBid), {}, ComponentState::kStarted, {}, 0, 0},
      state_changed(kBid, ComponentState::kUnknown, ComponentState::kStarted),
      state_changed(kBid, ComponentState::kStarted, ComponentState::kStopped),
  };
  EXPECT_TRUE(classify(events, m, 5).empty());
}

TEST(Classify, RemovedComponentSuppressesIncidentConnectorReports) {
  auto m = build_default_model();
  auto before = take_snapshot(m);
  m.remove_component(kPersistence);
  auto reports = classify(observe(before, take_snapshot(m)), m, 5, 40);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].kind, FaultKind::kCF3);
  EXPECT_EQ(reports[0].report_id, 40u);
  EXPECT_TRUE(reports[0].dependent_slots.empty());
}

TEST(Classify, ConnectorRemovalIsCf4WithoutDependents) {
  auto m = build_default_model();
  auto before = take_snapshot(m);
  m.remove_connector(intended(kQuery, kReputation));
  auto reports = classify(observe(before, take_snapshot(m)), m, 5);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].kind, FaultKind::kCF4);
  EXPECT_EQ(std::get<ConnectorRef>(reports[0].subject), intended(kQuery, kReputation));
  EXPECT_TRUE(reports[0].dependent_slots.empty());
}

// inject then classify recovers exactly the injected fault.
TEST(Classify, RoundTripsEveryInjectedFault) {
  SplitMix64 rng(8);
  for (int i = 0; i < 400; ++i) {
    auto m = build_default_model();
    auto f = draw_fault(rng, m, 5);
    auto before = take_snapshot(m);
    inject(m, f);
    auto reports = classify(observe(before, take_snapshot(m)), m, 5);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].kind, f.kind);
    EXPECT_EQ(reports[0].subject, f.target);
  }
}

TEST(Ledger, RecordsDependencies) {
  RootCauseLedger ledger;
  ledger.record_failure(component_failure(1, FaultKind::kCF1, kQuery));
  EXPECT_EQ(ledger.count(kFilter), 1);
  EXPECT_EQ(ledger.count(kReputation), 1);
  EXPECT_EQ(ledger.counters().size(), 2u);

  ledger.record_failure(component_failure(2, FaultKind::kCF2, kPersistence));
  EXPECT_EQ(ledger.counters().size(), 2u);
}

TEST(Ledger, ThreeQueryFailuresReachThreshold) {
  RootCauseLedger ledger(3);
  for (std::uint64_t i = 1; i <= 3; ++i) {
    ledger.record_failure(component_failure(i, FaultKind::kCF1, kQuery, 100 * i));
  }
  EXPECT_EQ(ledger.count(kFilter), 3);
  EXPECT_EQ(ledger.count(kReputation), 3);
  auto s = ledger.suspects();
  ASSERT_EQ(s.size(), 2u);
  // Equal counts fall back to name order.
  EXPECT_EQ(s[0].slot, kFilter);
  EXPECT_EQ(s[1].slot, kReputation);
  EXPECT_EQ(s[0].implicated_by, (std::vector<SlotName>{kQuery, kQuery, kQuery}));
  EXPECT_EQ(s[0].first_at, 100);
  EXPECT_EQ(s[0].last_at, 300);
}

TEST(Ledger, Cf4LeavesLedgerAlone) {
  RootCauseLedger ledger;
  FailureReport r;
  r.kind = FaultKind::kCF4;
  r.subject = intended(kQuery, kReputation);
  ledger.record_failure(r);
  EXPECT_TRUE(ledger.counters().empty());
}

TEST(Ledger, SuspectsThresholdAndOrder) {
  RootCauseLedger ledger(3);
  EXPECT_TRUE(ledger.suspects().empty());
  // Filter:3, Reputation:2
  ledger.record_failure(component_failure(1, FaultKind::kCF1, kQuery));
  ledger.record_failure(component_failure(2, FaultKind::kCF1, kQuery));
  FailureReport only_filter = component_failure(3, FaultKind::kCF1, kQuery);
  only_filter.dependent_slots = {kFilter};
  ledger.record_failure(only_filter);
  auto s = ledger.suspects();
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].slot, kFilter);

  // Persistence:4 outranks Filter:3.
  for (std::uint64_t i = 4; i <= 7; ++i) {
    ledger.record_failure(component_failure(i, FaultKind::kCF1, kBid));
  }
  s = ledger.suspects();
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].slot, kPersistence);
  EXPECT_EQ(s[1].slot, kFilter);
}

TEST(Ledger, RejectsZeroThreshold) { EXPECT_THROW(RootCauseLedger(0), Error); }

// Counters equal a brute-force recount, never decrease, and suspects never
// disappear as records accumulate.
TEST(Ledger, BruteForceRecountAndMonotoneSuspects) {
  std::mt19937_64 gen(5);
  const auto& slots = default_blueprint()->slots();
  for (int trial = 0; trial < 100; ++trial) {
    RootCauseLedger ledger(static_cast<std::int64_t>(1 + gen() % 4));
    std::vector<FailureReport> trace;
    std::vector<RootCauseSuspect> prev_suspects;
    std::map<SlotName, std::int64_t> prev_counters;
    for (int i = 0; i < 20; ++i) {
      auto kind = kAllFaultKinds[gen() % 3];
      auto r = component_failure(static_cast<std::uint64_t>(i + 1), kind,
                                 slots[gen() % slots.size()].slot, i);
      ledger.record_failure(r);
      trace.push_back(r);

      for (const auto& s : slots) {
        std::int64_t expected = 0;
        for (const auto& rep : trace) {
          expected += std::count(rep.dependent_slots.begin(), rep.dependent_slots.end(), s.slot);
        }
        ASSERT_EQ(ledger.count(s.slot), expected);
        ASSERT_GE(ledger.count(s.slot), prev_counters[s.slot]);
        prev_counters[s.slot] = ledger.count(s.slot);
        if (ledger.implications().contains(s.slot)) {
          ASSERT_EQ(static_cast<std::int64_t>(ledger.implications().at(s.slot).size()), expected);
        }
      }
      auto now = ledger.suspects();
      for (const auto& old : prev_suspects) {
        ASSERT_TRUE(std::any_of(now.begin(), now.end(),
                                [&](const auto& s) { return s.slot == old.slot; }));
      }
      for (const auto& s : now) ASSERT_GE(s.count, ledger.threshold());
      prev_suspects = now;
    }
  }
}

TEST(SuspectCsv, HeaderOnlyWhenEmpty) {
  EXPECT_EQ(format_suspect_csv({}), "component,count,implicated_by,first_at,last_at\n");
}

TEST(SuspectCsv, FilterRow) {
  RootCauseSuspect s{kFilter, 3, {kQuery, kQuery, kQuery}, 120, 900};
  EXPECT_EQ(format_suspect_csv({s}),
            "component,count,implicated_by,first_at,last_at\n"
            "Last Second Sales Item Filter,3,Query Service;Query Service;Query Service,120,900\n");
}

TEST(SuspectCsv, WritesFile) {
  TempDir dir;
  RootCauseSuspect s{kFilter, 3, {kQuery, kQuery, kQuery}, 1, 2};
  write_suspect_report({s}, dir / "suspects.csv");
  EXPECT_EQ(read_file(dir / "suspects.csv"), format_suspect_csv({s}));
  EXPECT_THROW(write_suspect_report({s}, dir / "missing" / "x.csv"), Error);
}

}  // namespace
}  // namespace healsim
