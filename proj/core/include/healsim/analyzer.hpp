#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "healsim/architecture.hpp"
#include "healsim/monitor.hpp"
#include "healsim/types.hpp"

namespace healsim {

inline constexpr std::int64_t kDefaultExceptionThreshold = 5;
inline constexpr std::int64_t kDefaultRootCauseThreshold = 3;

struct FailureReport {
  std::uint64_t report_id = 0;
  FaultKind kind = FaultKind::kCF1;
  std::variant<SlotName, ConnectorRef> subject;
  std::optional<std::int64_t> exception_count;  ///< CF2 only
  LogicalMs detected_at = 0;
  /// Blueprint dependencies of the failed slot; empty for CF4.
  std::vector<SlotName> dependent_slots;

  std::string subject_text() const;
  bool operator==(const FailureReport&) const = default;
};

/// Turns monitor events into failure reports, numbered from first_report_id
/// in event order.
///
/// Connector removals whose endpoint was itself removed in the same batch are
/// consequences of that CF3 and produce no CF4 report of their own.
std::vector<FailureReport> classify(const std::vector<ChangeEvent>& events,
                                    const ArchitectureModel& model,
                                    std::int64_t exception_threshold,
                                    std::uint64_t first_report_id = 1);

struct Implication {
  std::uint64_t report_id = 0;
  SlotName failed_slot;
  LogicalMs at = 0;

  bool operator==(const Implication&) const = default;
};

struct RootCauseSuspect {
  SlotName slot;
  std::int64_t count = 0;
  std::vector<SlotName> implicated_by;
  LogicalMs first_at = 0;
  LogicalMs last_at = 0;

  bool operator==(const RootCauseSuspect&) const = default;
};

/// Per-dependency counters: every failure of a component increments each of
/// its blueprint dependencies. Cumulative for a whole run.
class RootCauseLedger {
 public:
  explicit RootCauseLedger(std::int64_t threshold = kDefaultRootCauseThreshold);

  std::int64_t threshold() const noexcept { return threshold_; }

  /// CF4 reports have no failed component and leave the ledger unchanged.
  void record_failure(const FailureReport& report);

  std::int64_t count(const SlotName& slot) const;
  const std::map<SlotName, std::int64_t>& counters() const noexcept { return counters_; }
  const std::map<SlotName, std::vector<Implication>>& implications() const noexcept {
    return implications_;
  }

  /// Slots with count >= threshold, by count descending then name.
  std::vector<RootCauseSuspect> suspects() const;

  bool operator==(const RootCauseLedger&) const = default;

 private:
  std::int64_t threshold_;
  std::map<SlotName, std::int64_t> counters_;
  std::map<SlotName, std::vector<Implication>> implications_;
};

/// CSV with header component,count,implicated_by,first_at,last_at and LF line
/// endings; implicated_by is ';'-joined in record order.
std::string format_suspect_csv(const std::vector<RootCauseSuspect>& suspects);
void write_suspect_report(const std::vector<RootCauseSuspect>& suspects,
                          const std::filesystem::path& path);

}  // namespace healsim
