#include "healsim/analyzer.hpp"

#include <algorithm>
#include <set>

#include "csv.hpp"
#include "healsim/error.hpp"

namespace healsim {

std::string FailureReport::subject_text() const {
  if (const auto* slot = std::get_if<SlotName>(&subject)) return *slot;
  return format_connector(std::get<ConnectorRef>(subject));
}

std::vector<FailureReport> classify(const std::vector<ChangeEvent>& events,
                                    const ArchitectureModel& model,
                                    std::int64_t exception_threshold,
                                    std::uint64_t first_report_id) {
  std::set<SlotName> removed;
  for (const auto& e : events) {
    if (e.kind == ChangeKind::kComponentRemoved) removed.insert(e.slot());
  }

  std::vector<FailureReport> reports;
  auto next_id = first_report_id;
  auto component_report = [&](FaultKind kind, const ChangeEvent& e) {
    FailureReport r;
    r.report_id = next_id++;
    r.kind = kind;
    r.subject = e.slot();
    r.detected_at = e.at;
    r.dependent_slots = dependencies_of(model, e.slot());
    return r;
  };

  for (const auto& e : events) {
    switch (e.kind) {
      case ChangeKind::kStateChanged:
        if (e.new_state == ComponentState::kUnknown) {
          reports.push_back(component_report(FaultKind::kCF1, e));
        }
        break;
      case ChangeKind::kExceptionsChanged:
        if (*e.new_count > exception_threshold) {
          auto r = component_report(FaultKind::kCF2, e);
          r.exception_count = *e.new_count;
          reports.push_back(std::move(r));
        }
        break;
      case ChangeKind::kComponentRemoved:
        reports.push_back(component_report(FaultKind::kCF3, e));
        break;
      case ChangeKind::kConnectorRemoved: {
        const auto& c = e.connector();
        if (removed.contains(c.from) || removed.contains(c.to)) break;
        FailureReport r;
        r.report_id = next_id++;
        r.kind = FaultKind::kCF4;
        r.subject = c;
        r.detected_at = e.at;
        reports.push_back(std::move(r));
        break;
      }
      case ChangeKind::kComponentAdded:
      case ChangeKind::kConnectorAdded:
        break;
    }
  }
  return reports;
}

RootCauseLedger::RootCauseLedger(std::int64_t threshold) : threshold_(threshold) {
  if (threshold < 1) {
    throw Error(Errc::kInvalidConfig, "root-cause threshold must be at least 1");
  }
}

void RootCauseLedger::record_failure(const FailureReport& report) {
  if (report.kind == FaultKind::kCF4) return;
  const auto& failed = std::get<SlotName>(report.subject);
  for (const auto& dep : report.dependent_slots) {
    ++counters_[dep];
    implications_[dep].push_back({report.report_id, failed, report.detected_at});
  }
}

std::int64_t RootCauseLedger::count(const SlotName& slot) const {
  auto it = counters_.find(slot);
  return it == counters_.end() ? 0 : it->second;
}

std::vector<RootCauseSuspect> RootCauseLedger::suspects() const {
  std::vector<RootCauseSuspect> out;
  for (const auto& [slot, n] : counters_) {
    if (n < threshold_) continue;
    const auto& imps = implications_.at(slot);
    RootCauseSuspect s;
    s.slot = slot;
    s.count = n;
    for (const auto& imp : imps) s.implicated_by.push_back(imp.failed_slot);
    s.first_at = imps.front().at;
    s.last_at = imps.back().at;
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.slot < b.slot;
  });
  return out;
}

std::string format_suspect_csv(const std::vector<RootCauseSuspect>& suspects) {
  std::string out = "component,count,implicated_by,first_at,last_at\n";
  for (const auto& s : suspects) {
    std::string joined;
    for (std::size_t i = 0; i < s.implicated_by.size(); ++i) {
      if (i) joined += ';';
      joined += s.implicated_by[i];
    }
    out += detail::csv_field(s.slot) + ',' + std::to_string(s.count) + ',' +
           detail::csv_field(joined) + ',' + std::to_string(s.first_at) + ',' +
           std::to_string(s.last_at) + '\n';
  }
  return out;
}

void write_suspect_report(const std::vector<RootCauseSuspect>& suspects,
                          const std::filesystem::path& path) {
  detail::write_file(path, format_suspect_csv(suspects));
}

}  // namespace healsim
