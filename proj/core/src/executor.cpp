#include "healsim/executor.hpp"

#include "healsim/error.hpp"

namespace healsim {

namespace {

class Recorder {
 public:
  Recorder(ArchitectureModel& model, ExecutionResult& result)
      : model_(model), result_(result) {}

  void operator()(const Mutation& m) {
    apply_mutation(model_, m);
    model_.advance_clock(1);
    result_.applied_mutations.push_back(describe(m));
  }

 private:
  ArchitectureModel& model_;
  ExecutionResult& result_;
};

const SlotName& require_slot(const ArchitectureModel& model, const RepairPlan& plan) {
  if (!model.blueprint().has_slot(plan.subject)) {
    throw Error(Errc::kSubjectUnknown, std::string(to_string(plan.strategy)) + " subject '" +
                                           plan.subject + "' is not a slot of the blueprint");
  }
  return plan.subject;
}

// Intended connectors incident to the slot whose other end is present but
// which are not live.
void restore_incident(const ArchitectureModel& model, const SlotName& slot, Recorder& rec) {
  for (const auto& c : model.blueprint().incident_connectors(slot)) {
    if (model.component(c.from) && model.component(c.to) && !model.has_connector(c)) {
      rec(mutation::AddConnector{c});
    }
  }
}

void reset_in_place(const ArchitectureModel& model, const SlotName& slot, Recorder& rec) {
  const auto& c = *model.component(slot);
  if (c.state != ComponentState::kStarted) {
    rec(mutation::SetState{slot, ComponentState::kStarted});
  }
  if (c.exception_count != 0) rec(mutation::ResetExceptions{slot});
}

}  // namespace

ExecutionResult execute(ArchitectureModel& model, const RepairPlan& plan) {
  // Work on a copy so a failure part-way leaves the caller's model untouched.
  ArchitectureModel work = model;
  ExecutionResult result;
  result.plan = plan;
  Recorder rec(work, result);

  switch (plan.strategy) {
    case Strategy::kAS1: {
      const auto& slot = require_slot(work, plan);
      if (!work.component(slot)) {
        throw Error(Errc::kRestartAbsent, "cannot restart absent component '" + slot + "'");
      }
      reset_in_place(work, slot, rec);
      break;
    }
    case Strategy::kAS2: {
      const auto& slot = require_slot(work, plan);
      if (!work.component(slot)) {
        rec(mutation::Instantiate{slot});
        result.new_instance_id = work.component(slot)->instance_id;
      } else {
        reset_in_place(work, slot, rec);
      }
      restore_incident(work, slot, rec);
      break;
    }
    case Strategy::kAS3: {
      auto ends = split_connector(plan.subject);
      const ConnectorRef* conn =
          ends ? work.blueprint().find_intended(ends->first, ends->second) : nullptr;
      if (!conn) {
        throw Error(Errc::kSubjectUnknown,
                    "AS3 subject '" + plan.subject + "' is not an intended connector");
      }
      if (!work.component(conn->from) || !work.component(conn->to)) {
        throw Error(Errc::kEndpointAbsent,
                    "cannot reconnect " + plan.subject + ": an endpoint is absent");
      }
      if (!work.has_connector(*conn)) rec(mutation::AddConnector{*conn});
      break;
    }
    case Strategy::kAS4: {
      const auto& slot = require_slot(work, plan);
      if (work.component(slot)) rec(mutation::RemoveComponent{slot});
      rec(mutation::Instantiate{slot});
      result.new_instance_id = work.component(slot)->instance_id;
      restore_incident(work, slot, rec);
      break;
    }
  }

  result.completed_at = work.clock();
  model = std::move(work);
  return result;
}

}  // namespace healsim
