#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "healsim/architecture.hpp"
#include "healsim/rng.hpp"
#include "healsim/types.hpp"

namespace healsim {

inline constexpr LogicalMs kMinInjectionInterval = 100;
inline constexpr LogicalMs kMaxInjectionInterval = 500;

struct FaultInstance {
  FaultKind kind = FaultKind::kCF1;
  /// Slot for CF1-CF3, connector for CF4.
  std::variant<SlotName, ConnectorRef> target;
  /// CF2 only: exceptions added at once.
  std::optional<std::int64_t> magnitude;
  LogicalMs injected_at = 0;

  std::string target_text() const;
  bool operator==(const FaultInstance&) const = default;
};

/// Maps a raw generator output onto [100, 500].
constexpr LogicalMs interval_from_draw(std::uint64_t draw) noexcept {
  return kMinInjectionInterval +
         static_cast<LogicalMs>(draw % (kMaxInjectionInterval - kMinInjectionInterval + 1));
}

/// Logical gap before the next injection, uniform over [100, 500] ms.
LogicalMs draw_interval(SplitMix64& rng);

/// Draws kind, then target (present components for CF1-CF3, live connectors
/// for CF4, both in blueprint order), then the CF2 magnitude
/// exception_threshold + 1 + (draw mod 5). Throws NoEligibleTarget.
FaultInstance draw_fault(SplitMix64& rng, const ArchitectureModel& model,
                         std::int64_t exception_threshold);

/// Applies the fault. CF3 also drops every connector touching the slot.
/// Throws TargetAbsent if the target is already gone.
void inject(ArchitectureModel& model, const FaultInstance& fault);

}  // namespace healsim
