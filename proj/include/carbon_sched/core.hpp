#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace carbon_sched {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CARBON_SCHED_ERROR(Name)             \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  };

CARBON_SCHED_ERROR(InvalidArgument)
CARBON_SCHED_ERROR(InvalidConfig)
CARBON_SCHED_ERROR(InfeasibleAssignment)
CARBON_SCHED_ERROR(IncompatibleGraphs)
CARBON_SCHED_ERROR(NoNeighbor)
CARBON_SCHED_ERROR(InfeasibleGraph)
CARBON_SCHED_ERROR(ProfileError)
CARBON_SCHED_ERROR(TraceError)
CARBON_SCHED_ERROR(SimulationError)

#undef CARBON_SCHED_ERROR

// ---------------------------------------------------------------------------
// SliceType
// ---------------------------------------------------------------------------

// Enumerators are listed in canonical order: largest compute share first.
enum class SliceType : std::uint8_t { S7g = 0, S4g = 1, S3g = 2, S2g = 3, S1g = 4 };

inline constexpr std::size_t kSliceTypeCount = 5;

inline constexpr std::array<SliceType, kSliceTypeCount> kAllSlices = {
    SliceType::S7g, SliceType::S4g, SliceType::S3g, SliceType::S2g, SliceType::S1g};

constexpr std::size_t slice_index(SliceType s) { return static_cast<std::size_t>(s); }

constexpr SliceType slice_at(std::size_t i) { return kAllSlices.at(i); }

// Ordering by compute share: S7g > S4g > ... > S1g.
constexpr bool larger_slice(SliceType a, SliceType b) { return slice_index(a) < slice_index(b); }

constexpr std::string_view slice_name(SliceType s) {
  switch (s) {
    case SliceType::S7g: return "7g";
    case SliceType::S4g: return "4g";
    case SliceType::S3g: return "3g";
    case SliceType::S2g: return "2g";
    case SliceType::S1g: return "1g";
  }
  return "?";
}

inline SliceType parse_slice(std::string_view text) {
  for (auto s : kAllSlices) {
    if (text == slice_name(s)) return s;
  }
  throw InvalidArgument("unknown slice type '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// VariantId
// ---------------------------------------------------------------------------

// Ordinal model-variant id; 1 is the lowest-quality variant of the catalog.
class VariantId {
 public:
  constexpr VariantId() = default;
  explicit VariantId(int ordinal) : ordinal_(ordinal) {
    if (ordinal < 1) throw InvalidArgument("variant ordinals start at 1");
  }

  constexpr int value() const { return ordinal_; }
  constexpr std::size_t index() const { return static_cast<std::size_t>(ordinal_ - 1); }

  friend constexpr auto operator<=>(VariantId, VariantId) = default;

 private:
  int ordinal_ = 1;
};

// ---------------------------------------------------------------------------
// MigConfigId
// ---------------------------------------------------------------------------

inline constexpr int kMigConfigCount = 19;

class MigConfigId {
 public:
  constexpr MigConfigId() = default;
  explicit MigConfigId(int id) : id_(id) {
    if (id < 1 || id > kMigConfigCount) {
      throw InvalidConfig("MIG configuration id " + std::to_string(id) + " outside 1..19");
    }
  }

  constexpr int value() const { return id_; }

  friend constexpr auto operator<=>(MigConfigId, MigConfigId) = default;

 private:
  int id_ = 1;
};

// ---------------------------------------------------------------------------
// Carbon intensity and objective parameters
// ---------------------------------------------------------------------------

// Grid carbon intensity in gCO2/kWh.
class CarbonIntensity {
 public:
  constexpr CarbonIntensity() = default;
  explicit CarbonIntensity(double gco2_per_kwh) : value_(gco2_per_kwh) {
    if (!std::isfinite(gco2_per_kwh) || gco2_per_kwh < 0.0) {
      throw InvalidArgument("carbon intensity must be finite and non-negative");
    }
  }

  constexpr double value() const { return value_; }

  friend constexpr auto operator<=>(CarbonIntensity, CarbonIntensity) = default;

 private:
  double value_ = 0.0;
};

// Weights and baselines of the accuracy/carbon objective.
//
// `c_base` is the IT-level baseline carbon per request (gCO2/request, no PUE);
// PUE multiplies both sides of the relative carbon saving and so only enters
// reported absolute totals.
struct ObjectiveParams {
  double lambda = 0.5;
  double a_base = 1.0;
  double c_base = 1.0;
  double l_tail_ms = 1.0;
  double pue = 1.5;

  ObjectiveParams() = default;
  ObjectiveParams(double lambda_, double a_base_, double c_base_, double l_tail_ms_, double pue_ = 1.5)
      : lambda(lambda_), a_base(a_base_), c_base(c_base_), l_tail_ms(l_tail_ms_), pue(pue_) {
    validate();
  }

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(lambda) || !finite(a_base) || !finite(c_base) || !finite(l_tail_ms) || !finite(pue)) {
      throw InvalidArgument("objective parameters must be finite");
    }
    if (lambda < 0.0 || lambda > 1.0) throw InvalidArgument("lambda must lie in [0, 1]");
    if (a_base <= 0.0 || a_base > 1.0) throw InvalidArgument("a_base must lie in (0, 1]");
    if (c_base <= 0.0) throw InvalidArgument("c_base must be positive");
    if (l_tail_ms <= 0.0) throw InvalidArgument("l_tail must be positive");
    if (pue < 1.0) throw InvalidArgument("pue must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// Seeding
// ---------------------------------------------------------------------------

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL));
}

}  // namespace carbon_sched
