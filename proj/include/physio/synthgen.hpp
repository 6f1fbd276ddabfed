#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "physio/signals.hpp"
#include "physio/types.hpp"

namespace physio {

/// State-dependent component added to one channel: a sinusoid plus a
/// bounded sawtooth drift (slope `drift` in channel units per second,
/// restarting every kDriftPeriod seconds).
struct ChannelResponse {
  double amplitude = 0.0;
  double frequency = 0.0;  ///< Hz
  double drift = 0.0;

  bool operator==(const ChannelResponse&) const = default;
};

inline constexpr double kDriftPeriod = 60.0;

struct ChannelBaseline {
  double level = 0.0;
  double noise_sd = 0.0;

  bool operator==(const ChannelBaseline&) const = default;
};

using StateResponse = std::array<ChannelResponse, kNumChannels>;

struct UserProfile {
  std::string user_id;
  std::uint64_t seed = 0;
  std::array<ChannelBaseline, kNumChannels> baseline{};
  std::array<StateResponse, kNumClasses> response{};
  /// Present in every state; lets a pooled model tell users apart.
  StateResponse signature{};
  /// Draw a fresh phase per segment and channel instead of starting at 0.
  bool randomize_phase = true;
};

struct ScheduleSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  Awareness state = Awareness::LL;
};

using StateSchedule = std::vector<ScheduleSegment>;

/// Throws ScheduleGap unless the segments tile [0, duration_s] in order.
void validate_schedule(const StateSchedule& schedule, double duration_s);

/// Every channel at its native rate from t = 0, values rounded as
/// write_session would store them; labels at 4 Hz.
MultimodalRecord generate_session(const UserProfile& profile, double duration_s, const StateSchedule& schedule,
                                  const std::string& session_id = "0");

/// Distinct state -> archetype mapping for user index u.
std::array<std::size_t, kNumClasses> state_mapping(std::size_t u, std::uint64_t seed);

/// Users share baselines and four response archetypes. User u maps state s
/// to a blend of archetype s and archetype mapping(u)[s] with weight
/// `divergence`; divergence 0 gives identical profiles apart from id/seed.
std::vector<UserProfile> preset_cohort(std::size_t n_users, double divergence, std::uint64_t seed = 0,
                                       double noise_scale = 1.0);

/// Classes differ only in the amplitude of a fast oscillation with random
/// phase, so the class signal lives in pairwise distances.
UserProfile distance_profile(std::uint64_t seed = 0, double noise_scale = 1.0);

/// Window counts per class for the four reference users.
inline constexpr std::array<std::array<std::size_t, kNumClasses>, 4> kReferenceClassCounts = {{
    {429, 776, 513, 440},
    {259, 263, 368, 398},
    {192, 263, 133, 237},
    {137, 246, 202, 169},
}};

/// Reference per-class counts for user u (users past the fourth reuse the
/// table cyclically), scaled and rounded.
std::array<std::size_t, kNumClasses> preset_class_counts(std::size_t u, double scale);

/// Session length giving exactly `windows` windows at the default 30 s / 3 s.
double preset_duration(std::size_t windows, double window_s = 30.0, double step_s = 3.0);

/// clamp(round(T / 120), 4, 16) segments with integer-second boundaries,
/// allocated to states by largest remainder of `class_counts` (every state
/// with a non-zero count gets at least one segment), in shuffled order.
StateSchedule preset_schedule(const std::array<std::size_t, kNumClasses>& class_counts, double duration_s,
                              std::uint64_t seed);

struct SynthOptions {
  std::size_t users = 4;
  double divergence = 1.0;
  double scale = 0.25;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  bool distance_structured = false;  ///< one user built from distance_profile
};

/// The preset cohort (or distance-structured user), one session each.
std::vector<MultimodalRecord> preset_sessions(const SynthOptions& options);

}  // namespace physio
