#include "physio/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "physio/errors.hpp"
#include "physio/rng.hpp"

namespace physio {

namespace {

constexpr double kLabelRate = 4.0;

struct ChannelScale {
  double level;
  double unit;  // typical response amplitude
};

// acc_x, acc_y, acc_z, bvp, eda, hr, temp
constexpr std::array<ChannelScale, kNumChannels> kScales = {{
    {-20.0, 10.0},
    {30.0, 10.0},
    {50.0, 10.0},
    {0.0, 60.0},
    {2.0, 0.5},
    {75.0, 8.0},
    {33.0, 0.4},
}};

constexpr double kNoiseFraction = 0.15;
constexpr double kSignatureAmp = 1.0;
constexpr std::array<double, 4> kAmpLevels = {0.25, 0.6, 1.0, 1.5};
constexpr std::array<double, 4> kFreqLevels = {0.02, 0.05, 0.09, 0.14};
constexpr std::array<double, 4> kDriftLevels = {-1.0, -0.3, 0.3, 1.0};

StateResponse archetype(std::size_t a) {
  StateResponse r{};
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const double unit = kScales[c].unit;
    r[c].amplitude = unit * kAmpLevels[(a + c) % 4];
    r[c].frequency = kFreqLevels[(a + 2 * c + c / 4) % 4];
    r[c].drift = unit * kDriftLevels[(3 * a + c) % 4] / kDriftPeriod;
  }
  return r;
}

ChannelResponse lerp(const ChannelResponse& a, const ChannelResponse& b, double w) {
  return {a.amplitude + w * (b.amplitude - a.amplitude), a.frequency + w * (b.frequency - a.frequency),
          a.drift + w * (b.drift - a.drift)};
}

std::array<ChannelBaseline, kNumChannels> shared_baseline(double noise_scale) {
  std::array<ChannelBaseline, kNumChannels> b{};
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    b[c] = {kScales[c].level, noise_scale * kNoiseFraction * kScales[c].unit};
  }
  return b;
}

std::size_t segment_at(const StateSchedule& schedule, double t) {
  const auto it = std::upper_bound(schedule.begin(), schedule.end(), t,
                                   [](double v, const ScheduleSegment& s) { return v < s.start_s; });
  return it == schedule.begin() ? 0 : static_cast<std::size_t>(it - schedule.begin()) - 1;
}

// Integer parts of `total * weights / sum(weights)` topped up by largest
// remainder (ties to the lower index).
std::vector<long> largest_remainder(std::span<const double> weights, long total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<long> out(weights.size(), 0);
  std::vector<double> rem(weights.size(), 0.0);
  long used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double q = sum > 0.0 ? static_cast<double>(total) * weights[i] / sum : 0.0;
    out[i] = static_cast<long>(std::floor(q));
    rem[i] = q - static_cast<double>(out[i]);
    used += out[i];
  }
  while (used < total) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < weights.size(); ++i) {
      if (rem[i] > rem[best]) best = i;
    }
    ++out[best];
    rem[best] = -1.0;
    ++used;
  }
  return out;
}

}  // namespace

void validate_schedule(const StateSchedule& schedule, double duration_s) {
  constexpr double kTol = 1e-9;
  if (schedule.empty()) throw ScheduleGap("schedule is empty");
  if (std::abs(schedule.front().start_s) > kTol) {
    throw ScheduleGap("schedule starts at " + std::to_string(schedule.front().start_s) + " s, not 0");
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i].end_s > schedule[i].start_s)) {
      throw ScheduleGap("segment " + std::to_string(i) + " has non-positive length");
    }
    if (i > 0 && std::abs(schedule[i].start_s - schedule[i - 1].end_s) > kTol) {
      throw ScheduleGap("gap or overlap between segments " + std::to_string(i - 1) + " and " + std::to_string(i));
    }
  }
  if (schedule.back().end_s < duration_s - kTol) {
    throw ScheduleGap("schedule ends at " + std::to_string(schedule.back().end_s) + " s before the session end " +
                      std::to_string(duration_s) + " s");
  }
}

MultimodalRecord generate_session(const UserProfile& profile, double duration_s, const StateSchedule& schedule,
                                  const std::string& session_id) {
  validate_schedule(schedule, duration_s);

  std::vector<std::array<double, kNumChannels>> phases(schedule.size());
  Rng phase_rng(derive_seed(profile.seed, 2000));
  for (auto& seg : phases) {
    for (double& p : seg) p = profile.randomize_phase ? phase_rng.uniform(0.0, 2.0 * std::numbers::pi) : 0.0;
  }

  MultimodalRecord rec;
  rec.user_id = profile.user_id;
  rec.session_id = session_id;
  rec.label_fs = kLabelRate;
  rec.label_t0 = 0.0;
  for (Channel ch : kAllChannels) {
    const std::size_t c = index(ch);
    const double fs = native_rate(ch);
    const auto n = static_cast<std::size_t>(std::floor(duration_s * fs + 1e-9));
    Signal& s = rec[ch];
    s.channel = ch;
    s.t0 = 0.0;
    s.fs = fs;
    s.values.resize(n);
    Rng noise(derive_seed(profile.seed, 1000 + c));
    const ChannelBaseline& base = profile.baseline[c];
    const ChannelResponse& sig = profile.signature[c];
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / fs;
      const std::size_t si = segment_at(schedule, t);
      const ScheduleSegment& seg = schedule[si];
      const ChannelResponse& r = profile.response[index(seg.state)][c];
      const double local = t - seg.start_s;
      double v = base.level;
      v += r.amplitude * std::sin(2.0 * std::numbers::pi * r.frequency * local + phases[si][c]);
      v += r.drift * (std::fmod(local, kDriftPeriod) - kDriftPeriod / 2.0);
      v += sig.amplitude * std::sin(2.0 * std::numbers::pi * sig.frequency * t);
      v += base.noise_sd * noise.normal();
      s.values[k] = csv_round(v);
    }
  }
  const auto n_labels = static_cast<std::size_t>(std::floor(duration_s * kLabelRate + 1e-9));
  rec.labels.resize(n_labels);
  for (std::size_t k = 0; k < n_labels; ++k) {
    rec.labels[k] = schedule[segment_at(schedule, static_cast<double>(k) / kLabelRate)].state;
  }
  return rec;
}

std::array<std::size_t, kNumClasses> state_mapping(std::size_t u, std::uint64_t seed) {
  // Identity, then the six transpositions; any two of these disagree on at
  // least two states. Later users get seeded random permutations.
  constexpr std::array<std::array<std::size_t, 2>, 7> kSwaps = {{
      {0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3},
  }};
  std::array<std::size_t, kNumClasses> m = {0, 1, 2, 3};
  if (u < kSwaps.size()) {
    std::swap(m[kSwaps[u][0]], m[kSwaps[u][1]]);
  } else {
    Rng rng(derive_seed(seed, 3000 + u));
    rng.shuffle(std::span<std::size_t>(m));
  }
  return m;
}

std::vector<UserProfile> preset_cohort(std::size_t n_users, double divergence, std::uint64_t seed,
                                       double noise_scale) {
  if (n_users < 1) throw ConfigError("cohort needs at least one user");
  if (!(divergence >= 0.0 && divergence <= 1.0)) throw ConfigError("divergence must lie in [0, 1]");
  std::vector<UserProfile> users(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    UserProfile& p = users[u];
    p.user_id = std::to_string(u + 1);
    p.seed = derive_seed(seed, u);
    p.baseline = shared_baseline(noise_scale);
    const auto map = state_mapping(u, seed);
    for (std::size_t s = 0; s < kNumClasses; ++s) {
      const StateResponse own = archetype(s);
      const StateResponse other = archetype(map[s]);
      for (std::size_t c = 0; c < kNumChannels; ++c) p.response[s][c] = lerp(own[c], other[c], divergence);
    }
    if (divergence == 0.0) continue;
    for (Channel ch : {Channel::AccX, Channel::AccY, Channel::AccZ, Channel::Bvp}) {
      const std::size_t c = index(ch);
      p.signature[c] = {divergence * kSignatureAmp * kScales[c].unit, 0.17 + 0.035 * static_cast<double>(u % 8), 0.0};
    }
  }
  return users;
}

UserProfile distance_profile(std::uint64_t seed, double noise_scale) {
  constexpr std::array<double, 4> kLevels = {0.3, 0.6, 0.9, 1.2};
  UserProfile p;
  p.user_id = "1";
  p.seed = derive_seed(seed, 0);
  p.baseline = shared_baseline(noise_scale);
  for (std::size_t s = 0; s < kNumClasses; ++s) {
    for (Channel ch : kAllChannels) {
      const std::size_t c = index(ch);
      // HR is sampled at 1 Hz, so its oscillation stays below Nyquist.
      const double f = ch == Channel::Hr ? 0.2 : 0.5;
      p.response[s][c] = {kLevels[s] * kScales[c].unit, f, 0.0};
    }
  }
  return p;
}

std::array<std::size_t, kNumClasses> preset_class_counts(std::size_t u, double scale) {
  if (!(scale > 0.0)) throw ConfigError("scale must be positive");
  std::array<std::size_t, kNumClasses> out{};
  const auto& ref = kReferenceClassCounts[u % kReferenceClassCounts.size()];
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out[c] = static_cast<std::size_t>(std::llround(static_cast<double>(ref[c]) * scale));
  }
  return out;
}

double preset_duration(std::size_t windows, double window_s, double step_s) {
  if (windows == 0) throw ConfigError("need at least one window");
  return window_s + step_s * static_cast<double>(windows - 1);
}

StateSchedule preset_schedule(const std::array<std::size_t, kNumClasses>& class_counts, double duration_s,
                              std::uint64_t seed) {
  const long total_s = std::lround(duration_s);
  std::vector<double> weights(class_counts.begin(), class_counts.end());
  std::size_t present = 0;
  for (std::size_t n : class_counts) present += n > 0 ? 1 : 0;
  if (present == 0) throw ConfigError("schedule needs at least one non-empty class");

  long segments = std::clamp(std::lround(static_cast<double>(total_s) / 120.0), 4L, 16L);
  segments = std::max<long>(segments, static_cast<long>(present));
  if (total_s < segments) throw ScheduleGap("session too short for its segments");

  // Segments per state: one each, the rest by largest remainder.
  std::vector<long> per_state = largest_remainder(weights, segments - static_cast<long>(present));
  for (std::size_t c = 0; c < kNumClasses; ++c) per_state[c] += class_counts[c] > 0 ? 1 : 0;
  const std::vector<long> seconds = largest_remainder(weights, total_s);

  std::array<std::vector<long>, kNumClasses> lengths;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (per_state[c] == 0) continue;
    long n_seg = std::min(per_state[c], std::max(1L, seconds[c]));
    for (long i = 0; i < n_seg; ++i) {
      lengths[c].push_back(seconds[c] / n_seg + (i < seconds[c] % n_seg ? 1 : 0));
    }
  }

  std::vector<Awareness> order;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (std::size_t i = 0; i < lengths[c].size(); ++i) order.push_back(kAllClasses[c]);
  }
  Rng rng(seed);
  rng.shuffle(std::span<Awareness>(order));

  StateSchedule out;
  std::array<std::size_t, kNumClasses> used{};
  long at = 0;
  for (Awareness a : order) {
    const long len = lengths[index(a)][used[index(a)]++];
    if (len <= 0) continue;
    if (!out.empty() && out.back().state == a) {
      out.back().end_s += static_cast<double>(len);
    } else {
      out.push_back({static_cast<double>(at), static_cast<double>(at + len), a});
    }
    at += len;
  }
  out.back().end_s = duration_s;
  return out;
}

std::vector<MultimodalRecord> preset_sessions(const SynthOptions& options) {
  std::vector<UserProfile> profiles;
  if (options.distance_structured) {
    profiles.push_back(distance_profile(options.seed, options.noise_scale));
  } else {
    profiles = preset_cohort(options.users, options.divergence, options.seed, options.noise_scale);
  }
  std::vector<MultimodalRecord> out;
  out.reserve(profiles.size());
  for (std::size_t u = 0; u < profiles.size(); ++u) {
    const auto counts = preset_class_counts(u, options.scale);
    const std::size_t windows = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    const double duration = preset_duration(std::max<std::size_t>(windows, 1));
    const StateSchedule schedule = preset_schedule(counts, duration, derive_seed(profiles[u].seed, 4000));
    out.push_back(generate_session(profiles[u], duration, schedule));
  }
  return out;
}

}  // namespace physio
