#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "physio/types.hpp"

namespace physio {

/// One channel's uniformly sampled series. Sample k is at t0 + k / fs.
struct Signal {
  Channel channel = Channel::AccX;
  double t0 = 0.0;
  double fs = 1.0;
  std::vector<double> values;

  double last_time() const { return t0 + static_cast<double>(values.size() - 1) / fs; }
  /// End of the covered interval: one sample period past the last sample.
  double end_time() const { return t0 + static_cast<double>(values.size()) / fs; }
};

/// Seven time-aligned channels plus the awareness label track.
struct MultimodalRecord {
  std::array<Signal, kNumChannels> channels;
  std::vector<Awareness> labels;
  double label_fs = 4.0;
  double label_t0 = 0.0;
  std::string user_id;
  std::string session_id;

  const Signal& operator[](Channel c) const { return channels[index(c)]; }
  Signal& operator[](Channel c) { return channels[index(c)]; }
};

enum class ScalingMode { Global, Local, Combined };

std::string_view name(ScalingMode m);
ScalingMode parse_scaling_mode(std::string_view s);

struct WindowSpec {
  double window_s = 30.0;
  double step_s = 3.0;
  double fs = 4.0;
  double epsilon_mix = 0.5;
  double clip_lo_pct = 5.0;
  double clip_hi_pct = 95.0;
  ScalingMode scaling_mode = ScalingMode::Combined;

  /// Image side length window_s * fs. Throws InvalidSpec when not a
  /// positive integer.
  std::size_t side() const;
  /// Throws InvalidSpec on any violated invariant.
  void validate() const;
};

struct ClipBounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct ClipResult {
  Signal signal;
  ClipBounds bounds;
};

/// n samples scaled into [0, 1] for one channel.
struct ScaledWindow {
  Channel channel = Channel::AccX;
  double start_s = 0.0;
  std::vector<double> values;
  Awareness label = Awareness::LL;
};

/// All seven channels of one window position. `ordinal` counts windows from
/// 0 in time order.
struct WindowGroup {
  std::size_t ordinal = 0;
  double start_s = 0.0;
  Awareness label = Awareness::LL;
  std::array<ScaledWindow, kNumChannels> channels;
};

enum class SessionFormat { CsvDirectory };

/// Reads a session directory: <CHANNEL>.csv for each channel with header
/// `t,value`, plus labels.csv with header `t,label`. Optional session.meta
/// holds `user_id=` / `session_id=` lines; otherwise user_id is the directory
/// name and session_id is "0".
MultimodalRecord load_session(const std::filesystem::path& dir,
                              SessionFormat format = SessionFormat::CsvDirectory);

/// Writes the format read by load_session. Times and values use 6-decimal
/// fixed notation.
void write_session(const MultimodalRecord& rec, const std::filesystem::path& dir);

/// Formats a value exactly as write_session does and parses it back.
double csv_round(double v);

/// Linear interpolation onto t0 + k / target_fs for every grid point up to
/// and including the last native sample time.
Signal resample(const Signal& s, double target_fs);

/// Linear interpolation onto exactly `count` grid points starting at
/// `start`; grid points past either end hold the end value.
Signal resample(const Signal& s, double target_fs, std::size_t count, double start);

/// Resamples every channel onto a shared grid at `fs` spanning the
/// intersection of the channel intervals, and maps labels by zero-order hold.
MultimodalRecord synchronize(const MultimodalRecord& rec, double fs);

/// Linear-interpolated percentile (pct in [0, 100]) over sorted values.
double percentile_sorted(std::span<const double> sorted, double pct);

ClipResult clip(const Signal& s, double lo_pct, double hi_pct);

/// Min-max scaling to [0, 1]. A degenerate range maps to zeros.
std::vector<double> scale_window(std::span<const double> w, double global_min, double global_max,
                                 ScalingMode mode, double epsilon_mix);

/// Number of windows for a session of `duration_s` seconds.
std::size_t window_count(double duration_s, double window_s, double step_s);

/// Majority label; ties go to the lowest-awareness class.
Awareness majority_label(std::span<const Awareness> labels);

/// Clips every channel over the whole session, then cuts and scales windows.
/// `rec` must already be synchronized at spec.fs.
std::vector<WindowGroup> windows(const MultimodalRecord& rec, const WindowSpec& spec);

}  // namespace physio
