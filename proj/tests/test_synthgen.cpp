#include <doctest.h>

#include <numbers>
#include <set>

#include "oracles.hpp"
#include "physio/errors.hpp"
#include "physio/kv.hpp"
#include "physio/synthgen.hpp"

using namespace physio;
namespace fs = std::filesystem;

TEST_CASE("zero noise, single state: closed-form waveform") {
  UserProfile p;
  p.user_id = "9";
  p.randomize_phase = false;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    p.baseline[c] = {10.0 + static_cast<double>(c), 0.0};
    p.response[index(Awareness::L)][c] = {1.5, 0.1 + 0.01 * static_cast<double>(c), 0.02};
  }
  const double T = 90.0;
  const MultimodalRecord rec = generate_session(p, T, {{0.0, T, Awareness::L}});
  for (Channel ch : kAllChannels) {
    const std::size_t c = index(ch);
    const Signal& s = rec[ch];
    CHECK(s.fs == native_rate(ch));
    REQUIRE(s.values.size() == static_cast<std::size_t>(T * native_rate(ch)));
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      const double t = static_cast<double>(k) / s.fs;
      const double want = 10.0 + static_cast<double>(c) +
                          1.5 * std::sin(2.0 * std::numbers::pi * (0.1 + 0.01 * static_cast<double>(c)) * t) +
                          0.02 * (std::fmod(t, 60.0) - 30.0);
      CHECK(std::abs(s.values[k] - want) <= 5e-7);
    }
  }
  CHECK(rec.labels.size() == 360);
  for (Awareness a : rec.labels) CHECK(a == Awareness::L);
}

TEST_CASE("same seed gives byte-identical session files") {
  const fs::path root = oracle::fresh_dir(PHYSIO_SCRATCH);
  SynthOptions o;
  o.scale = 0.05;
  o.seed = 7;
  const auto a = preset_sessions(o);
  const auto b = preset_sessions(o);
  REQUIRE(a.size() == 4);
  for (std::size_t u = 0; u < a.size(); ++u) {
    write_session(a[u], root / "a" / a[u].user_id);
    write_session(b[u], root / "b" / b[u].user_id);
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root / "a");
    CHECK(read_text(e.path()) == read_text(root / "b" / rel));
    ++files;
  }
  CHECK(files == 4 * 9);

  o.seed = 8;
  const auto c = preset_sessions(o);
  CHECK(c[0][Channel::Eda].values != a[0][Channel::Eda].values);
}

TEST_CASE("30-minute preset sessions give the expected window count") {
  const auto cohort = preset_cohort(4, 1.0, 0);
  const double T = 1800.0;
  const std::size_t want = static_cast<std::size_t>(std::floor((T - 30.0) / 3.0)) + 1;
  for (std::size_t u = 0; u < cohort.size(); ++u) {
    const StateSchedule s = preset_schedule(preset_class_counts(u, 1.0), T, 11 + u);
    const MultimodalRecord rec = generate_session(cohort[u], T, s);
    const std::size_t n = windows(synchronize(rec, 4.0), WindowSpec{}).size();
    CHECK(n + 1 >= want);
    CHECK(n <= want + 1);
  }
}

TEST_CASE("preset sizes follow the scaled reference counts") {
  SynthOptions o;
  o.scale = 0.1;
  const auto sessions = preset_sessions(o);
  for (std::size_t u = 0; u < sessions.size(); ++u) {
    const auto counts = preset_class_counts(u, o.scale);
    const std::size_t total = counts[0] + counts[1] + counts[2] + counts[3];
    CHECK(windows(synchronize(sessions[u], 4.0), WindowSpec{}).size() == total);
  }
  CHECK(preset_class_counts(0, 1.0) == std::array<std::size_t, 4>{429, 776, 513, 440});
  CHECK(preset_duration(11) == 60.0);
}

TEST_CASE("divergence 0 gives equal profiles") {
  const auto p = preset_cohort(2, 0.0, 3);
  CHECK(p[0].response == p[1].response);
  CHECK(p[0].baseline == p[1].baseline);
  CHECK(p[0].signature == p[1].signature);
  CHECK(p[0].user_id != p[1].user_id);
  CHECK(p[0].seed != p[1].seed);
}

TEST_CASE("divergence 1 gives pairwise distinct mappings") {
  const auto p = preset_cohort(4, 1.0, 3);
  std::set<std::array<std::size_t, 4>> maps;
  for (std::size_t u = 0; u < 4; ++u) maps.insert(state_mapping(u, 3));
  CHECK(maps.size() == 4);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) CHECK(p[a].response != p[b].response);
  }
  for (std::size_t u = 0; u < 12; ++u) {
    auto m = state_mapping(u, 3);
    std::sort(m.begin(), m.end());
    CHECK(m == std::array<std::size_t, 4>{0, 1, 2, 3});
  }
  CHECK_THROWS_AS(preset_cohort(0, 1.0), ConfigError);
  CHECK_THROWS_AS(preset_cohort(2, 1.5), ConfigError);
}

TEST_CASE("schedule validation") {
  const UserProfile p = preset_cohort(1, 1.0).front();
  CHECK_THROWS_AS(generate_session(p, 60.0, {{0, 20, Awareness::L}, {25, 60, Awareness::H}}), ScheduleGap);
  CHECK_THROWS_AS(generate_session(p, 60.0, {{0, 50, Awareness::L}}), ScheduleGap);
  CHECK_THROWS_AS(generate_session(p, 60.0, {{5, 60, Awareness::L}}), ScheduleGap);
  CHECK_THROWS_AS(generate_session(p, 60.0, {}), ScheduleGap);
}

TEST_CASE("label marginals match the schedule") {
  const UserProfile p = preset_cohort(1, 1.0).front();
  const StateSchedule s = preset_schedule({100, 40, 0, 60}, preset_duration(200), 5);
  validate_schedule(s, preset_duration(200));
  const MultimodalRecord rec = generate_session(p, preset_duration(200), s);
  std::array<double, 4> want{}, got{};
  for (const ScheduleSegment& seg : s) want[index(seg.state)] += (seg.end_s - seg.start_s) * 4.0;
  for (Awareness a : rec.labels) got[index(a)] += 1.0;
  for (std::size_t c = 0; c < 4; ++c) CHECK(got[c] == doctest::Approx(want[c]));
  CHECK(got[2] == 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].state != s[i - 1].state);
}
