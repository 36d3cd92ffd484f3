#include <doctest.h>

#include <array>
#include <stdexcept>
#include <vector>

#include "conmlo/channel_access.hpp"

using namespace conmlo;

namespace {

DeviceState two_link_device(AccessMode mode = AccessMode::kConMlo) {
  TimingConfig timing;
  return DeviceState::make(mode, {0, 1}, timing);
}

std::array<std::uint8_t, 2> idle2() { return {0, 0}; }

}  // namespace

TEST_CASE("timing config validation") {
  TimingConfig t;
  CHECK_NOTHROW(t.validate());
  t.delta_slots = 501;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = TimingConfig{};
  t.difs_us = 35;  // not a slot multiple
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("backoff draw is uniform over the closed range") {
  TimingConfig timing;  // cw = 8, inclusive draw
  DeviceState d = DeviceState::make(AccessMode::kSlo, {0}, timing);
  Rng rng(123);
  std::array<int, 9> counts{};
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    start_bo_all(d, rng);
    REQUIRE(d.link_states[0].backoff >= 0);
    REQUIRE(d.link_states[0].backoff <= 8);
    ++counts[d.link_states[0].backoff];
  }
  for (int c : counts) {
    const double freq = static_cast<double>(c) / trials;
    CHECK(std::abs(freq - 1.0 / 9.0) < 0.01);
  }
}

TEST_CASE("exclusive backoff flag draws from [0, cw-1]") {
  TimingConfig timing;
  timing.bo_exclusive = true;
  DeviceState d = DeviceState::make(AccessMode::kSlo, {0}, timing);
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    start_bo_all(d, rng);
    CHECK(d.link_states[0].backoff < 8);
  }
}

TEST_CASE("degenerate cw 0 always draws 0") {
  TimingConfig timing;
  timing.cw = 0;  // bypasses validate(); draw must clamp
  DeviceState d = DeviceState::make(AccessMode::kSlo, {0}, timing);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    start_bo_all(d, rng);
    CHECK(d.link_states[0].backoff == 0);
  }
}

TEST_CASE("start_bo moves a waiting link back to sensing") {
  DeviceState d = two_link_device();
  d.link_states[1].phase = LinkPhase::kWait;
  d.link_states[1].idle_streak = 7;
  Rng rng(1);
  const int pos = 1;
  start_bo(d, std::span<const int>(&pos, 1), rng);
  CHECK(d.link_states[1].phase == LinkPhase::kSense);
  CHECK(d.link_states[1].idle_streak == 0);
  CHECK_THROWS_AS(start_bo(d, std::array<int, 1>{9}, rng), std::out_of_range);
}

TEST_CASE("idle slot after AIFS decrements the backoff") {
  DeviceState d = two_link_device();
  d.link_states[0].backoff = 5;
  d.link_states[0].idle_streak = 3;  // AIFS about to be satisfied
  d.link_states[1].backoff = 9;
  Rng rng(1);
  step_slot(d, idle2(), 0, rng);
  CHECK(d.link_states[0].backoff == 4);
}

TEST_CASE("busy slot freezes the backoff and resets the streak") {
  DeviceState d = two_link_device();
  d.link_states[0].backoff = 5;
  d.link_states[0].idle_streak = 10;
  Rng rng(1);
  std::array<std::uint8_t, 2> sensed = {1, 0};
  step_slot(d, sensed, 0, rng);
  CHECK(d.link_states[0].backoff == 5);
  CHECK(d.link_states[0].idle_streak == 0);
}

TEST_CASE("no decrement before AIFS consecutive idle slots") {
  DeviceState d = two_link_device();
  d.link_states[0].backoff = 5;
  d.link_states[1].backoff = 9;
  Rng rng(1);
  // aifs = 3: slots 0..2 only build the streak, first decrement at slot 3
  for (Slot t = 0; t < 3; ++t) {
    step_slot(d, idle2(), t, rng);
    CHECK(d.link_states[0].backoff == 5);
  }
  step_slot(d, idle2(), 3, rng);
  CHECK(d.link_states[0].backoff == 4);
}

TEST_CASE("two-way winner tie is broken uniformly") {
  const int trials = 10000;
  int first_link_wins = 0;
  Rng rng(77);
  for (int i = 0; i < trials; ++i) {
    DeviceState d = two_link_device();
    d.link_states[0].backoff = 1;
    d.link_states[1].backoff = 1;
    d.link_states[0].idle_streak = 3;
    d.link_states[1].idle_streak = 3;
    SlotDecision dec = step_slot(d, idle2(), 0, rng);
    REQUIRE(dec.start_tx.has_value());
    if (dec.start_tx->first == 0) ++first_link_wins;
  }
  const double freq = static_cast<double>(first_link_wins) / trials;
  CHECK(std::abs(freq - 0.5) < 0.02);
}

TEST_CASE("losing links move to WAIT and stay frozen") {
  DeviceState d = two_link_device();
  d.link_states[0].backoff = 1;
  d.link_states[1].backoff = 9;
  d.link_states[0].idle_streak = 3;
  d.link_states[1].idle_streak = 3;
  Rng rng(1);
  SlotDecision dec = step_slot(d, idle2(), 0, rng);
  REQUIRE(dec.start_tx.has_value());
  CHECK(dec.start_tx->first == 0);
  CHECK(d.link_states[0].phase == LinkPhase::kTransmit);
  CHECK(d.link_states[1].phase == LinkPhase::kWait);

  // a WAIT link never decrements or wins
  const int frozen_bo = d.link_states[1].backoff;
  for (Slot t = 1; t < 50; ++t) {
    SlotDecision later = step_slot(d, idle2(), t, rng);
    CHECK_FALSE(later.start_tx.has_value());
    CHECK(d.link_states[1].backoff == frozen_bo);
  }
}

TEST_CASE("anticipation restarts contention delta slots before TXOP end") {
  DeviceState d = two_link_device();
  d.link_states[0].backoff = 0;
  d.link_states[0].idle_streak = 3;
  d.link_states[1].backoff = 9;
  d.link_states[1].idle_streak = 3;
  Rng rng(2);
  SlotDecision dec = step_slot(d, idle2(), 0, rng);
  REQUIRE(dec.start_tx.has_value());  // t0 = 0 on link 0

  // txop 500, delta 11: link 1 must wake at slot 489, not before
  for (Slot t = 1; t < 489; ++t) {
    step_slot(d, idle2(), t, rng);
    CHECK(d.link_states[1].phase == LinkPhase::kWait);
  }
  step_slot(d, idle2(), 489, rng);
  CHECK(d.link_states[1].phase == LinkPhase::kSense);

  // finished link redraws at slot 500 and the device counts the TXOP
  for (Slot t = 490; t < 500; ++t) step_slot(d, idle2(), t, rng);
  CHECK(d.n_tx == 0);
  step_slot(d, idle2(), 500, rng);
  CHECK(d.n_tx == 1);
  CHECK(d.link_states[0].phase != LinkPhase::kTransmit);
}

TEST_CASE("backoff never increases except via start_bo") {
  DeviceState d = two_link_device();
  Rng rng(3);
  Rng noise(9);
  start_bo_all(d, rng);
  std::array<int, 2> prev = {d.link_states[0].backoff,
                             d.link_states[1].backoff};
  for (Slot t = 0; t < 2000; ++t) {
    std::array<std::uint8_t, 2> sensed = {
        static_cast<std::uint8_t>(noise.uniform01() < 0.3),
        static_cast<std::uint8_t>(noise.uniform01() < 0.3)};
    step_slot(d, sensed, t, rng);
    for (int i = 0; i < 2; ++i) {
      // a redraw resets the streak; outside that the counter is monotone
      if (d.link_states[i].idle_streak > 0 &&
          d.link_states[i].phase == LinkPhase::kSense)
        CHECK(d.link_states[i].backoff <= prev[i]);
      prev[i] = d.link_states[i].backoff;
    }
  }
}

TEST_CASE("at most one link transmits at any time") {
  DeviceState d =
      DeviceState::make(AccessMode::kConMlo, {0, 1, 2, 3}, TimingConfig{});
  Rng rng(11);
  start_bo_all(d, rng);
  std::array<std::uint8_t, 4> idle4 = {0, 0, 0, 0};
  for (Slot t = 0; t < 5000; ++t) {
    step_slot(d, idle4, t, rng);
    int transmitting = 0;
    for (const auto& ls : d.link_states)
      if (ls.phase == LinkPhase::kTransmit) ++transmitting;
    CHECK(transmitting <= 1);
  }
}

TEST_CASE("sensed map must cover every link") {
  DeviceState d = two_link_device();
  Rng rng(1);
  std::array<std::uint8_t, 1> short_map = {0};
  CHECK_THROWS_AS(step_slot(d, short_map, 0, rng), std::invalid_argument);
}

TEST_CASE("SLO requires exactly one link") {
  CHECK_THROWS_AS((DeviceState::make(AccessMode::kSlo, {0, 1}, TimingConfig{})),
                  std::invalid_argument);
  CHECK_THROWS_AS(DeviceState::make(AccessMode::kMlo, {}, TimingConfig{}),
                  std::invalid_argument);
  CHECK_THROWS_AS((DeviceState::make(AccessMode::kMlo, {1, 1}, TimingConfig{})),
                  std::invalid_argument);
}
