#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "sab/rng.hpp"

using namespace sab;

TEST_CASE("philox known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::block(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible") {
  RandomStream a(17, 5), b(17, 5);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("stream ids are distinct across tuples") {
  std::set<std::uint64_t> ids;
  for (std::uint32_t rep = 0; rep < 4; ++rep)
    for (std::uint32_t algo = 0; algo < 3; ++algo)
      for (auto purpose : {StreamPurpose::Gradient, StreamPurpose::Hessian,
                           StreamPurpose::Truth, StreamPurpose::Graph})
        for (std::uint32_t agent = 0; agent < 20; ++agent)
          ids.insert(stream_id(rep, algo, purpose, agent));
  CHECK(ids.size() == 4u * 3u * 4u * 20u);
}

TEST_CASE("adjacent replications share no draws") {
  std::set<std::uint64_t> seen;
  for (std::uint32_t rep = 0; rep < 2; ++rep) {
    RandomStream s(2023, stream_id(rep, 0, StreamPurpose::Gradient, 0));
    for (int i = 0; i < 10000; ++i) seen.insert(s.next_u64());
  }
  CHECK(seen.size() == 20000u);
}

TEST_CASE("uniform and normal moments") {
  RandomStream s(1, 0);
  const int N = 200000;
  double su = 0, suu = 0, sn = 0, snn = 0, sn4 = 0;
  double umin = 1, umax = 0;
  for (int i = 0; i < N; ++i) {
    const double u = s.uniform();
    su += u;
    suu += u * u;
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    const double z = s.normal();
    sn += z;
    snn += z * z;
    sn4 += z * z * z * z;
  }
  CHECK(umin >= 0.0);
  CHECK(umax < 1.0);
  CHECK(su / N == doctest::Approx(0.5).epsilon(0.01));
  CHECK(suu / N == doctest::Approx(1.0 / 3.0).epsilon(0.01));
  CHECK(std::abs(sn / N) < 0.01);
  CHECK(snn / N == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sn4 / N == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("uniform_positive excludes zero") {
  RandomStream s(3, 3);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform_positive();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}
