#include <doctest.h>

#include "d2dsched/rng.hpp"

using namespace d2d;

TEST_CASE("rng: identical seeds give identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: uniform01 bounds and mean") {
  Rng rng(1);
  double total = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    total += u;
  }
  CHECK(total / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("rng: exponential has unit mean") {
  Rng rng(2);
  double total = 0.0;
  for (int i = 0; i < 100000; ++i) total += rng.exponential();
  CHECK(total / 100000 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng: derived substreams differ") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  Rng a(derive_seed(7, 0)), b(derive_seed(7, 1));
  CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("rng: uniform_index stays in range") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_index(17) < 17);
}
