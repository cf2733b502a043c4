#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "brw/numeric.hpp"
#include "brw/parallel.hpp"
#include "brw/rng.hpp"

using namespace brw;

TEST_CASE("log_sum_exp survives huge and tiny exponents") {
  std::vector<double> xs{1000.0, 1000.0};
  CHECK(log_sum_exp(xs) == doctest::Approx(1000.0 + std::log(2.0)));
  std::vector<double> ys{-1000.0, -1001.0};
  CHECK(log_sum_exp(ys) == doctest::Approx(-1000.0 + std::log1p(std::exp(-1.0))));
  CHECK(log_sum_exp(std::vector<double>{}) == kNegInf);
  CHECK(log_sum_exp(std::vector<double>{kNegInf, kNegInf}) == kNegInf);
}

TEST_CASE("streaming LogSumExp matches batch") {
  std::vector<double> xs{-3.0, 2.5, 0.1, -700.0, 1.0};
  LogSumExp acc;
  for (double x : xs) acc.add(x);
  CHECK(acc.value() == doctest::Approx(log_sum_exp(xs)).epsilon(1e-15));
}

TEST_CASE("stable_sum keeps small terms next to large ones") {
  std::vector<double> xs(1000, 1e-16);
  xs.push_back(1.0);
  CHECK(stable_sum(xs) == doctest::Approx(1.0 + 1e-13).epsilon(1e-15));
}

TEST_CASE("mean_and_error on a known sample") {
  std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto me = mean_and_error(xs);
  CHECK(me.mean == 2.5);
  CHECK(me.n == 4);
  // sample variance 5/3, se = sqrt(5/3 / 4)
  CHECK(me.se == doctest::Approx(std::sqrt(5.0 / 12.0)));
}

TEST_CASE("derive_seed is deterministic and spreads indices") {
  const Seed s{42};
  CHECK(derive_seed(s, 3) == derive_seed(s, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(s, i).value);
  CHECK(seen.size() == 10000);
  CHECK(derive_seed(Seed{1}, 0) != derive_seed(Seed{2}, 0));
}

TEST_CASE("uniform01 lies in [0, 1)") {
  Rng rng = make_rng(Seed{7});
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("run_replicates returns index order for any worker count") {
  auto f = [](std::int64_t i) { return i * i; };
  const auto one = run_replicates(1000, 1, f);
  const auto many = run_replicates(1000, 8, f);
  CHECK(one == many);
  CHECK(one[999] == 999 * 999);
}

TEST_CASE("run_replicates rethrows the lowest failing index") {
  auto f = [](std::int64_t i) -> int {
    if (i == 5 || i == 9) throw std::runtime_error(std::to_string(i));
    return 0;
  };
  try {
    run_replicates(20, 4, f);
    FAIL("expected throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "5");
  }
}
