#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qcv/errors.hpp"
#include "qcv/series.hpp"

using namespace qcv;

TEST_CASE("period ordering and succession") {
  Period p{1999, 12};
  CHECK(p.next() == Period{2000, 1});
  CHECK(Period{2000, 1}.next() == Period{2000, 2});
  CHECK(Period{1999, 12} < Period{2000, 1});
  CHECK(p.str() == "1999-12");
  CHECK(Period{2000, 3}.str() == "2000-03");
}

TEST_CASE("from_values builds consecutive months") {
  Series s = Series::from_values("x", {1.0, 2.0, 3.0}, {2016, 11});
  s.validate();
  CHECK(s.timestamps[0] == Period{2016, 11});
  CHECK(s.timestamps[1] == Period{2016, 12});
  CHECK(s.timestamps[2] == Period{2017, 1});
}

TEST_CASE("validate rejects malformed series") {
  Series s = Series::from_values("x", {1.0, 2.0});
  SUBCASE("gap in timestamps") {
    s.timestamps[1] = {2000, 3};
    CHECK_THROWS_AS(s.validate(), Error);
  }
  SUBCASE("non-finite value") {
    s.values[1] = std::nan("");
    CHECK_THROWS_AS(s.validate(), Error);
  }
  SUBCASE("length mismatch") {
    s.values.push_back(3.0);
    CHECK_THROWS_AS(s.validate(), Error);
  }
  SUBCASE("empty") {
    Series e;
    e.name = "e";
    CHECK_THROWS_AS(e.validate(), Error);
  }
}

TEST_CASE("deflate rescales by the deflator") {
  Series nominal = Series::from_values("oil", {50.0, 60.0});
  Series cpi = Series::from_values("cpi", {100.0, 120.0});
  Series real = deflate(nominal, cpi);
  CHECK(real.name == "oil_real");
  CHECK(real.values[0] == doctest::Approx(50.0));
  CHECK(real.values[1] == doctest::Approx(50.0));

  Series zero_cpi = Series::from_values("cpi", {100.0, 0.0});
  CHECK_THROWS_AS(deflate(nominal, zero_cpi), Error);

  Series off = Series::from_values("cpi", {100.0, 120.0}, {2001, 1});
  CHECK_THROWS_AS(deflate(nominal, off), Error);
}

TEST_CASE("log returns are 100 times log differences") {
  Series s = Series::from_values("p", {100.0, 110.0, 99.0});
  Series r = log_returns(s);
  CHECK(r.name == "p_ret");
  CHECK(r.size() == 2);
  CHECK(r.timestamps[0] == Period{2000, 2});
  CHECK(r.values[0] == doctest::Approx(100.0 * std::log(1.1)).epsilon(1e-12));
  CHECK(r.values[1] == doctest::Approx(100.0 * std::log(99.0 / 110.0)).epsilon(1e-12));

  Series neg = Series::from_values("p", {100.0, -1.0});
  CHECK_THROWS_AS(log_returns(neg), Error);
}

TEST_CASE("log levels require positive values") {
  Series s = Series::from_values("p", {1.0, std::exp(1.0)});
  Series l = log_levels(s);
  CHECK(l.name == "p_log");
  CHECK(l.values[0] == doctest::Approx(0.0));
  CHECK(l.values[1] == doctest::Approx(1.0));
  Series zero = Series::from_values("p", {1.0, 0.0});
  CHECK_THROWS_AS(log_levels(zero), Error);
}
