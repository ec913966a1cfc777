#include <doctest.h>

#include <cmath>

#include "sidnn/errors.hpp"
#include "sidnn/metrics.hpp"

using namespace sidnn;

namespace {

std::vector<Vector> col(std::initializer_list<double> v) {
  std::vector<Vector> out;
  for (double x : v) out.push_back({x});
  return out;
}

}  // namespace

TEST_CASE("fit percentage examples") {
  const auto y = col({1.0, 2.0, 4.0, 3.0});
  CHECK(fit_percent(y, y)[0] == 100.0);
  CHECK(fit_percent(y, col({2.5, 2.5, 2.5, 2.5}))[0] == doctest::Approx(0.0).epsilon(1e-15));
  // y = (0, 2), yhat = (1, 1): ||e|| = sqrt(2), ||y - mean|| = sqrt(2).
  CHECK(fit_percent(col({0.0, 2.0}), col({1.0, 1.0}))[0] == doctest::Approx(0.0).epsilon(1e-15));
  // y = (0, 2), yhat = (0.5, 1.5): ||e|| = sqrt(0.5), ratio 0.5.
  CHECK(fit_percent(col({0.0, 2.0}), col({0.5, 1.5}))[0] == doctest::Approx(50.0).epsilon(1e-14));
  // A predictor worse than the mean goes negative.
  CHECK(fit_percent(col({0.0, 2.0}), col({2.0, 0.0}))[0] == doctest::Approx(-100.0).epsilon(1e-14));
}

TEST_CASE("fit is per channel and aggregated by the mean") {
  const std::vector<Vector> y{{0.0, 1.0}, {2.0, 3.0}};
  const std::vector<Vector> yhat{{0.0, 2.0}, {2.0, 2.0}};
  const auto f = fit_percent(y, yhat);
  CHECK(f[0] == 100.0);
  CHECK(f[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(aggregate_fit(f) == doctest::Approx(50.0).epsilon(1e-14));
  CHECK(aggregate_fit(std::vector<double>{}) == 0.0);
}

TEST_CASE("fit errors") {
  try {
    fit_percent(std::vector<Vector>{{1.0, 0.0}, {2.0, 5.0}, {3.0, 0.0}},
                std::vector<Vector>{{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}});
    CHECK(true);
  } catch (...) {
    FAIL("non-constant channels must be accepted");
  }
  try {
    fit_percent(std::vector<Vector>{{1.0, 4.0}, {2.0, 4.0}}, std::vector<Vector>{{1.0, 4.0}, {2.0, 4.0}});
    FAIL("expected UndefinedFitError");
  } catch (const UndefinedFitError& e) {
    CHECK(e.channel() == 1);
  }
  CHECK_THROWS_AS(fit_percent(col({1.0, 2.0}), col({1.0})), ShapeError);
  CHECK_THROWS_AS(fit_percent(col({}), col({})), StateError);
}

TEST_CASE("fit is invariant to a common affine change of units") {
  const auto y = col({0.3, -1.2, 2.2, 0.9, -0.4});
  const auto yhat = col({0.1, -1.0, 2.0, 1.1, -0.2});
  const double base = fit_percent(y, yhat)[0];
  std::vector<Vector> y2, yhat2;
  for (std::size_t k = 0; k < y.size(); ++k) {
    y2.push_back({3.5 * y[k][0] - 7.0});
    yhat2.push_back({3.5 * yhat[k][0] - 7.0});
  }
  CHECK(fit_percent(y2, yhat2)[0] == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("fit decreases strictly as the error grows") {
  const auto y = col({1.0, -1.0, 0.5, 2.0});
  const Vector direction{0.2, 0.1, -0.3, 0.4};
  double previous = 101.0;
  for (int s = 0; s <= 10; ++s) {
    std::vector<Vector> yhat;
    for (std::size_t k = 0; k < y.size(); ++k) yhat.push_back({y[k][0] + 0.5 * s * direction[k]});
    const double f = fit_percent(y, yhat)[0];
    CHECK(f < previous);
    CHECK((f == 100.0) == (s == 0));
    previous = f;
  }
}

TEST_CASE("report rendering") {
  EvalReport r;
  r.channel_fit = {91.25, 80.0};
  r.fit = 85.625;
  r.mse = 0.0123;
  r.sample_count = 42;
  r.wall_clock_seconds = 3.5;
  const auto j = to_json(r);
  CHECK(j.at("fit").get<double>() == 85.625);
  CHECK(j.at("channel_fit").size() == 2);
  CHECK(j.at("sample_count").get<std::size_t>() == 42);
  CHECK(j.at("wall_clock_seconds").get<double>() == 3.5);
  CHECK_FALSE(to_json(r, false).contains("wall_clock_seconds"));

  const std::string table = format_table({{"sr-lstm (val)", r}});
  CHECK(table.find("Estimation Fit (%)") != std::string::npos);
  CHECK(table.find("Training Time") != std::string::npos);
  CHECK(table.find("sr-lstm (val)") != std::string::npos);
  CHECK(table.find("85.6250") != std::string::npos);
  CHECK(table.find("3.50s") != std::string::npos);
  CHECK(table.find("0.0123") != std::string::npos);
}
