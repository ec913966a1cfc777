#include <doctest.h>

#include <cmath>
#include <set>

#include "sidnn/data.hpp"
#include "sidnn/errors.hpp"
#include "support/temp_dir.hpp"

using namespace sidnn;

namespace {

Dataset ramp(std::size_t n) {
  Dataset d;
  d.name = "ramp";
  for (std::size_t k = 0; k < n; ++k) {
    d.u.push_back({static_cast<double>(k)});
    d.y.push_back({-static_cast<double>(k)});
  }
  return d;
}

}  // namespace

TEST_CASE("temporal split sizes") {
  const SplitDataset big = split(ramp(10070), 0.6);
  CHECK(big.train.sample_count() == 6042);
  CHECK(big.test.sample_count() == 4028);
  CHECK(big.test.u.front()[0] == 6042.0);

  const SplitDataset ten = split(ramp(10), 0.6);
  CHECK(ten.train.sample_count() == 6);
  CHECK(ten.test.sample_count() == 4);
  CHECK(ten.train.u.back()[0] == 5.0);

  const SplitDataset last = split(ramp(10), 0.95);
  CHECK(last.train.sample_count() == 9);
  CHECK(last.test.sample_count() == 1);

  CHECK_THROWS_AS(split(ramp(10), 0.05), ConfigError);
  CHECK_THROWS_AS(split(ramp(10), 0.0), ConfigError);
  CHECK_THROWS_AS(split(ramp(10), 1.0), ConfigError);
  CHECK_THROWS_AS(split(Dataset{}, 0.5), StateError);
}

TEST_CASE("mini-batch windows cover the data once") {
  const auto windows = minibatches(6042, 100, 1, 1);
  CHECK(windows.size() == 61);
  std::vector<int> hits(6042, 0);
  std::size_t short_windows = 0;
  for (const Window& w : windows) {
    CHECK(w.begin % 100 == 0);
    if (w.size() != 100) {
      ++short_windows;
      CHECK(w.size() == 42);
      CHECK(w.end == 6042);
    }
    for (std::size_t k = w.begin; k < w.end; ++k) ++hits[k];
  }
  CHECK(short_windows == 1);
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("mini-batch order depends on seed and epoch only") {
  const auto a = minibatches(1000, 10, 3, 1);
  CHECK(a == minibatches(1000, 10, 3, 1));
  CHECK(a != minibatches(1000, 10, 3, 2));
  CHECK(a != minibatches(1000, 10, 4, 1));
  std::set<std::size_t> firsts;
  for (std::uint64_t e = 1; e <= 20; ++e) firsts.insert(minibatches(1000, 10, 3, e).front().begin);
  CHECK(firsts.size() > 10);
  CHECK(minibatches(5, 10, 1, 1) == std::vector<Window>{{0, 5}});
  CHECK(minibatches(0, 10, 1, 1).empty());
  CHECK_THROWS_AS(minibatches(10, 0, 1, 1), ConfigError);
}

TEST_CASE("DaISy round trip is exact") {
  TempDir dir;
  Dataset d;
  d.name = "x";
  for (int k = 0; k < 50; ++k) {
    d.u.push_back({std::sin(k * 0.37) * 1e-3, std::exp(k * 0.1)});
    d.y.push_back({1.0 / 3.0 + k, -0.1 * k});
  }
  write_daisy(dir / "x.dat", d, "two inputs\ntwo outputs");
  CHECK(daisy_column_count(dir / "x.dat") == 4);
  const Dataset back = load_daisy(dir / "x.dat", 2, 2, ColumnMap::contiguous(2, 2));
  CHECK(back.u == d.u);
  CHECK(back.y == d.y);
  CHECK(back.name == "x");
}

TEST_CASE("glassfurnace column layout") {
  TempDir dir;
  std::string text = "% index u1 u2 u3 y1..y6\n";
  for (int k = 0; k < 5; ++k) {
    text += std::to_string(k);
    for (int c = 1; c <= 9; ++c) text += " " + std::to_string(10 * c + k);
    text += "\n";
  }
  const auto p = dir.write("glass.dat", text);
  const Dataset d = load_daisy(p, 3, 6, ColumnMap::glassfurnace());
  CHECK(d.sample_count() == 5);
  CHECK(d.n_inputs() == 3);
  CHECK(d.n_outputs() == 6);
  CHECK(d.u[2] == Vector{12, 22, 32});
  CHECK(d.y[4] == Vector{44, 54, 64, 74, 84, 94});
}

TEST_CASE("DaISy parse errors") {
  TempDir dir;
  CHECK_THROWS_AS(load_daisy(dir.write("empty.dat", ""), 1, 1, ColumnMap::contiguous(1, 1)), ParseError);
  CHECK_THROWS_AS(load_daisy(dir.write("comments.dat", "# only\n\n% notes\n"), 1, 1, ColumnMap::contiguous(1, 1)),
                  ParseError);
  try {
    load_daisy(dir.write("ragged.dat", "1 2\n3 4\n# c\n5\n"), 1, 1, ColumnMap::contiguous(1, 1));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  try {
    load_daisy(dir.write("text.dat", "1 2\n3 abc\n"), 1, 1, ColumnMap::contiguous(1, 1));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(load_daisy(dir.write("narrow.dat", "1 2\n"), 3, 6, ColumnMap::glassfurnace()), ConfigError);
  CHECK_THROWS_AS(load_daisy(dir.write("ok.dat", "1 2\n"), 2, 1, ColumnMap::contiguous(1, 1)), ConfigError);
  CHECK_THROWS_AS(load_daisy(dir / "missing.dat", 1, 1, ColumnMap::contiguous(1, 1)), IoError);
  CHECK(load_daisy(dir.write("crlf.dat", "1 2\r\n+3 -4e-1\r\n"), 1, 1, ColumnMap::contiguous(1, 1)).y[1][0] == -0.4);
}

TEST_CASE("CSV loading by header name") {
  TempDir dir;
  const auto p = dir.write("d.csv", "t, u ,y\n0,1.5,2\n1, -1 ,3\n");
  const Dataset d = load_csv(p, {"u"}, {"y"});
  CHECK(d.u == std::vector<Vector>{{1.5}, {-1.0}});
  CHECK(d.y == std::vector<Vector>{{2.0}, {3.0}});
  CHECK_THROWS_AS(load_csv(p, {"v"}, {"y"}), ConfigError);
  CHECK_THROWS_AS(load_csv(dir.write("bad.csv", "u,y\n1,2,3\n"), {"u"}, {"y"}), ParseError);
  CHECK_THROWS_AS(load_csv(dir.write("hdr.csv", "u,y\n"), {"u"}, {"y"}), ParseError);
}

TEST_CASE("standardizer") {
  Dataset d;
  d.u = {{1.0}, {3.0}};
  d.y = {{5.0}, {5.0}};
  const Standardizer s = Standardizer::fit(d);
  CHECK(s.u_mean[0] == 2.0);
  CHECK(s.u_std[0] == 1.0);
  CHECK(s.y_std[0] == 1.0);  // constant channel keeps unit scale
  const Dataset z = s.apply(d);
  CHECK(z.u == std::vector<Vector>{{-1.0}, {1.0}});
  CHECK(s.restore_outputs(z.y) == d.y);
}

TEST_CASE("PRBS levels, balance and hold") {
  const Vector p = prbs(20000, 7);
  double sum = 0.0, lag1 = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    CHECK(std::abs(p[k]) == 1.0);
    sum += p[k];
    if (k > 0) lag1 += p[k] * p[k - 1];
  }
  CHECK(std::abs(sum / p.size()) < 0.03);
  CHECK(std::abs(lag1 / (p.size() - 1)) < 0.03);
  CHECK(prbs(100, 7) == prbs(100, 7));
  CHECK(prbs(100, 7) != prbs(100, 8));

  const Vector held = prbs(30, 7, 3);
  const Vector base = prbs(10, 7);
  for (std::size_t k = 0; k < held.size(); ++k) CHECK(held[k] == base[k / 3]);
  CHECK_THROWS_AS(prbs(10, 7, 0), ConfigError);
}

TEST_CASE("synthetic generator") {
  SyntheticSpec spec;
  spec.a = {1.5};
  CHECK_THROWS_AS(gen_synthetic(spec, 10), ConfigError);
  spec.a = {-0.7};
  CHECK_THROWS_AS(gen_synthetic(spec, 0), ConfigError);

  // |tanh| < 1 and sum |h_k| = 0.3 / (1 - 0.7) = 1 bounds the clean output.
  const auto [data, truth] = gen_synthetic(spec, 5000);
  for (const auto& y : truth.clean_y) CHECK(std::abs(y[0]) <= 1.0);
  CHECK(truth.clean_y[0][0] == 0.0);
  CHECK(truth.clean_y[1][0] == doctest::Approx(0.3 * std::tanh(data.u[0][0])).epsilon(1e-15));

  spec.noise.kind = NoiseSpec::Kind::gaussian;
  spec.noise.std = 0.1;
  const auto [noisy, truth2] = gen_synthetic(spec, 5000);
  double var = 0.0;
  for (std::size_t k = 0; k < 5000; ++k) var += std::pow(noisy.y[k][0] - truth2.clean_y[k][0], 2);
  CHECK(std::sqrt(var / 5000) == doctest::Approx(0.1).epsilon(0.05));
  CHECK(truth2.clean_y == truth.clean_y);

  spec.nonlinearity = Nonlinearity::saturation;
  CHECK(apply_nonlinearity(spec.nonlinearity, 3.0) == 1.0);
  CHECK(apply_nonlinearity(Nonlinearity::cubic, -2.0) == -8.0);
  CHECK_THROWS_AS(parse_nonlinearity("sine"), ConfigError);
}
