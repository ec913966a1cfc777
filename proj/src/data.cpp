#include "sidnn/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "sidnn/errors.hpp"

namespace sidnn {

void Dataset::validate() const {
  if (u.size() != y.size()) {
    throw ShapeError("dataset '" + name + "': " + std::to_string(u.size()) + " input samples but " +
                     std::to_string(y.size()) + " output samples");
  }
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u[k].size() != n_inputs() || y[k].size() != n_outputs()) {
      throw ShapeError("dataset '" + name + "': channel width changes at sample " + std::to_string(k));
    }
  }
}

ColumnMap ColumnMap::glassfurnace() { return {{1, 2, 3}, {4, 5, 6, 7, 8, 9}}; }

ColumnMap ColumnMap::contiguous(std::size_t n_inputs, std::size_t n_outputs) {
  ColumnMap map;
  for (std::size_t i = 0; i < n_inputs; ++i) map.inputs.push_back(i);
  for (std::size_t i = 0; i < n_outputs; ++i) map.outputs.push_back(n_inputs + i);
  return map;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line, bool comma) {
  std::vector<std::string_view> fields;
  if (comma) {
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      std::string_view field = line.substr(start, pos == std::string_view::npos ? line.npos : pos - start);
      while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front()))) field.remove_prefix(1);
      while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back()))) field.remove_suffix(1);
      fields.push_back(field);
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return fields;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

double parse_number(std::string_view field, std::size_t line) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw ParseError("non-numeric field '" + std::string(field) + "'", line);
  }
  return value;
}

bool is_comment_or_blank(std::string_view line) {
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    return ch == '#' || ch == '%';
  }
  return true;
}

std::ifstream open_for_reading(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

Dataset load_daisy(const std::filesystem::path& path, std::size_t n_inputs, std::size_t n_outputs,
                   const ColumnMap& columns) {
  if (columns.inputs.size() != n_inputs || columns.outputs.size() != n_outputs) {
    throw ConfigError("column map assigns " + std::to_string(columns.inputs.size()) + " inputs and " +
                      std::to_string(columns.outputs.size()) + " outputs, expected " + std::to_string(n_inputs) +
                      " and " + std::to_string(n_outputs));
  }
  std::ifstream in = open_for_reading(path);
  Dataset data;
  data.name = path.stem().string();

  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_comment_or_blank(line)) continue;
    const auto fields = split_fields(line, false);
    if (width == 0) {
      width = fields.size();
      std::size_t needed = 0;
      for (std::size_t c : columns.inputs) needed = std::max(needed, c + 1);
      for (std::size_t c : columns.outputs) needed = std::max(needed, c + 1);
      if (needed > width) {
        throw ConfigError("column map references column " + std::to_string(needed - 1) + " but '" + path.string() +
                          "' has " + std::to_string(width) + " columns");
      }
    } else if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " columns, found " + std::to_string(fields.size()),
                       line_no);
    }
    Vector row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) row[i] = parse_number(fields[i], line_no);
    Vector u(n_inputs), y(n_outputs);
    for (std::size_t i = 0; i < n_inputs; ++i) u[i] = row[columns.inputs[i]];
    for (std::size_t i = 0; i < n_outputs; ++i) y[i] = row[columns.outputs[i]];
    data.u.push_back(std::move(u));
    data.y.push_back(std::move(y));
  }
  if (data.u.empty()) throw ParseError("'" + path.string() + "' contains zero samples");
  return data;
}

std::size_t daisy_column_count(const std::filesystem::path& path) {
  std::ifstream in = open_for_reading(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!is_comment_or_blank(line)) return split_fields(line, false).size();
  }
  throw ParseError("'" + path.string() + "' contains zero samples");
}

void write_daisy(const std::filesystem::path& path, const Dataset& data, const std::string& comment) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string l;
    while (std::getline(lines, l)) out << "# " << l << '\n';
  }
  out << std::setprecision(17);
  for (std::size_t k = 0; k < data.sample_count(); ++k) {
    bool first = true;
    for (double v : data.u[k]) {
      out << (first ? "" : " ") << v;
      first = false;
    }
    for (double v : data.y[k]) {
      out << (first ? "" : " ") << v;
      first = false;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& input_columns,
                 const std::vector<std::string>& output_columns) {
  std::ifstream in = open_for_reading(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_comment_or_blank(line)) continue;
    for (auto f : split_fields(line, true)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw ParseError("'" + path.string() + "' has no header row");

  auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ConfigError("column '" + name + "' not found in header of '" + path.string() + "'");
  };
  std::vector<std::size_t> in_idx, out_idx;
  for (const auto& c : input_columns) in_idx.push_back(index_of(c));
  for (const auto& c : output_columns) out_idx.push_back(index_of(c));

  Dataset data;
  data.name = path.stem().string();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_comment_or_blank(line)) continue;
    const auto fields = split_fields(line, true);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()),
                       line_no);
    }
    Vector u, y;
    for (std::size_t i : in_idx) u.push_back(parse_number(fields[i], line_no));
    for (std::size_t i : out_idx) y.push_back(parse_number(fields[i], line_no));
    data.u.push_back(std::move(u));
    data.y.push_back(std::move(y));
  }
  if (data.u.empty()) throw ParseError("'" + path.string() + "' contains zero samples");
  return data;
}

SplitDataset split(const Dataset& data, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must be in (0, 1)");
  data.validate();
  const std::size_t n = data.sample_count();
  if (n == 0) throw StateError("cannot split an empty dataset");
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw ConfigError("split ratio " + std::to_string(ratio) + " leaves an empty partition of " + std::to_string(n) +
                      " samples");
  }
  SplitDataset s;
  s.ratio = ratio;
  s.train.name = data.name + ".train";
  s.test.name = data.name + ".test";
  s.train.u.assign(data.u.begin(), data.u.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.train.y.assign(data.y.begin(), data.y.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.u.assign(data.u.begin() + static_cast<std::ptrdiff_t>(n_train), data.u.end());
  s.test.y.assign(data.y.begin() + static_cast<std::ptrdiff_t>(n_train), data.y.end());
  return s;
}

std::vector<Window> minibatches(std::size_t sample_count, std::size_t size, std::uint64_t seed, std::uint64_t epoch) {
  if (size == 0) throw ConfigError("batch size must be >= 1");
  std::vector<Window> windows;
  for (std::size_t begin = 0; begin < sample_count; begin += size) {
    windows.push_back({begin, std::min(sample_count, begin + size)});
  }
  SeededRng rng(mix_seed(mix_seed(seed, 0x5348554646ULL), epoch));
  for (std::size_t i = windows.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(windows[i - 1], windows[j]);
  }
  return windows;
}

std::vector<Window> minibatches(const Dataset& data, std::size_t size, std::uint64_t seed, std::uint64_t epoch) {
  return minibatches(data.sample_count(), size, seed, epoch);
}

namespace {
void channel_stats(const std::vector<Vector>& rows, Vector& mean, Vector& stdev) {
  const std::size_t width = rows.empty() ? 0 : rows.front().size();
  mean.assign(width, 0.0);
  stdev.assign(width, 0.0);
  if (rows.empty()) return;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < width; ++i) mean[i] += r[i];
  for (double& m : mean) m /= static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (std::size_t i = 0; i < width; ++i) stdev[i] += (r[i] - mean[i]) * (r[i] - mean[i]);
  for (double& s : stdev) {
    s = std::sqrt(s / static_cast<double>(rows.size()));
    if (s == 0.0) s = 1.0;
  }
}
}  // namespace

Standardizer Standardizer::fit(const Dataset& data) {
  Standardizer s;
  channel_stats(data.u, s.u_mean, s.u_std);
  channel_stats(data.y, s.y_mean, s.y_std);
  return s;
}

Dataset Standardizer::apply(const Dataset& data) const {
  Dataset out = data;
  for (auto& r : out.u)
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = (r[i] - u_mean[i]) / u_std[i];
  for (auto& r : out.y)
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = (r[i] - y_mean[i]) / y_std[i];
  return out;
}

std::vector<Vector> Standardizer::restore_outputs(const std::vector<Vector>& y) const {
  std::vector<Vector> out = y;
  for (auto& r : out)
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = r[i] * y_std[i] + y_mean[i];
  return out;
}

Nonlinearity parse_nonlinearity(std::string_view name) {
  if (name == "identity" || name == "linear") return Nonlinearity::identity;
  if (name == "tanh") return Nonlinearity::tanh;
  if (name == "cubic") return Nonlinearity::cubic;
  if (name == "saturation") return Nonlinearity::saturation;
  throw ConfigError("unknown nonlinearity '" + std::string(name) + "'");
}

std::string_view to_string(Nonlinearity n) {
  switch (n) {
    case Nonlinearity::identity: return "identity";
    case Nonlinearity::tanh: return "tanh";
    case Nonlinearity::cubic: return "cubic";
    case Nonlinearity::saturation: return "saturation";
  }
  return "identity";
}

InputKind parse_input_kind(std::string_view name) {
  if (name == "prbs") return InputKind::prbs;
  if (name == "gaussian") return InputKind::gaussian;
  throw ConfigError("unknown input kind '" + std::string(name) + "'");
}

std::string_view to_string(InputKind k) { return k == InputKind::prbs ? "prbs" : "gaussian"; }

double apply_nonlinearity(Nonlinearity n, double x) {
  switch (n) {
    case Nonlinearity::identity: return x;
    case Nonlinearity::tanh: return std::tanh(x);
    case Nonlinearity::cubic: return x * x * x;
    case Nonlinearity::saturation: return std::clamp(x, -1.0, 1.0);
  }
  return x;
}

void SyntheticSpec::validate() const {
  noise.validate();
  if (prbs_hold == 0) throw ConfigError("prbs_hold must be >= 1");
  if (!(input_std > 0.0)) throw ConfigError("input_std must be positive");
  if (!all_finite(a) || !all_finite(b)) throw ConfigError("synthetic coefficients must be finite");
  if (!is_stable(a)) throw ConfigError("synthetic spec has an unstable A polynomial (pole radius " +
                                       std::to_string(pole_radius(a)) + ")");
}

Vector prbs(std::size_t n, std::uint64_t seed, std::size_t hold) {
  if (hold == 0) throw ConfigError("prbs hold must be >= 1");
  std::uint32_t state = static_cast<std::uint32_t>(mix_seed(seed, 0) & 0x7fffffffULL);
  if (state == 0) state = 1;
  Vector out(n);
  double level = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k % hold == 0) {
      const std::uint32_t bit = ((state >> 30) ^ (state >> 27)) & 1U;
      state = ((state << 1) | bit) & 0x7fffffffU;
      level = bit ? 1.0 : -1.0;
    }
    out[k] = level;
  }
  return out;
}

std::pair<Dataset, GroundTruth> gen_synthetic(const SyntheticSpec& spec, std::size_t n) {
  spec.validate();
  if (n == 0) throw ConfigError("synthetic sample count must be >= 1");

  Vector u;
  if (spec.input_kind == InputKind::prbs) {
    u = prbs(n, spec.seed, spec.prbs_hold);
  } else {
    SeededRng rng(mix_seed(spec.seed, 1));
    u.resize(n);
    for (double& v : u) v = spec.input_std * rng.normal();
  }

  Vector g(n), clean(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) g[t] = apply_nonlinearity(spec.nonlinearity, u[t]);
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= spec.a.size() && k <= t; ++k) acc -= spec.a[k - 1] * clean[t - k];
    for (std::size_t k = 1; k <= spec.b.size() && k <= t; ++k) acc += spec.b[k - 1] * g[t - k];
    clean[t] = acc;
  }

  SeededRng noise_rng(mix_seed(spec.seed, 2));
  Dataset data;
  data.name = "synthetic";
  GroundTruth truth{spec, {}};
  data.u.reserve(n);
  data.y.reserve(n);
  truth.clean_y.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double mu = spec.noise.kind == NoiseSpec::Kind::gaussian ? spec.noise.std * noise_rng.normal() : 0.0;
    data.u.push_back({u[t]});
    data.y.push_back({clean[t] + mu});
    truth.clean_y.push_back({clean[t]});
  }
  return {std::move(data), std::move(truth)};
}

}  // namespace sidnn
