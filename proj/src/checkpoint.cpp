#include "sidnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "sidnn/errors.hpp"

namespace sidnn {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'I', 'D', 'C', 'K', 'P', 'T', '1'};

void put_le(std::ostream& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::istream& in, int bytes, const std::string& what) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw ParseError("checkpoint truncated while reading " + what);
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

json standardizer_json(const Standardizer& s) {
  if (s.empty()) return nullptr;
  return json{{"u_mean", s.u_mean}, {"u_std", s.u_std}, {"y_mean", s.y_mean}, {"y_std", s.y_std}};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  // The output directory is left out so the file depends only on the run itself.
  json config = to_json(checkpoint.config);
  config.erase("out_dir");
  const json header{{"format", 1},
                    {"architecture", to_json(checkpoint.config.model)},
                    {"n_inputs", checkpoint.n_inputs},
                    {"n_outputs", checkpoint.n_outputs},
                    {"seed", checkpoint.config.train.seed},
                    {"standardizer", standardizer_json(checkpoint.standardizer)},
                    {"config", config}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(kMagic, sizeof kMagic);
  put_le(out, text.size(), 4);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_le(out, param_count(checkpoint.model), 8);
  for_each_param(checkpoint.model, [&](const std::string&, std::span<const double> s) {
    for (double v : s) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  });
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ParseError("'" + path.string() + "' is not a sidnn checkpoint");
  }
  const std::uint64_t header_len = get_le(in, 4, "header length");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) throw ParseError("checkpoint truncated in header");

  Checkpoint c;
  try {
    const json header = json::parse(text);
    c.config = experiment_from_json(header.at("config"));
    c.n_inputs = header.at("n_inputs").get<std::size_t>();
    c.n_outputs = header.at("n_outputs").get<std::size_t>();
    const json& s = header.at("standardizer");
    if (!s.is_null()) {
      c.standardizer.u_mean = s.at("u_mean").get<Vector>();
      c.standardizer.u_std = s.at("u_std").get<Vector>();
      c.standardizer.y_mean = s.at("y_mean").get<Vector>();
      c.standardizer.y_std = s.at("y_std").get<Vector>();
    }
  } catch (const json::exception& e) {
    throw ParseError("checkpoint header: " + std::string(e.what()));
  }

  c.model = build_model(c.config.model, c.n_inputs, c.n_outputs, c.config.train.seed);
  const std::uint64_t count = get_le(in, 8, "parameter count");
  if (count != param_count(c.model)) {
    throw ShapeError("checkpoint holds " + std::to_string(count) + " parameters, architecture needs " +
                     std::to_string(param_count(c.model)));
  }
  for_each_param(c.model, [&](const std::string&, std::span<double> s) {
    for (double& v : s) v = std::bit_cast<double>(get_le(in, 8, "parameters"));
  });
  c.model.reset();
  return c;
}

}  // namespace sidnn
