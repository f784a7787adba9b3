#include "fanc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace fanc {
namespace {

constexpr char kMagic[4] = {'F', 'A', 'N', 'C'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

struct Entry {
  std::string name;
  Array* target;
};

// Fixed file order: model arrays, Adam first moments, Adam second moments.
template <class Ckpt, class F>
void for_each_array(Ckpt& c, F&& f) {
  c.model.weights.visit([&](std::string_view name, auto& a) { f(std::string(name), a); });
  c.moments.first.visit([&](std::string_view name, auto& a) { f("adam_first/" + std::string(name), a); });
  c.moments.second.visit([&](std::string_view name, auto& a) { f("adam_second/" + std::string(name), a); });
}

std::string shape_text(const Shape& s) {
  std::string t;
  for (auto d : s.dims()) t += " " + std::to_string(d);
  return t;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  c.model.validate();
  std::ostringstream header;
  header << "n_items " << c.model.dims.n_items << "\n"
         << "d_u " << c.model.dims.d_u << "\n"
         << "d_c " << c.model.dims.d_c << "\n"
         << "epoch " << c.epoch << "\n"
         << "adam_step " << c.moments.step << "\n";
  for_each_array(c, [&](const std::string& name, const Array& a) {
    header << "array " << name << shape_text(a.shape()) << "\n";
  });
  header << "array validation_history " << c.validation_history.size() << "\n";
  header << "end\n";
  const std::string text = header.str();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for_each_array(c, [&](const std::string&, const Array& a) {
    for (double v : a.values()) put_f64(out, v);
  });
  for (double v : c.validation_history) put_f64(out, v);
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw CheckpointError("checkpoint: bad magic bytes");
  if (bytes.size() < 9) throw CheckpointError("checkpoint: truncated preamble");
  if (bytes[4] != kCheckpointVersion)
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(bytes[4]) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  std::uint32_t header_len = 0;
  for (int b = 0; b < 4; ++b) header_len |= static_cast<std::uint32_t>(bytes[5 + b]) << (8 * b);
  if (bytes.size() < 9 + static_cast<std::size_t>(header_len))
    throw CheckpointError("checkpoint: truncated header");
  std::istringstream header(std::string(bytes.begin() + 9, bytes.begin() + 9 + header_len));

  Checkpoint c;
  ModelDims dims;
  struct Declared {
    std::string name;
    std::vector<std::size_t> dims;
  };
  std::vector<Declared> declared;
  std::string key;
  bool ended = false;
  while (header >> key) {
    if (key == "n_items") header >> dims.n_items;
    else if (key == "d_u") header >> dims.d_u;
    else if (key == "d_c") header >> dims.d_c;
    else if (key == "epoch") header >> c.epoch;
    else if (key == "adam_step") header >> c.moments.step;
    else if (key == "array") {
      std::string line;
      std::getline(header, line);
      std::istringstream fields(line);
      Declared d;
      fields >> d.name;
      std::size_t v;
      while (fields >> v) d.dims.push_back(v);
      declared.push_back(std::move(d));
    } else if (key == "end") {
      ended = true;
      break;
    } else {
      throw CheckpointError("checkpoint header: unknown key '" + key + "'");
    }
    if (!header) throw CheckpointError("checkpoint header: bad value for '" + key + "'");
  }
  if (!ended) throw CheckpointError("checkpoint header: missing end marker");

  try {
    c.model = ModelParameters::zeros(dims);
  } catch (const ContractViolation& e) {
    throw CheckpointError(std::string("checkpoint header: invalid dims: ") + e.what());
  }
  c.moments.first = zeros_like(c.model.weights);
  c.moments.second = zeros_like(c.model.weights);

  std::size_t pos = 9 + header_len;
  auto read_values = [&](const std::string& name, std::span<double> dst) {
    if (bytes.size() - pos < dst.size() * 8)
      throw CheckpointError("checkpoint: truncated while reading array '" + name + "'");
    for (double& v : dst) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[pos + b]) << (8 * b);
      v = std::bit_cast<double>(bits);
      pos += 8;
    }
  };

  std::size_t k = 0;
  for_each_array(c, [&](const std::string& name, Array& a) {
    if (k >= declared.size() || declared[k].name != name)
      throw CheckpointError("checkpoint header: expected array '" + name + "' at position " +
                            std::to_string(k));
    const auto& dd = declared[k];
    const auto expect = a.shape().dims();
    if (!std::equal(expect.begin(), expect.end(), dd.dims.begin(), dd.dims.end()))
      throw CheckpointError("checkpoint header: array '" + name + "' has shape" +
                            shape_text(a.shape()) + " for these dims");
    read_values(name, a.values());
    ++k;
  });
  if (k >= declared.size() || declared[k].name != "validation_history" || declared[k].dims.size() != 1)
    throw CheckpointError("checkpoint header: expected array 'validation_history'");
  c.validation_history.resize(declared[k].dims[0]);
  read_values("validation_history", c.validation_history);
  if (k + 1 != declared.size()) throw CheckpointError("checkpoint header: unexpected extra arrays");
  if (pos != bytes.size()) throw CheckpointError("checkpoint: trailing bytes after last array");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace fanc
