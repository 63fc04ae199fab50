#include "ctgn/diff/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "ctgn/errors.hpp"

namespace ctgn {
namespace {

constexpr std::array<char, 8> kMagic = {'C', 'T', 'G', 'N', 'C', 'K', 'P', '1'};

template <typename T>
void put_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("checkpoint truncated");
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put_pod<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto n = get_pod<std::uint64_t>(is);
  if (n > (1ULL << 32)) throw DataError("checkpoint string length implausible");
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw DataError("checkpoint truncated");
  return s;
}

}  // namespace

void Checkpoint::put(const std::string& name, Tensor value) {
  for (auto& [n, t] : tensors)
    if (n == name) {
      t = std::move(value);
      return;
    }
  tensors.emplace_back(name, std::move(value));
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, _] : tensors)
    if (n == name) return true;
  return false;
}

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw DataError("checkpoint has no entry named " + name);
}

void Checkpoint::put_params(const std::string& prefix, const ParamSet& params) {
  for (const auto& [name, value] : params) put(prefix + name, value);
}

void Checkpoint::load_params(const std::string& prefix, ParamSet& params) const {
  for (auto& [name, value] : params) {
    const Tensor& stored = get(prefix + name);
    if (!stored.same_shape(value))
      throw DataError("checkpoint entry " + prefix + name + " has shape " +
                      stored.shape_string() + ", model expects " + value.shape_string());
    value = stored;
  }
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic.data(), kMagic.size());
  put_pod<std::uint64_t>(os, ckpt.step);
  put_pod<std::uint64_t>(os, ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    put_string(os, name);
    put_pod<std::uint64_t>(os, t.rank());
    for (auto d : t.shape()) put_pod<std::uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(t.data().data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  put_pod<std::uint64_t>(os, ckpt.meta.size());
  for (const auto& [k, v] : ckpt.meta) {
    put_string(os, k);
    put_string(os, v);
  }
  if (!os) throw DataError("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw DataError("not a checkpoint file: " + path.string());
  Checkpoint ckpt;
  ckpt.step = get_pod<std::uint64_t>(is);
  const auto count = get_pod<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto name = get_string(is);
    const auto rank = get_pod<std::uint64_t>(is);
    if (rank == 0 || rank > 8) throw DataError("checkpoint entry " + name + " has bad rank");
    Shape shape(rank);
    for (auto& d : shape) d = get_pod<std::uint64_t>(is);
    std::vector<double> data(shape_size(shape));
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!is) throw DataError("checkpoint truncated in entry " + name);
    ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  const auto meta_count = get_pod<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < meta_count; ++i) {
    auto k = get_string(is);
    ckpt.meta[k] = get_string(is);
  }
  return ckpt;
}

}  // namespace ctgn
