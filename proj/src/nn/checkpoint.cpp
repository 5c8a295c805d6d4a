#include "dac/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dac::nn {

namespace {

constexpr const char* kManifestHeader = "# dac-checkpoint v1";

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

void write_le(std::ostream& out, double x) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw ValidationError("checkpoint payload is truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void Checkpoint::put(const std::string& name, const Vec& v) {
  require(!name.empty() && name.find_first_of(" \t\n") == std::string::npos, "checkpoint names cannot contain whitespace");
  entries_[name] = Entry{{v.size()}, std::vector<double>(v.data(), v.data() + v.size())};
}

void Checkpoint::put(const std::string& name, const Mat& m) {
  require(!name.empty() && name.find_first_of(" \t\n") == std::string::npos, "checkpoint names cannot contain whitespace");
  entries_[name] = Entry{{m.rows(), m.cols()}, std::vector<double>(m.data(), m.data() + m.size())};
}

void Checkpoint::put_scalar(const std::string& name, double x) {
  require(!name.empty() && name.find_first_of(" \t\n") == std::string::npos, "checkpoint names cannot contain whitespace");
  entries_[name] = Entry{{}, {x}};
}

const Checkpoint::Entry& Checkpoint::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ValidationError("checkpoint has no entry named " + name);
  return it->second;
}

Vec Checkpoint::get_vec(const std::string& name) const {
  const Entry& e = entry(name);
  require(e.shape.size() == 1, "checkpoint entry " + name + " is not a vector");
  return Eigen::Map<const Vec>(e.data.data(), e.shape[0]);
}

Mat Checkpoint::get_mat(const std::string& name) const {
  const Entry& e = entry(name);
  require(e.shape.size() == 2, "checkpoint entry " + name + " is not a matrix");
  return Eigen::Map<const Mat>(e.data.data(), e.shape[0], e.shape[1]);
}

double Checkpoint::get_scalar(const std::string& name) const {
  const Entry& e = entry(name);
  require(e.shape.empty(), "checkpoint entry " + name + " is not a scalar");
  return e.data[0];
}

std::vector<std::string> Checkpoint::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

void Checkpoint::save(const std::filesystem::path& prefix) const {
  std::ofstream manifest(with_suffix(prefix, ".manifest"));
  std::ofstream payload(with_suffix(prefix, ".bin"), std::ios::binary);
  if (!manifest || !payload) throw ValidationError("cannot open checkpoint files at " + prefix.string());
  manifest << kManifestHeader << '\n';
  for (const auto& [name, e] : entries_) {
    manifest << name << ' ' << e.shape.size();
    for (auto d : e.shape) manifest << ' ' << d;
    manifest << '\n';
    for (double x : e.data) write_le(payload, x);
  }
  if (!manifest || !payload) throw ValidationError("failed writing checkpoint " + prefix.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& prefix) {
  std::ifstream manifest(with_suffix(prefix, ".manifest"));
  std::ifstream payload(with_suffix(prefix, ".bin"), std::ios::binary);
  if (!manifest || !payload) throw ValidationError("cannot open checkpoint files at " + prefix.string());
  std::string line;
  if (!std::getline(manifest, line) || line != kManifestHeader) {
    throw ValidationError("unsupported checkpoint manifest version in " + prefix.string());
  }
  Checkpoint cp;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string name;
    std::size_t ndims = 0;
    if (!(fields >> name >> ndims)) throw ValidationError("malformed checkpoint manifest line: " + line);
    Entry e;
    std::size_t count = 1;
    for (std::size_t i = 0; i < ndims; ++i) {
      Eigen::Index d = 0;
      if (!(fields >> d) || d < 0) throw ValidationError("malformed checkpoint shape: " + line);
      e.shape.push_back(d);
      count *= static_cast<std::size_t>(d);
    }
    e.data.resize(count);
    for (auto& x : e.data) x = read_le(payload);
    cp.entries_[name] = std::move(e);
  }
  if (payload.peek() != std::char_traits<char>::eof()) {
    throw ValidationError("checkpoint payload is longer than its manifest");
  }
  return cp;
}

bool Checkpoint::operator==(const Checkpoint& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (const auto& [name, e] : entries_) {
    auto it = other.entries_.find(name);
    if (it == other.entries_.end() || it->second.shape != e.shape) return false;
    if (std::memcmp(e.data.data(), it->second.data.data(), e.data.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace dac::nn
