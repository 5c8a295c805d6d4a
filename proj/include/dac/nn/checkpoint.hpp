#pragma once

#include "dac/common.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace dac::nn {

/// Named real arrays with explicit shapes. On disk a checkpoint is two files:
/// `<prefix>.manifest`, a text list of `name ndims d0 d1 ...` lines in storage
/// order, and `<prefix>.bin`, the concatenated little-endian float64 payloads.
class Checkpoint {
 public:
  struct Entry {
    std::vector<Eigen::Index> shape;
    std::vector<double> data;
  };

  void put(const std::string& name, const Vec& v);
  void put(const std::string& name, const Mat& m);
  void put_scalar(const std::string& name, double x);

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  Vec get_vec(const std::string& name) const;
  Mat get_mat(const std::string& name) const;
  double get_scalar(const std::string& name) const;
  const Entry& entry(const std::string& name) const;
  std::vector<std::string> names() const;

  void save(const std::filesystem::path& prefix) const;
  static Checkpoint load(const std::filesystem::path& prefix);

  bool operator==(const Checkpoint& other) const;

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace dac::nn
