#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace steerlab::io {

struct ContainerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Versioned binary container for trained models: magic bytes, format
/// version, a table of named tensors (row-major f64 / i64 / raw strings), and
/// a CRC32 over the payload. Shared by every model type in the project.
class Container {
 public:
  static constexpr char kMagic[4] = {'S', 'L', 'M', 'C'};
  static constexpr std::uint32_t kVersion = 1;

  struct Entry {
    enum class Type : std::uint8_t { F64 = 0, I64 = 1, Str = 2 };
    Type type = Type::F64;
    std::vector<std::uint64_t> dims;
    std::vector<double> f64;
    std::vector<std::int64_t> i64;
    std::string str;

    std::uint64_t element_count() const {
      std::uint64_t n = 1;
      for (auto d : dims) n *= d;
      return dims.empty() ? 0 : n;
    }
  };

  void put_f64(const std::string& name, std::vector<std::uint64_t> dims, std::vector<double> data);
  void put_i64(const std::string& name, std::vector<std::uint64_t> dims, std::vector<std::int64_t> data);
  void put_scalar(const std::string& name, double v) { put_f64(name, {1}, {v}); }
  void put_u64(const std::string& name, std::uint64_t v) {
    put_i64(name, {1}, {static_cast<std::int64_t>(v)});
  }
  void put_str(const std::string& name, std::string s);

  bool has(const std::string& name) const { return entries_.count(name) > 0; }
  const Entry& get(const std::string& name) const;
  double get_scalar(const std::string& name) const;
  std::uint64_t get_u64(const std::string& name) const;
  const std::string& get_str(const std::string& name) const;

  const std::map<std::string, Entry>& entries() const { return entries_; }

  std::vector<std::uint8_t> serialize() const;
  static Container deserialize(const std::vector<std::uint8_t>& bytes);

  void save(const std::string& path) const;
  static Container load(const std::string& path);

 private:
  std::map<std::string, Entry> entries_;
};

std::uint32_t crc32(const std::uint8_t* data, std::size_t len);

}  // namespace steerlab::io
