#include "steerlab/io/container.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace steerlab::io {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64_raw(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

struct Reader {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw ContainerError("container: truncated payload");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | buf[pos++];
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | buf[pos++];
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return buf[pos++];
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
    pos += n;
    return s;
  }
};

}  // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320U ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t c = 0xffffffffU;
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xffU] ^ (c >> 8);
  return c ^ 0xffffffffU;
}

void Container::put_f64(const std::string& name, std::vector<std::uint64_t> dims,
                        std::vector<double> data) {
  Entry e;
  e.type = Entry::Type::F64;
  e.dims = std::move(dims);
  e.f64 = std::move(data);
  if (e.element_count() != e.f64.size()) throw ContainerError("container: dims/data mismatch for " + name);
  entries_[name] = std::move(e);
}

void Container::put_i64(const std::string& name, std::vector<std::uint64_t> dims,
                        std::vector<std::int64_t> data) {
  Entry e;
  e.type = Entry::Type::I64;
  e.dims = std::move(dims);
  e.i64 = std::move(data);
  if (e.element_count() != e.i64.size()) throw ContainerError("container: dims/data mismatch for " + name);
  entries_[name] = std::move(e);
}

void Container::put_str(const std::string& name, std::string s) {
  Entry e;
  e.type = Entry::Type::Str;
  e.dims = {s.size()};
  e.str = std::move(s);
  entries_[name] = std::move(e);
}

const Container::Entry& Container::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContainerError("container: missing entry " + name);
  return it->second;
}

double Container::get_scalar(const std::string& name) const {
  const auto& e = get(name);
  if (e.type != Entry::Type::F64 || e.f64.size() != 1) throw ContainerError("container: not a scalar: " + name);
  return e.f64[0];
}

std::uint64_t Container::get_u64(const std::string& name) const {
  const auto& e = get(name);
  if (e.type != Entry::Type::I64 || e.i64.size() != 1) throw ContainerError("container: not a u64: " + name);
  return static_cast<std::uint64_t>(e.i64[0]);
}

const std::string& Container::get_str(const std::string& name) const {
  const auto& e = get(name);
  if (e.type != Entry::Type::Str) throw ContainerError("container: not a string: " + name);
  return e.str;
}

std::vector<std::uint8_t> Container::serialize() const {
  std::vector<std::uint8_t> body;
  put_u32(body, kVersion);
  put_u32(body, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, e] : entries_) {
    put_u32(body, static_cast<std::uint32_t>(name.size()));
    body.insert(body.end(), name.begin(), name.end());
    body.push_back(static_cast<std::uint8_t>(e.type));
    body.push_back(static_cast<std::uint8_t>(e.dims.size()));
    for (auto d : e.dims) put_u64_raw(body, d);
    switch (e.type) {
      case Entry::Type::F64:
        for (double v : e.f64) {
          std::uint64_t bits;
          std::memcpy(&bits, &v, 8);
          put_u64_raw(body, bits);
        }
        break;
      case Entry::Type::I64:
        for (std::int64_t v : e.i64) put_u64_raw(body, static_cast<std::uint64_t>(v));
        break;
      case Entry::Type::Str:
        body.insert(body.end(), e.str.begin(), e.str.end());
        break;
    }
  }

  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.insert(out.end(), body.begin(), body.end());
  put_u32(out, crc32(body.data(), body.size()));
  return out;
}

Container Container::deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ContainerError("container: bad magic");
  const std::size_t body_len = bytes.size() - 8;
  const std::uint32_t stored_crc = (static_cast<std::uint32_t>(bytes[bytes.size() - 4]) << 24) |
                                   (static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 16) |
                                   (static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 8) |
                                   static_cast<std::uint32_t>(bytes[bytes.size() - 1]);
  if (crc32(bytes.data() + 4, body_len) != stored_crc)
    throw ContainerError("container: checksum mismatch");

  std::vector<std::uint8_t> body(bytes.begin() + 4, bytes.end() - 4);
  Reader r{body};
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw ContainerError("container: unsupported version");
  const std::uint32_t count = r.u32();

  Container c;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32();
    const std::string name = r.str(name_len);
    Entry e;
    e.type = static_cast<Entry::Type>(r.u8());
    const std::uint8_t ndim = r.u8();
    e.dims.resize(ndim);
    for (auto& d : e.dims) d = r.u64();
    const std::uint64_t n = e.element_count();
    switch (e.type) {
      case Entry::Type::F64:
        e.f64.resize(n);
        for (auto& v : e.f64) {
          const std::uint64_t bits = r.u64();
          std::memcpy(&v, &bits, 8);
        }
        break;
      case Entry::Type::I64:
        e.i64.resize(n);
        for (auto& v : e.i64) v = static_cast<std::int64_t>(r.u64());
        break;
      case Entry::Type::Str:
        e.str = r.str(n);
        break;
      default:
        throw ContainerError("container: unknown entry type");
    }
    c.entries_[name] = std::move(e);
  }
  return c;
}

void Container::save(const std::string& path) const {
  const auto bytes = serialize();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ContainerError("container: cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ContainerError("container: write failed: " + path);
}

Container Container::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ContainerError("container: cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace steerlab::io
