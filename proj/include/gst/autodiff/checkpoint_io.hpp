#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "gst/autodiff/parameter_store.hpp"
#include "gst/error.hpp"

namespace gst {

// Binary checkpoint layout (all integers little-endian):
//   "GSTCKPT\0"  u32 version  u64 seed  u64 meta_len  meta bytes
//   u32 count, then per parameter:
//     u32 name_len  name  u32 rank(=2)  u64 rows  u64 cols  u8 precision(4|8)
//     rows*cols raw IEEE-754 values
// A text manifest "<path>.manifest" lists "name rows cols precision".
inline constexpr char kCheckpointMagic[8] = {'G', 'S', 'T', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace io_internal {

template <typename U>
void PutLe(std::string& out, U v) {
  static_assert(std::is_unsigned_v<U>);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <typename U>
  U Le() {
    Need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  std::string Bytes(std::size_t n) {
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw IoError("checkpoint truncated");
  }
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace io_internal

template <typename T>
std::string EncodeCheckpoint(const ParameterStore<T>& store, const std::string& meta) {
  using io_internal::PutLe;
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  PutLe<std::uint32_t>(out, kCheckpointVersion);
  PutLe<std::uint64_t>(out, store.seed());
  PutLe<std::uint64_t>(out, meta.size());
  out += meta;
  PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string& name = store.Name(i);
    const Array<T>& v = store.Value(i);
    PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    PutLe<std::uint32_t>(out, 2);
    PutLe<std::uint64_t>(out, v.rows());
    PutLe<std::uint64_t>(out, v.cols());
    out.push_back(static_cast<char>(sizeof(T)));
    for (T x : v.values()) {
      if constexpr (sizeof(T) == 8) {
        PutLe<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
      } else {
        PutLe<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
      }
    }
  }
  return out;
}

template <typename T>
struct DecodedCheckpoint {
  ParameterStore<T> store;
  std::string meta;
  int stored_precision = sizeof(T);
};

// Values stored at the other precision are converted.
template <typename T>
DecodedCheckpoint<T> DecodeCheckpoint(std::string bytes) {
  io_internal::Reader r(std::move(bytes));
  if (r.Bytes(8) != std::string(kCheckpointMagic, 8)) throw IoError("not a checkpoint file");
  const auto version = r.Le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto seed = r.Le<std::uint64_t>();
  DecodedCheckpoint<T> out{ParameterStore<T>(seed), "", sizeof(T)};
  out.meta = r.Bytes(r.Le<std::uint64_t>());
  const auto count = r.Le<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.Bytes(r.Le<std::uint32_t>());
    if (r.Le<std::uint32_t>() != 2) throw IoError("unsupported rank for " + name);
    const auto rows = r.Le<std::uint64_t>();
    const auto cols = r.Le<std::uint64_t>();
    const int precision = static_cast<unsigned char>(r.Bytes(1)[0]);
    if (precision != 4 && precision != 8) throw IoError("bad precision tag for " + name);
    out.stored_precision = precision;
    std::vector<T> data(rows * cols);
    for (auto& x : data) {
      if (precision == 8) {
        x = static_cast<T>(std::bit_cast<double>(r.Le<std::uint64_t>()));
      } else {
        x = static_cast<T>(std::bit_cast<float>(r.Le<std::uint32_t>()));
      }
    }
    out.store.Add(name, Array<T>(Shape{rows, cols}, std::move(data)));
  }
  if (!r.AtEnd()) throw IoError("trailing bytes in checkpoint");
  return out;
}

template <typename T>
std::string CheckpointManifest(const ParameterStore<T>& store) {
  std::ostringstream os;
  os << "# gst checkpoint manifest v" << kCheckpointVersion << "\n";
  os << "seed " << store.seed() << "\n";
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Array<T>& v = store.Value(i);
    os << store.Name(i) << " " << v.rows() << " " << v.cols() << " " << sizeof(T) * 8 << "\n";
  }
  return os.str();
}

inline std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void WriteFileBytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

template <typename T>
void SaveCheckpoint(const std::string& path, const ParameterStore<T>& store,
                    const std::string& meta) {
  WriteFileBytes(path, EncodeCheckpoint(store, meta));
  WriteFileBytes(path + ".manifest", CheckpointManifest(store));
}

template <typename T>
DecodedCheckpoint<T> LoadCheckpoint(const std::string& path) {
  return DecodeCheckpoint<T>(ReadFileBytes(path));
}

}  // namespace gst
