#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pks/config.hpp"
#include "pks/diagnostics.hpp"
#include "pks/model.hpp"

namespace pks {

// ---------------------------------------------------------------------------
// Diagnostics CSV

inline constexpr std::string_view kDiagnosticsHeader =
    "t,mass,mean_C,min_n,max_n,l2_n_neq,l2_gradC_neq,F_M,E,S,P,dt_used,positivity_flag";

inline std::string csv_row(const FunctionalValues& v) {
  std::string row;
  for (double x : {v.t, v.mass, v.mean_C, v.min_n, v.max_n, v.l2_n_neq, v.l2_gradC_neq, v.F_M, v.E, v.S, v.P,
                   v.dt_used}) {
    row += format_double(x);
    row += ',';
  }
  row += v.positivity_flag ? '1' : '0';
  return row;
}

/// Streams FunctionalValues rows to a file, header first.
class CsvSink {
 public:
  explicit CsvSink(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw Error(ErrorCode::RunIoError, "cannot open " + path.string());
    out_ << kDiagnosticsHeader << '\n';
  }

  void operator()(const FunctionalValues& v) {
    out_ << csv_row(v) << '\n';
    if (!out_) throw Error(ErrorCode::RunIoError, "write to diagnostics CSV failed");
  }

 private:
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Binary snapshots
//
// Layout (little-endian):
//   char[4]  magic "PKS1"
//   u32      version
//   u32      dim
//   u32      n_points
//   f64      t
//   f64      A
//   f64[N^dim] n, row-major with x fastest
//   f64[N^dim] C

inline constexpr std::array<char, 4> kSnapshotMagic{'P', 'K', 'S', '1'};
inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 32;

struct Snapshot {
  double t = 0.0;
  double A = 1.0;
  Field n;
  Field C;
};

namespace detail {

template <class T>
void put_le(std::vector<unsigned char>& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  buf.insert(buf.end(), bytes.begin(), bytes.end());
}

template <class T>
T get_le(const unsigned char* p) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace detail

inline std::vector<unsigned char> encode_snapshot(const Snapshot& s) {
  require(s.n.grid() == s.C.grid(), ErrorCode::InvalidArgument, "snapshot fields live on different grids");
  const auto& grid = s.n.grid();
  std::vector<unsigned char> buf;
  buf.reserve(kSnapshotHeaderBytes + 2 * grid.size() * 8);
  buf.insert(buf.end(), kSnapshotMagic.begin(), kSnapshotMagic.end());
  detail::put_le<std::uint32_t>(buf, kSnapshotVersion);
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(grid.dim()));
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(grid.n()));
  detail::put_le<double>(buf, s.t);
  detail::put_le<double>(buf, s.A);
  for (double v : s.n.values()) detail::put_le<double>(buf, v);
  for (double v : s.C.values()) detail::put_le<double>(buf, v);
  return buf;
}

inline Snapshot decode_snapshot(const std::vector<unsigned char>& buf) {
  require(buf.size() >= kSnapshotHeaderBytes, ErrorCode::SnapshotFormat, "truncated header");
  require(std::equal(kSnapshotMagic.begin(), kSnapshotMagic.end(), buf.begin()), ErrorCode::SnapshotFormat,
          "bad magic");
  const auto* p = buf.data();
  const auto version = detail::get_le<std::uint32_t>(p + 4);
  require(version == kSnapshotVersion, ErrorCode::SnapshotFormat, "unsupported version " + std::to_string(version));
  const auto dim = detail::get_le<std::uint32_t>(p + 8);
  const auto npts = detail::get_le<std::uint32_t>(p + 12);
  require(dim >= 1 && dim <= 3 && npts >= 8 && npts % 2 == 0 && npts <= (1u << 14), ErrorCode::SnapshotFormat,
          "bad grid description");
  const TorusGrid grid(static_cast<int>(dim), static_cast<int>(npts));
  require(buf.size() == kSnapshotHeaderBytes + 2 * grid.size() * 8, ErrorCode::SnapshotFormat,
          "payload length does not match header");
  Snapshot s{detail::get_le<double>(p + 16), detail::get_le<double>(p + 24), Field(grid), Field(grid)};
  const unsigned char* q = p + kSnapshotHeaderBytes;
  for (auto& v : s.n.values()) {
    v = detail::get_le<double>(q);
    q += 8;
  }
  for (auto& v : s.C.values()) {
    v = detail::get_le<double>(q);
    q += 8;
  }
  return s;
}

inline void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  const auto buf = encode_snapshot(s);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorCode::RunIoError, "cannot write snapshot " + path.string());
}

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::RunIoError, "cannot open snapshot " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(buf);
}

}  // namespace pks
