#include "prism/mtxb.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "prism/error.hpp"

namespace prism {

namespace {

constexpr char kMagic[4] = {'M', 'T', 'X', 'B'};

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(std::string_view in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

MatrixDims decode_header(std::string_view bytes) {
  if (bytes.size() < kMtxbHeaderBytes) throw FormatError("mtxb: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("mtxb: bad magic");
  const auto version = get_le(bytes, 4, 4);
  if (version != kMtxbVersion)
    throw FormatError("mtxb: unsupported version " + std::to_string(version));
  const auto rows = get_le(bytes, 8, 8), cols = get_le(bytes, 16, 8);
  if (rows == 0 || cols == 0) throw FormatError("mtxb: rows and cols must be >= 1");
  if (rows > std::numeric_limits<std::uint64_t>::max() / 8 / cols)
    throw FormatError("mtxb: dimensions overflow");
  return {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)};
}

std::string slurp(const std::string& path, std::size_t limit = std::string::npos) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::string data;
  if (limit == std::string::npos) {
    std::ostringstream ss;
    ss << in.rdbuf();
    data = std::move(ss).str();
  } else {
    data.resize(limit);
    in.read(data.data(), static_cast<std::streamsize>(limit));
    data.resize(static_cast<std::size_t>(in.gcount()));
  }
  return data;
}

bool has_magic(std::string_view bytes) {
  return bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0;
}

}  // namespace

std::string encode_mtxb(const Mat& a) {
  if (a.empty()) throw ShapeError("mtxb: cannot encode an empty matrix");
  if (!a.all_finite()) throw FormatError("mtxb: matrix has non-finite entries");
  std::string out(kMagic, 4);
  out.reserve(kMtxbHeaderBytes + 8 * a.size());
  put_le(out, kMtxbVersion, 4);
  put_le(out, a.rows(), 8);
  put_le(out, a.cols(), 8);
  for (double v : a.values()) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  return out;
}

Mat decode_mtxb(std::string_view bytes) {
  const auto [rows, cols] = decode_header(bytes);
  const std::size_t count = rows * cols;
  if (bytes.size() - kMtxbHeaderBytes != 8 * count)
    throw FormatError("mtxb: payload is " + std::to_string(bytes.size() - kMtxbHeaderBytes) +
                      " bytes, expected " + std::to_string(8 * count));
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<double>(get_le(bytes, kMtxbHeaderBytes + 8 * i, 8));
    if (!std::isfinite(data[i])) throw FormatError("mtxb: non-finite entry");
  }
  return Mat(rows, cols, std::move(data));
}

Mat parse_text_matrix(std::string_view text) {
  std::istringstream in{std::string(text)};
  long long rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0)
    throw FormatError("text matrix: first line must be 'rows cols' with both >= 1");
  std::vector<double> data(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (double& v : data)
    if (!(in >> v) || !std::isfinite(v))
      throw FormatError("text matrix: expected " + std::to_string(data.size()) +
                        " finite entries");
  std::string extra;
  if (in >> extra) throw FormatError("text matrix: trailing data '" + extra + "'");
  return Mat(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(data));
}

MatrixDims peek_matrix_dims(const std::string& path) {
  const std::string head = slurp(path, 256);
  if (has_magic(head)) return decode_header(head);
  std::istringstream in(head);
  long long rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0)
    throw FormatError("text matrix: first line must be 'rows cols' with both >= 1");
  return {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)};
}

Mat read_matrix_file(const std::string& path) {
  const std::string data = slurp(path);
  return has_magic(data) ? decode_mtxb(data) : parse_text_matrix(data);
}

void write_mtxb_file(const std::string& path, const Mat& a) {
  const std::string bytes = encode_mtxb(a);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace prism
