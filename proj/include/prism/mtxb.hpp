#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "prism/mat.hpp"

namespace prism {

/// MTXB: "MTXB", u32 version, u64 rows, u64 cols, then rows*cols binary64 values in
/// row-major order. All integers and doubles are little-endian.
inline constexpr std::uint32_t kMtxbVersion = 1;
inline constexpr std::size_t kMtxbHeaderBytes = 24;

std::string encode_mtxb(const Mat& a);
// Throws FormatError on a bad magic, version, size or a non-finite entry.
Mat decode_mtxb(std::string_view bytes);

// Whitespace-separated text: "rows cols" on the first line, then the entries row by row.
Mat parse_text_matrix(std::string_view text);

struct MatrixDims {
  std::size_t rows, cols;
};

// Dimensions from the header alone (MTXB or text), without reading the payload.
MatrixDims peek_matrix_dims(const std::string& path);
// Reads MTXB when the file starts with the magic, text otherwise.
Mat read_matrix_file(const std::string& path);
void write_mtxb_file(const std::string& path, const Mat& a);

}  // namespace prism
