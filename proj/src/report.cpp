#include "provts/report.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

namespace provts {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

void write_binary_file(const std::string& path, const std::string& bytes) {
  write_text_file(path, bytes);
}

namespace {

void append_u32_be(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>(v & 0xFF));
}

void append_chunk(std::string& out, const char type[4], const std::string& payload) {
  append_u32_be(out, static_cast<uint32_t>(payload.size()));
  std::string body(type, 4);
  body += payload;
  out += body;
  uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()));
  append_u32_be(out, static_cast<uint32_t>(crc));
}

}  // namespace

std::string png_encode_rgb(const std::vector<uint8_t>& rgb, size_t width, size_t height) {
  if (rgb.size() != width * height * 3)
    fail(ErrorCode::ShapeMismatch, "pixel buffer does not match dimensions");

  // Scanlines with filter byte 0.
  std::string raw;
  raw.reserve(height * (1 + width * 3));
  for (size_t y = 0; y < height; ++y) {
    raw.push_back('\0');
    raw.append(reinterpret_cast<const char*>(&rgb[y * width * 3]), width * 3);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string compressed(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                Z_BEST_COMPRESSION) != Z_OK)
    fail(ErrorCode::IoError, "zlib compression failed");
  compressed.resize(bound);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  append_u32_be(ihdr, static_cast<uint32_t>(width));
  append_u32_be(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace
  append_chunk(png, "IHDR", ihdr);
  append_chunk(png, "IDAT", compressed);
  append_chunk(png, "IEND", "");
  return png;
}

void write_confusion_png(const ConfusionMatrix& cm, const std::string& path, size_t cell_px) {
  const size_t n = cm.classes.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "empty confusion matrix");
  const size_t side = n * cell_px;
  std::vector<uint8_t> rgb(side * side * 3, 255);

  for (size_t i = 0; i < n; ++i) {
    size_t row_sum = 0;
    for (size_t j = 0; j < n; ++j) row_sum += cm.at(i, j);
    for (size_t j = 0; j < n; ++j) {
      double v = row_sum > 0 ? static_cast<double>(cm.at(i, j)) / static_cast<double>(row_sum) : 0.0;
      // white -> deep blue ramp
      uint8_t r = static_cast<uint8_t>(255.0 - v * 200.0);
      uint8_t g = static_cast<uint8_t>(255.0 - v * 180.0);
      uint8_t b = static_cast<uint8_t>(255.0 - v * 75.0);
      for (size_t py = 0; py < cell_px; ++py)
        for (size_t px = 0; px < cell_px; ++px) {
          size_t offset = ((i * cell_px + py) * side + j * cell_px + px) * 3;
          rgb[offset] = r;
          rgb[offset + 1] = g;
          rgb[offset + 2] = b;
        }
    }
  }
  write_binary_file(path, png_encode_rgb(rgb, side, side));
}

std::string eval_report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "fold,accuracy,macro_f1\n";
  for (size_t f = 0; f < report.folds.size(); ++f)
    out << f << ',' << report.folds[f].accuracy << ',' << report.folds[f].macro_f1 << '\n';
  out << "mean," << report.mean_accuracy << ',' << report.mean_macro_f1 << '\n';
  return out.str();
}

}  // namespace provts
