#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "provts/evaluate.hpp"

namespace provts {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
void write_binary_file(const std::string& path, const std::string& bytes);

/// Truecolor 8-bit PNG (one zlib-compressed IDAT chunk).
std::string png_encode_rgb(const std::vector<uint8_t>& rgb, size_t width, size_t height);

/// Row-normalized heatmap of the confusion matrix, cell_px pixels per cell.
void write_confusion_png(const ConfusionMatrix& cm, const std::string& path, size_t cell_px = 16);

std::string eval_report_csv(const EvalReport& report);

}  // namespace provts
