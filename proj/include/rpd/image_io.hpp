#ifndef RPD_IMAGE_IO_HPP
#define RPD_IMAGE_IO_HPP

#include <string>

#include "rpd/types.hpp"

namespace rpd {

// 8-bit grayscale or 24-bit RGB PNG, or binary PGM (P5). RGB is converted by
// luminance 0.299 R + 0.587 G + 0.114 B.
GrayImage load_gray_image(const std::string& path);
void save_gray_image(const GrayImage& img, const std::string& path);

// KITTI-style disparity raster: 16-bit single channel, stored = round(d * 256),
// stored 0 = no estimate.
DisparityMap load_disparity(const std::string& path);
void save_disparity(const DisparityMap& map, const std::string& path);

// 16-bit label raster, stored value = label.
LabelMap load_labels(const std::string& path);
void save_labels(const LabelMap& labels, const std::string& path);

// RGB PNG: background keeps the gray value, label k is tinted with palette
// colour (k-1) mod 12.
void save_overlay(const GrayImage& img, const LabelMap& labels, const std::string& path);

struct Rgb8 {
  unsigned char r, g, b;
};
Rgb8 overlay_palette(int label);
Rgb8 overlay_tint(float gray, int label);

}  // namespace rpd

#endif
