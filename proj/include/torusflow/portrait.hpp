#pragma once

#include <array>
#include <string>
#include <vector>

#include "torusflow/classify.hpp"

namespace torusflow {

/// Fixed portrait palette, one colour per orbit class.
std::array<unsigned char, 3> class_color(OrbitClass c);

/// Raw RGB pixel rows for a partition, one pixel per cell. The first
/// pixel row is the top of the image, i.e. the cell row with the
/// highest y, so portraits read like the usual torus picture.
std::vector<unsigned char> portrait_pixels(const GridPartition& partition);

/// Binary portable pixmap ("P6") of the partition.
void write_portrait_ppm(const GridPartition& partition, const std::string& path);

/// Equivalent vector graphic: one unit square per cell.
std::string portrait_svg(const GridPartition& partition);

void write_portrait_svg(const GridPartition& partition, const std::string& path);

} // namespace torusflow
