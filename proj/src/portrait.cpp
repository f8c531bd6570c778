#include "torusflow/portrait.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace torusflow {

std::array<unsigned char, 3> class_color(OrbitClass c) {
    switch (c) {
        case OrbitClass::Sing: return {0, 0, 0};            // black
        case OrbitClass::Per: return {47, 105, 224};        // blue
        case OrbitClass::P: return {240, 150, 30};          // orange
        case OrbitClass::LD: return {52, 168, 83};          // green
        case OrbitClass::ExceptionalSuspect: return {217, 48, 37}; // red
    }
    throw std::logic_error("class_color: unknown orbit class");
}

std::vector<unsigned char> portrait_pixels(const GridPartition& partition) {
    int n = partition.resolution;
    std::vector<unsigned char> px(std::size_t(3) * n * n);
    std::size_t at = 0;
    for (int row = n - 1; row >= 0; --row) { // image top = highest y
        for (int cx = 0; cx < n; ++cx) {
            auto rgb = class_color(partition.labels[row * n + cx].value);
            px[at++] = rgb[0];
            px[at++] = rgb[1];
            px[at++] = rgb[2];
        }
    }
    return px;
}

void write_portrait_ppm(const GridPartition& partition, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    int n = partition.resolution;
    out << "P6\n" << n << " " << n << "\n255\n";
    auto px = portrait_pixels(partition);
    out.write(reinterpret_cast<const char*>(px.data()),
              static_cast<std::streamsize>(px.size()));
    if (!out) throw std::runtime_error("failed writing " + path);
}

std::string portrait_svg(const GridPartition& partition) {
    int n = partition.resolution;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << n << "\" height=\"" << n
        << "\" viewBox=\"0 0 " << n << " " << n << "\" shape-rendering=\"crispEdges\">\n";
    char buf[96];
    for (int row = n - 1; row >= 0; --row) {
        int y_img = n - 1 - row;
        // merge horizontal runs of equal colour into single rectangles
        int cx = 0;
        while (cx < n) {
            OrbitClass c = partition.labels[row * n + cx].value;
            int run = 1;
            while (cx + run < n && partition.labels[row * n + cx + run].value == c) ++run;
            auto rgb = class_color(c);
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"1\" "
                          "fill=\"#%02x%02x%02x\"/>\n",
                          cx, y_img, run, rgb[0], rgb[1], rgb[2]);
            svg << buf;
            cx += run;
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_portrait_svg(const GridPartition& partition, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << portrait_svg(partition);
    if (!out) throw std::runtime_error("failed writing " + path);
}

} // namespace torusflow
