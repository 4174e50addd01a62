#include "tomoseg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tomoseg {

namespace {

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// PGM header token reader, skipping whitespace and '#' comments.
int next_pnm_int(std::istream& in, const std::string& path) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF)
        throw std::runtime_error("load_grayscale: truncated PGM header in " + path);
    std::string tok;
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw std::runtime_error("load_grayscale: bad PGM header token '" + tok + "' in " + path);
    }
}

Image load_pgm(const std::string& path, ImageFileInfo* info) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("load_grayscale: cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        throw std::runtime_error("load_grayscale: " + path + " is not binary PGM (P5)");
    const int w = next_pnm_int(in, path);
    const int h = next_pnm_int(in, path);
    const int maxval = next_pnm_int(in, path);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        throw std::runtime_error("load_grayscale: bad PGM dimensions in " + path);

    const bool two_byte = maxval > 255;
    const std::size_t count = static_cast<std::size_t>(w) * h;
    std::vector<unsigned char> buf(count * (two_byte ? 2 : 1));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
        throw std::runtime_error("load_grayscale: truncated PGM raster in " + path);

    Image img(w, h);
    const double scale = 1.0 / maxval;
    for (std::size_t i = 0; i < count; ++i) {
        unsigned int v = two_byte ? (static_cast<unsigned int>(buf[2 * i]) << 8) | buf[2 * i + 1]
                                  : buf[i];
        img.data[i] = v * scale;
    }
    if (info) *info = {w, h, two_byte ? 16 : 8};
    return img;
}

Image load_f32(const std::string& path, ImageFileInfo* info) {
    std::ifstream hdr(path + ".hdr");
    if (!hdr)
        throw std::runtime_error("load_grayscale: missing sidecar " + path + ".hdr");
    int w = 0, h = 0;
    hdr >> w >> h;
    if (!hdr || w <= 0 || h <= 0)
        throw std::runtime_error("load_grayscale: bad sidecar " + path + ".hdr");

    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("load_grayscale: cannot open " + path);
    const std::size_t count = static_cast<std::size_t>(w) * h;
    std::vector<float> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float))
        throw std::runtime_error("load_grayscale: truncated raster in " + path);

    Image img(w, h);
    for (std::size_t i = 0; i < count; ++i) img.data[i] = buf[i];
    if (info) *info = {w, h, 32};
    return img;
}

} // namespace

Image load_grayscale(const std::string& path, ImageFileInfo* info) {
    const std::string ext = lower_ext(path);
    if (ext == "pgm") return load_pgm(path, info);
    if (ext == "f32" || ext == "raw") return load_f32(path, info);
    throw std::runtime_error("load_grayscale: unsupported format '." + ext + "' for " + path);
}

void save_pgm(const Image& img, const std::string& path, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16)
        throw std::invalid_argument("save_pgm: bit depth must be 8 or 16");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("save_pgm: cannot open " + path);
    const int maxval = bit_depth == 8 ? 255 : 65535;
    out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
    for (double v : img.data) {
        const double c = std::clamp(v, 0.0, 1.0);
        const unsigned int q = static_cast<unsigned int>(std::lround(c * maxval));
        if (bit_depth == 16) out.put(static_cast<char>((q >> 8) & 0xff));
        out.put(static_cast<char>(q & 0xff));
    }
    if (!out)
        throw std::runtime_error("save_pgm: write failed for " + path);
}

void save_pgm_preview(const Image& img, const std::string& path, double lo, double hi) {
    if (lo >= hi) {
        const auto [mn, mx] = std::minmax_element(img.data.begin(), img.data.end());
        lo = *mn;
        hi = *mx;
    }
    Image windowed = img;
    const double range = hi - lo;
    for (double& v : windowed.data)
        v = range > 0.0 ? (v - lo) / range : 0.0;
    save_pgm(windowed, path, 8);
}

void save_raw_f32(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("save_raw_f32: cannot open " + path);
    std::vector<float> buf(img.data.begin(), img.data.end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out)
        throw std::runtime_error("save_raw_f32: write failed for " + path);
    std::ofstream hdr(path + ".hdr");
    if (!hdr)
        throw std::runtime_error("save_raw_f32: cannot open " + path + ".hdr");
    hdr << img.width << " " << img.height << "\n";
}

void save_image(const Image& img, const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "pgm") {
        save_pgm(img, path, 8);
    } else if (ext == "f32" || ext == "raw") {
        save_raw_f32(img, path);
    } else {
        throw std::runtime_error("save_image: unsupported format '." + ext + "' for " + path);
    }
}

void save_sinogram_f32(const Sinogram& g, const std::string& path) {
    Image carrier(g.n_detectors, g.n_angles);
    carrier.data = g.data;
    save_raw_f32(carrier, path);
}

Sinogram load_sinogram_f32(const std::string& path) {
    Image carrier = load_grayscale(path);
    Sinogram g(carrier.height, carrier.width);
    g.data = carrier.data;
    return g;
}

} // namespace tomoseg
