#include "overseg/pgm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "overseg/errors.hpp"

namespace overseg {

void write_pgm(const Gray8Image& image, std::ostream& sink) {
    if (image.pixels.size() != static_cast<std::size_t>(image.height) * image.width)
        throw ArgumentError("write_pgm: pixel count does not match dimensions");
    sink << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    sink.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (!sink) throw IoError("failed writing PGM data");
}

void write_pgm_file(const Gray8Image& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_pgm(image, out);
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, std::uint64_t& offset) {
    std::string token;
    int ch;
    while ((ch = in.get()) != EOF) {
        ++offset;
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') ++offset;
            if (ch != EOF) ++offset;
            continue;
        }
        if (std::isspace(ch)) {
            if (!token.empty()) return token;
            continue;
        }
        token.push_back(static_cast<char>(ch));
    }
    return token;
}

int header_int(std::istream& in, std::uint64_t& offset, const char* what) {
    const auto at = offset;
    const std::string token = header_token(in, offset);
    try {
        std::size_t used = 0;
        const int v = std::stoi(token, &used);
        if (used == token.size() && v > 0) return v;
    } catch (const std::exception&) {
    }
    throw FormatError(std::string("PGM: bad ") + what + " at byte " + std::to_string(at), at);
}

}  // namespace

Gray8Image read_pgm(std::istream& source) {
    std::uint64_t offset = 0;
    if (header_token(source, offset) != "P5") throw FormatError("PGM: expected binary P5 magic", 0);
    Gray8Image image;
    image.width = header_int(source, offset, "width");
    image.height = header_int(source, offset, "height");
    const auto maxval_at = offset;
    if (header_int(source, offset, "maxval") != 255)
        throw FormatError("PGM: only maxval 255 is supported", maxval_at);
    image.pixels.resize(static_cast<std::size_t>(image.width) * image.height);
    source.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (static_cast<std::size_t>(source.gcount()) != image.pixels.size())
        throw FormatError("PGM: truncated pixel data at byte " + std::to_string(offset + source.gcount()),
                          offset + static_cast<std::uint64_t>(source.gcount()));
    return image;
}

Gray8Image read_pgm_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_pgm(in);
}

Gray8Image to_display(const GrayImage& image) {
    Gray8Image out{image.height(), image.width(), std::vector<std::uint8_t>(image.size())};
    auto px = image.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
        out.pixels[i] = static_cast<std::uint8_t>(255 - std::lround(static_cast<double>(px[i]) * 255.0));
    return out;
}

GrayImage from_display(const Gray8Image& image) {
    std::vector<float> px(image.pixels.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<float>(255 - image.pixels[i]) / 255.0f;
    return GrayImage(image.height, image.width, std::move(px));
}

}  // namespace overseg
