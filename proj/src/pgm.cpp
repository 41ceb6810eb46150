#include "anoscore/pgm.hpp"

#include <cctype>
#include <fstream>

namespace anoscore {
namespace {

// Reads one PNM header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
        } else if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            break;
        }
    }
    while ((c = in.get()) != EOF) {
        if (std::isspace(c)) break;
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

long parse_dim(const std::string& tok) {
    if (tok.empty()) return -1;
    for (char ch : tok)
        if (!std::isdigit(static_cast<unsigned char>(ch))) return -1;
    try {
        return std::stol(tok);
    } catch (...) {
        return -1;
    }
}

}  // namespace

GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw PgmError(PgmError::Kind::MissingFile, "cannot open " + path.string());

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw PgmError(PgmError::Kind::BadMagic, path.string() + ": not a binary PGM (P5)");

    long w = parse_dim(next_token(in));
    long h = parse_dim(next_token(in));
    long maxval = parse_dim(next_token(in));
    if (w <= 0 || h <= 0)
        throw PgmError(PgmError::Kind::BadHeader, path.string() + ": malformed PGM header");
    if (maxval != 255)
        throw PgmError(PgmError::Kind::BadMaxval, path.string() + ": maxval must be 255");

    // A single whitespace byte separates the header from the raster.
    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw PgmError(PgmError::Kind::Truncated, path.string() + ": truncated pixel data");
    return img;
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw PgmError(PgmError::Kind::WriteFailure, "cannot write " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out)
        throw PgmError(PgmError::Kind::WriteFailure, "write failed for " + path.string());
}

}  // namespace anoscore
