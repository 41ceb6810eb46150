#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "anoscore/image.hpp"

namespace anoscore {

struct PgmError : std::runtime_error {
    enum class Kind { MissingFile, BadMagic, BadHeader, BadMaxval, Truncated, WriteFailure };
    Kind kind;
    PgmError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

/// Reads a binary PGM (magic "P5", maxval 255).
GrayImage load_pgm(const std::filesystem::path& path);

/// Writes "P5\n<w> <h>\n255\n" followed by raw pixel bytes.
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

}  // namespace anoscore
