#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gptcloak/layered_structure.hpp>

namespace gptcloak::cli {

/// Unreadable, unwritable or malformed files.
class FileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StructureMetadata {
    std::optional<int> order;  // vanishing order the structure was designed for
    std::string core;          // free | fixed=<v> | insulated
    std::optional<bool> converged;
    std::optional<int> iterations;
    std::string generator;
};

struct StructureFile {
    RadialLayeredStructure structure;
    StructureMetadata metadata;
};

/// JSON text with every number printed to 17 significant digits.
std::string format_structure_file(const StructureFile& file);
StructureFile parse_structure_file(std::string_view text);

StructureFile read_structure_file(const std::filesystem::path& path);
void write_structure_file(const std::filesystem::path& path, const StructureFile& file);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace gptcloak::cli
