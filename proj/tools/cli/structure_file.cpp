#include "cli/structure_file.hpp"

#include <fstream>
#include <span>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "json.hpp"

#include <gptcloak/errors.hpp>

namespace gptcloak::cli {

namespace {

constexpr std::string_view kFormatTag = "gptcloak-structure";
constexpr int kFormatVersion = 1;

std::string number(double v) { return fmt::format("{:.16e}", v); }

std::string number_array(std::span<const double> values) {
    std::vector<std::string> items;
    items.reserve(values.size());
    for (double v : values) items.push_back(number(v));
    return fmt::format("[{}]", fmt::join(items, ", "));
}

std::vector<double> read_numbers(const nlohmann::json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end()) throw FileError(fmt::format("missing field '{}'", key));
    if (!it->is_array()) throw FileError(fmt::format("field '{}' must be an array of numbers", key));
    std::vector<double> out;
    for (const auto& v : *it) {
        if (!v.is_number()) throw FileError(fmt::format("field '{}' must be an array of numbers", key));
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

std::string format_structure_file(const StructureFile& file) {
    const RadialLayeredStructure& s = file.structure;
    const StructureMetadata& m = file.metadata;

    std::vector<std::string> meta;
    if (m.order) meta.push_back(fmt::format("\"order\": {}", *m.order));
    if (!m.core.empty()) meta.push_back(fmt::format("\"core\": {}", nlohmann::json(m.core).dump()));
    if (m.converged) meta.push_back(fmt::format("\"converged\": {}", *m.converged));
    if (m.iterations) meta.push_back(fmt::format("\"iterations\": {}", *m.iterations));
    if (!m.generator.empty()) meta.push_back(fmt::format("\"generator\": {}", nlohmann::json(m.generator).dump()));

    std::string out = "{\n";
    out += fmt::format("  \"format\": \"{}\",\n", kFormatTag);
    out += fmt::format("  \"version\": {},\n", kFormatVersion);
    out += fmt::format("  \"background\": {},\n", number(s.background()));
    out += fmt::format("  \"radii\": {},\n", number_array(s.radii()));
    out += fmt::format("  \"conductivities\": {},\n", number_array(s.conductivities()));
    out += fmt::format("  \"metadata\": {{{}}}\n", fmt::join(meta, ", "));
    out += "}\n";
    return out;
}

StructureFile parse_structure_file(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FileError(fmt::format("not valid JSON: {}", e.what()));
    }
    if (!doc.is_object()) throw FileError("structure file must hold a JSON object");
    if (doc.value("format", std::string{}) != kFormatTag) {
        throw FileError(fmt::format("field 'format' must be \"{}\"", kFormatTag));
    }
    if (!doc.contains("version") || !doc["version"].is_number_integer() || doc["version"].get<int>() != kFormatVersion) {
        throw FileError(fmt::format("unsupported structure file version (expected {})", kFormatVersion));
    }
    if (!doc.contains("background") || !doc["background"].is_number()) {
        throw FileError("field 'background' must be a number");
    }

    const double background = doc["background"].get<double>();
    std::vector<double> radii = read_numbers(doc, "radii");
    std::vector<double> sigma = read_numbers(doc, "conductivities");

    StructureMetadata meta;
    if (const auto it = doc.find("metadata"); it != doc.end() && it->is_object()) {
        const nlohmann::json& m = *it;
        if (m.contains("order") && m["order"].is_number_integer()) meta.order = m["order"].get<int>();
        if (m.contains("core") && m["core"].is_string()) meta.core = m["core"].get<std::string>();
        if (m.contains("converged") && m["converged"].is_boolean()) meta.converged = m["converged"].get<bool>();
        if (m.contains("iterations") && m["iterations"].is_number_integer()) {
            meta.iterations = m["iterations"].get<int>();
        }
        if (m.contains("generator") && m["generator"].is_string()) meta.generator = m["generator"].get<std::string>();
    }

    try {
        return StructureFile{RadialLayeredStructure(std::move(radii), std::move(sigma), background), std::move(meta)};
    } catch (const Error& e) {
        throw FileError(fmt::format("invalid structure: {}", e.what()));
    }
}

StructureFile read_structure_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError(fmt::format("{}: cannot open for reading", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_structure_file(buffer.str());
    } catch (const FileError& e) {
        throw FileError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_structure_file(const std::filesystem::path& path, const StructureFile& file) {
    write_file_atomic(path, format_structure_file(file));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    std::filesystem::path tmp = path;
    tmp += fmt::format(".tmp.{}", ::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FileError(fmt::format("{}: cannot open for writing", tmp.string()));
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw FileError(fmt::format("{}: write failed", tmp.string()));
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw FileError(fmt::format("{}: {}", path.string(), ec.message()));
    }
}

}  // namespace gptcloak::cli
