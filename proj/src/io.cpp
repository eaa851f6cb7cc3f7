#include "catgeo/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace catgeo::io {
namespace {

constexpr std::size_t kPointBytes = 16;
constexpr std::size_t kLabelBytes = 4;

std::uint32_t load_u32_le(const std::byte* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32_le(std::uint32_t v, std::byte* p) {
    p[0] = static_cast<std::byte>(v & 0xFFu);
    p[1] = static_cast<std::byte>((v >> 8) & 0xFFu);
    p[2] = static_cast<std::byte>((v >> 16) & 0xFFu);
    p[3] = static_cast<std::byte>((v >> 24) & 0xFFu);
}

float load_f32_le(const std::byte* p) { return std::bit_cast<float>(load_u32_le(p)); }
void store_f32_le(float v, std::byte* p) { store_u32_le(std::bit_cast<std::uint32_t>(v), p); }

std::vector<std::byte> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<std::byte> bytes(size);
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
        throw IoError("short read on '" + path.string() + "'");
    return bytes;
}

void dump(const std::filesystem::path& path, const std::vector<std::byte>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed on '" + path.string() + "'");
}

template <typename Fn>
auto with_path(const std::filesystem::path& path, Fn&& fn) {
    try {
        return fn();
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what(), e.offset(), e.record());
    }
}

}  // namespace

PointCloud decode_points(std::span<const std::byte> bytes) {
    if (bytes.size() % kPointBytes != 0) {
        const std::size_t whole = bytes.size() / kPointBytes;
        throw FormatError("point data length " + std::to_string(bytes.size()) +
                              " is not a multiple of 16; trailing partial record at byte " +
                              std::to_string(whole * kPointBytes) + " (point " +
                              std::to_string(whole) + ")",
                          whole * kPointBytes, whole);
    }
    PointCloud cloud;
    const std::size_t n = bytes.size() / kPointBytes;
    cloud.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::byte* rec = bytes.data() + i * kPointBytes;
        Point p{load_f32_le(rec), load_f32_le(rec + 4), load_f32_le(rec + 8), load_f32_le(rec + 12)};
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
            !std::isfinite(p.intensity)) {
            throw FormatError("non-finite value in point " + std::to_string(i) + " at byte " +
                                  std::to_string(i * kPointBytes),
                              i * kPointBytes, i);
        }
        p.intensity = std::clamp(p.intensity, 0.0f, 1.0f);
        cloud.points[i] = p;
    }
    return cloud;
}

std::vector<std::byte> encode_points(const PointCloud& cloud) {
    std::vector<std::byte> bytes(cloud.size() * kPointBytes);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        std::byte* rec = bytes.data() + i * kPointBytes;
        const auto& p = cloud.points[i];
        store_f32_le(p.x, rec);
        store_f32_le(p.y, rec + 4);
        store_f32_le(p.z, rec + 8);
        store_f32_le(p.intensity, rec + 12);
    }
    return bytes;
}

LabelSet decode_labels(std::span<const std::byte> bytes, std::size_t num_classes) {
    if (bytes.size() % kLabelBytes != 0) {
        const std::size_t whole = bytes.size() / kLabelBytes;
        throw FormatError("label data length " + std::to_string(bytes.size()) +
                              " is not a multiple of 4; trailing partial record at byte " +
                              std::to_string(whole * kLabelBytes) + " (label " +
                              std::to_string(whole) + ")",
                          whole * kLabelBytes, whole);
    }
    LabelSet out;
    const std::size_t n = bytes.size() / kLabelBytes;
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t semantic = load_u32_le(bytes.data() + i * kLabelBytes) & 0xFFFFu;
        out.labels[i] = semantic < num_classes ? semantic : kIgnoreLabel;
    }
    return out;
}

std::vector<std::byte> encode_labels(const LabelSet& labels) {
    std::vector<std::byte> bytes(labels.size() * kLabelBytes);
    for (std::size_t i = 0; i < labels.size(); ++i)
        store_u32_le(labels.labels[i], bytes.data() + i * kLabelBytes);
    return bytes;
}

PointCloud read_point_bin(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    return with_path(path, [&] { return decode_points(bytes); });
}

LabelSet read_label_file(const std::filesystem::path& path, const ClassTable& table) {
    const auto bytes = slurp(path);
    return with_path(path, [&] { return decode_labels(bytes, table.size()); });
}

void write_point_bin(const std::filesystem::path& path, const PointCloud& cloud) {
    dump(path, encode_points(cloud));
}

void write_label_file(const std::filesystem::path& path, const LabelSet& labels) {
    dump(path, encode_labels(labels));
}

Scene read_scene(const std::filesystem::path& root, const std::string& id,
                 const ClassTable& table) {
    Scene scene;
    scene.id = id;
    scene.cloud = read_point_bin(root / "velodyne" / (id + ".bin"));
    scene.labels = read_label_file(root / "labels" / (id + ".label"), table);
    if (scene.cloud.size() != scene.labels.size())
        throw DimensionError("scene '" + id + "': " + std::to_string(scene.cloud.size()) +
                             " points but " + std::to_string(scene.labels.size()) + " labels");
    return scene;
}

void write_scene(const std::filesystem::path& root, const Scene& scene) {
    std::filesystem::create_directories(root / "velodyne");
    std::filesystem::create_directories(root / "labels");
    write_point_bin(root / "velodyne" / (scene.id + ".bin"), scene.cloud);
    write_label_file(root / "labels" / (scene.id + ".label"), scene.labels);
}

std::vector<Scene> read_dataset(const std::filesystem::path& root, const ClassTable& table) {
    const auto velodyne = root / "velodyne";
    if (!std::filesystem::is_directory(velodyne))
        throw IoError("'" + velodyne.string() + "' is not a directory");
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(velodyne)) {
        if (entry.is_regular_file() && entry.path().extension() == ".bin")
            ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    std::vector<Scene> scenes;
    scenes.reserve(ids.size());
    for (const auto& id : ids) {
        if (!std::filesystem::exists(root / "labels" / (id + ".label")))
            throw IoError("no label file for scene '" + id + "' under '" + root.string() + "'");
        scenes.push_back(read_scene(root, id, table));
    }
    return scenes;
}

ClassTable read_class_table(const std::filesystem::path& root) {
    const auto path = root / "dataset.txt";
    if (!std::filesystem::exists(path)) return ClassTable::synthetic_default();
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    ClassTable table;
    std::string line;
    auto split = [](const std::string& v) {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= v.size()) {
            const auto comma = v.find(',', start);
            const auto end = comma == std::string::npos ? v.size() : comma;
            std::string item = v.substr(start, end - start);
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t\r") + 1);
            if (!item.empty()) out.push_back(item);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return out;
    };
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        key.erase(0, key.find_first_not_of(" \t"));
        const auto values = split(line.substr(eq + 1));
        if (key == "classes") {
            table.names = values;
        } else if (key == "accumulable") {
            for (const auto& v : values) table.accumulable.push_back(static_cast<std::uint32_t>(std::stoul(v)));
        }
    }
    table.validate();
    return table;
}

void write_class_table(const std::filesystem::path& root, const ClassTable& table) {
    std::filesystem::create_directories(root);
    std::ofstream out(root / "dataset.txt");
    if (!out) throw IoError("cannot write '" + (root / "dataset.txt").string() + "'");
    out << "classes = ";
    for (std::size_t c = 0; c < table.names.size(); ++c) out << (c ? "," : "") << table.names[c];
    out << "\naccumulable = ";
    for (std::size_t i = 0; i < table.accumulable.size(); ++i) out << (i ? "," : "") << table.accumulable[i];
    out << "\n";
}

}  // namespace catgeo::io
