#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "catgeo/types.hpp"

namespace catgeo::io {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file contents. `offset()` is the byte position of the problem
/// and `record()` the index of the first offending point or label.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset, std::size_t record)
        : std::runtime_error(what), offset_(offset), record_(record) {}

    std::size_t offset() const { return offset_; }
    std::size_t record() const { return record_; }

private:
    std::size_t offset_;
    std::size_t record_;
};

// Point files hold little-endian float32 quadruples (x, y, z, intensity).
// Label files hold little-endian uint32 values whose low 16 bits are the
// semantic id.

PointCloud decode_points(std::span<const std::byte> bytes);
std::vector<std::byte> encode_points(const PointCloud& cloud);
LabelSet decode_labels(std::span<const std::byte> bytes, std::size_t num_classes);
std::vector<std::byte> encode_labels(const LabelSet& labels);

PointCloud read_point_bin(const std::filesystem::path& path);
LabelSet read_label_file(const std::filesystem::path& path, const ClassTable& table);
void write_point_bin(const std::filesystem::path& path, const PointCloud& cloud);
void write_label_file(const std::filesystem::path& path, const LabelSet& labels);

/// `<root>/velodyne/<id>.bin` and `<root>/labels/<id>.label`.
Scene read_scene(const std::filesystem::path& root, const std::string& id,
                 const ClassTable& table);
void write_scene(const std::filesystem::path& root, const Scene& scene);

/// Every scene under `root`, matched by stem and sorted by id. Point files
/// without a label file are an error.
std::vector<Scene> read_dataset(const std::filesystem::path& root, const ClassTable& table);

/// `<root>/dataset.txt` with `classes = a,b,...` and `accumulable = i,j,...`.
/// Falls back to ClassTable::synthetic_default() when the file is absent.
ClassTable read_class_table(const std::filesystem::path& root);
void write_class_table(const std::filesystem::path& root, const ClassTable& table);

}  // namespace catgeo::io
