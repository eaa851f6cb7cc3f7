#include <gtest/gtest.h>

#include <fstream>

#include "catgeo/io.hpp"
#include "test_util.hpp"

namespace catgeo {
namespace {

using testing::TempDir;

std::vector<std::byte> le_bytes(std::initializer_list<std::uint8_t> raw) {
    std::vector<std::byte> out;
    for (auto b : raw) out.push_back(static_cast<std::byte>(b));
    return out;
}

void write_raw(const std::filesystem::path& p, const std::vector<std::byte>& bytes) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

TEST(IoPoints, EmptyFileIsEmptyCloud) {
    TempDir dir("io");
    write_raw(dir.path() / "a.bin", {});
    EXPECT_TRUE(io::read_point_bin(dir.path() / "a.bin").empty());
}

TEST(IoPoints, SingleRecordDecodes) {
    // 1.0f, 2.0f, 3.0f, 0.5f little-endian
    const auto bytes = le_bytes({0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0x40,
                                 0x00, 0x00, 0x40, 0x40, 0x00, 0x00, 0x00, 0x3f});
    const auto cloud = io::decode_points(bytes);
    ASSERT_EQ(cloud.size(), 1u);
    EXPECT_EQ(cloud.points[0], (Point{1.0f, 2.0f, 3.0f, 0.5f}));
}

TEST(IoPoints, ZeroPointEncodesToZeroBytes) {
    PointCloud c;
    c.points.push_back({});
    const auto bytes = io::encode_points(c);
    ASSERT_EQ(bytes.size(), 16u);
    for (auto b : bytes) EXPECT_EQ(b, std::byte{0});
    EXPECT_TRUE(io::encode_points(PointCloud{}).empty());
}

TEST(IoPoints, RoundTripIsBitExact) {
    Rng rng(11);
    TempDir dir("io");
    for (std::size_t n : {0u, 1u, 10u, 1000u}) {
        const auto scene = testing::random_scene(rng, n, 6);
        io::write_point_bin(dir.path() / "c.bin", scene.cloud);
        const auto back = io::read_point_bin(dir.path() / "c.bin");
        ASSERT_EQ(back.size(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_TRUE(testing::same_bits(back.points[i], scene.cloud.points[i]));
        EXPECT_EQ(std::filesystem::file_size(dir.path() / "c.bin"), 16 * n);
    }
}

TEST(IoPoints, IntensityIsClamped) {
    PointCloud c;
    c.points = {{0, 0, 0, 1.25f}, {0, 0, 0, -0.5f}, {0, 0, 0, 0.25f}};
    const auto back = io::decode_points(io::encode_points(c));
    EXPECT_EQ(back.points[0].intensity, 1.0f);
    EXPECT_EQ(back.points[1].intensity, 0.0f);
    EXPECT_EQ(back.points[2].intensity, 0.25f);
}

TEST(IoPoints, TruncatedFileReportsPosition) {
    PointCloud c;
    c.points.resize(5);
    auto bytes = io::encode_points(c);
    bytes.resize(16 * 3 + 7);
    try {
        io::decode_points(bytes);
        FAIL() << "expected FormatError";
    } catch (const io::FormatError& e) {
        EXPECT_EQ(e.offset(), 48u);
        EXPECT_EQ(e.record(), 3u);
        EXPECT_NE(std::string(e.what()).find("byte 48"), std::string::npos);
    }
}

TEST(IoPoints, NonFiniteNamesFirstBadPoint) {
    PointCloud c;
    c.points.resize(4);
    c.points[2].y = std::numeric_limits<float>::quiet_NaN();
    c.points[3].x = std::numeric_limits<float>::infinity();
    try {
        io::decode_points(io::encode_points(c));
        FAIL() << "expected FormatError";
    } catch (const io::FormatError& e) {
        EXPECT_EQ(e.record(), 2u);
        EXPECT_EQ(e.offset(), 32u);
    }
}

TEST(IoPoints, FileErrorsCarryPath) {
    TempDir dir("io");
    write_raw(dir.path() / "bad.bin", std::vector<std::byte>(20));
    try {
        io::read_point_bin(dir.path() / "bad.bin");
        FAIL() << "expected FormatError";
    } catch (const io::FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.bin"), std::string::npos);
        EXPECT_EQ(e.record(), 1u);
    }
    EXPECT_THROW(io::read_point_bin(dir.path() / "missing.bin"), io::IoError);
}

TEST(IoLabels, DecodeRules) {
    const auto three = io::decode_labels(le_bytes({0x03, 0x00, 0x00, 0x00}), 19);
    EXPECT_EQ(three.labels, std::vector<std::uint32_t>{3});
    const auto foreign = io::decode_labels(le_bytes({0xff, 0xff, 0x01, 0x00}), 19);
    EXPECT_EQ(foreign.labels, std::vector<std::uint32_t>{kIgnoreLabel});
    // Instance bits above 16 are dropped.
    const auto inst = io::decode_labels(le_bytes({0x05, 0x00, 0x2a, 0x00}), 19);
    EXPECT_EQ(inst.labels, std::vector<std::uint32_t>{5});
    const auto out_of_range = io::decode_labels(le_bytes({0x13, 0x00, 0x00, 0x00}), 19);
    EXPECT_EQ(out_of_range.labels, std::vector<std::uint32_t>{kIgnoreLabel});
}

TEST(IoLabels, RoundTripAndRange) {
    Rng rng(5);
    TempDir dir("io");
    const auto table = ClassTable::synthetic_default();
    LabelSet labels;
    for (int i = 0; i < 500; ++i)
        labels.labels.push_back(rng.bernoulli(0.1) ? kIgnoreLabel : static_cast<std::uint32_t>(rng.below(6)));
    io::write_label_file(dir.path() / "l.label", labels);
    EXPECT_EQ(io::read_label_file(dir.path() / "l.label", table).labels, labels.labels);

    std::vector<std::byte> raw(4 * 300);
    for (auto& b : raw) b = static_cast<std::byte>(rng.below(256));
    for (auto l : io::decode_labels(raw, 6).labels) EXPECT_TRUE(l < 6 || l == kIgnoreLabel);
}

TEST(IoLabels, TruncatedReportsPosition) {
    try {
        io::decode_labels(std::vector<std::byte>(4 * 7 + 3), 6);
        FAIL() << "expected FormatError";
    } catch (const io::FormatError& e) {
        EXPECT_EQ(e.offset(), 28u);
        EXPECT_EQ(e.record(), 7u);
    }
}

TEST(IoDataset, SceneRoundTripAndOrdering) {
    Rng rng(3);
    TempDir dir("io");
    const auto table = ClassTable::synthetic_default();
    std::vector<Scene> scenes;
    for (std::string id : {"b", "a", "c"}) {
        scenes.push_back(testing::random_scene(rng, 50, 6, 40.0, id));
        io::write_scene(dir.path(), scenes.back());
    }
    const auto back = io::read_dataset(dir.path(), table);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[0].id, "a");
    EXPECT_EQ(back[1].id, "b");
    EXPECT_EQ(back[2].id, "c");
    EXPECT_EQ(back[1].labels.labels, scenes[0].labels.labels);
    for (std::size_t i = 0; i < 50; ++i)
        EXPECT_TRUE(testing::same_bits(back[1].cloud.points[i], scenes[0].cloud.points[i]));
}

TEST(IoDataset, MissingLabelFileIsAnError) {
    TempDir dir("io");
    Rng rng(1);
    std::filesystem::create_directories(dir.path() / "velodyne");
    io::write_point_bin(dir.path() / "velodyne" / "x.bin", testing::random_scene(rng, 3, 6).cloud);
    EXPECT_THROW(io::read_dataset(dir.path(), ClassTable::synthetic_default()), io::IoError);
}

TEST(IoDataset, LengthMismatchIsAnError) {
    TempDir dir("io");
    Rng rng(1);
    const auto s = testing::random_scene(rng, 3, 6, 10.0, "x");
    std::filesystem::create_directories(dir.path() / "velodyne");
    std::filesystem::create_directories(dir.path() / "labels");
    io::write_point_bin(dir.path() / "velodyne" / "x.bin", s.cloud);
    LabelSet two;
    two.labels = {0, 1};
    io::write_label_file(dir.path() / "labels" / "x.label", two);
    EXPECT_THROW(io::read_scene(dir.path(), "x", ClassTable::synthetic_default()), DimensionError);
}

TEST(IoClassTable, RoundTripAndDefault) {
    TempDir dir("io");
    EXPECT_EQ(io::read_class_table(dir.path()).names, ClassTable::synthetic_default().names);
    ClassTable t;
    t.names = {"road", "car", "pole"};
    t.accumulable = {0, 2};
    io::write_class_table(dir.path(), t);
    const auto back = io::read_class_table(dir.path());
    EXPECT_EQ(back.names, t.names);
    EXPECT_EQ(back.accumulable, t.accumulable);
}

TEST(ClassTableTest, ValidateRejectsOutOfRangeAccumulable) {
    ClassTable t;
    t.names = {"a", "b"};
    t.accumulable = {2};
    EXPECT_THROW(t.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace catgeo
