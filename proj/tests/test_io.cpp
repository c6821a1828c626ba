#include <gtest/gtest.h>

#include <unistd.h>

#include "mhdflux/io.hpp"
#include "mhdflux/synthetic.hpp"

using namespace mhdflux;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mhdflux_io_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write_raw(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
  }

  std::string read_raw(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(IoTest, FieldRoundTripIsBitExact) {
  const GridSpec grid(DomainGeometry::wall_box({1.0, 0.5, 2.0}, {true, false, true}), {8, 4, 6});
  const VectorField u = wall_compatible_field(grid, 1, 2);
  write_field(dir_ / "u.field", u, 0.25);
  double t = 0.0;
  const VectorField v = read_field<3>(dir_ / "u.field", &t);
  EXPECT_EQ(t, 0.25);
  EXPECT_TRUE(v.grid().same_layout(grid));
  for (int a = 0; a < 3; ++a) EXPECT_EQ(v.component(a), u.component(a));
  const FieldHeader h = read_field_header(dir_ / "u.field");
  EXPECT_EQ(h.shape, Shape::wall_box);
  EXPECT_EQ(h.walls, (std::array<bool, 3>{true, false, true}));
  EXPECT_EQ(h.cells, (Cells{8, 4, 6}));
  EXPECT_EQ(h.components, 3);
}

TEST_F(IoTest, DataIsLittleEndianFloat64AfterHeader) {
  const GridSpec grid(DomainGeometry::periodic_box({1, 1, 1}), {2, 1, 1});
  ScalarField f(grid);
  f(0, 0) = 1.0;
  f(0, 1) = -2.5;
  write_field(dir_ / "f.field", f);
  const std::string bytes = read_raw(dir_ / "f.field");
  const auto pos = bytes.find("data\n");
  ASSERT_NE(pos, std::string::npos);
  const std::string data = bytes.substr(pos + 5);
  ASSERT_EQ(data.size(), 16u);
  // 1.0 = 0x3FF0000000000000, -2.5 = 0xC004000000000000
  EXPECT_EQ(static_cast<unsigned char>(data[7]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(data[6]), 0xF0);
  EXPECT_EQ(static_cast<unsigned char>(data[15]), 0xC0);
  EXPECT_EQ(static_cast<unsigned char>(data[14]), 0x04);
  EXPECT_EQ(bytes.rfind("mhdflux-field 1\n", 0), 0u);
}

TEST_F(IoTest, SnapshotRoundTrip) {
  const GridSpec grid(DomainGeometry::periodic_box({1, 1, 1}), {8, 8, 8});
  const FieldSnapshot s = alfven_steady(grid, 2, 1, -1.0);
  write_snapshot(dir_ / "snap", s);
  const FieldSnapshot r = read_snapshot(dir_ / "snap");
  for (int a = 0; a < 3; ++a) {
    EXPECT_EQ(r.u.component(a), s.u.component(a));
    EXPECT_EQ(r.b.component(a), s.b.component(a));
  }
  EXPECT_EQ(r.pi.component(0), s.pi.component(0));
}

TEST_F(IoTest, RejectsMalformedFiles) {
  const GridSpec grid(DomainGeometry::periodic_box({1, 1, 1}), {2, 2, 2});
  write_field(dir_ / "ok.field", ScalarField::constant(grid, {1.0}));
  const std::string good = read_raw(dir_ / "ok.field");

  EXPECT_THROW(read_field<1>(dir_ / "missing.field"), IoError);
  write_raw(dir_ / "magic.field", "not-a-field\n");
  EXPECT_THROW(read_field<1>(dir_ / "magic.field"), IoError);
  write_raw(dir_ / "short.field", good.substr(0, good.size() - 3));
  EXPECT_THROW(read_field<1>(dir_ / "short.field"), IoError);
  write_raw(dir_ / "long.field", good + "x");
  EXPECT_THROW(read_field<1>(dir_ / "long.field"), IoError);
  EXPECT_THROW(read_field<3>(dir_ / "ok.field"), IoError);
  write_raw(dir_ / "key.field", "mhdflux-field 1\ncolour blue\ndata\n");
  EXPECT_THROW(read_field<1>(dir_ / "key.field"), IoError);
  write_raw(dir_ / "open.field", "mhdflux-field 1\ncells 1 1 1\ncomponents 1\n");
  EXPECT_THROW(read_field<1>(dir_ / "open.field"), IoError);
  write_raw(dir_ / "shape.field", "mhdflux-field 1\nshape torus\n");
  EXPECT_THROW(read_field<1>(dir_ / "shape.field"), IoError);
  EXPECT_THROW(read_snapshot(dir_ / "nowhere"), IoError);
}

TEST_F(IoTest, SnapshotGridMismatch) {
  const GridSpec a(DomainGeometry::periodic_box({1, 1, 1}), {4, 4, 4});
  const GridSpec b(DomainGeometry::periodic_box({1, 1, 1}), {2, 4, 4});
  fs::create_directories(dir_ / "mix");
  write_field(dir_ / "mix" / "u.field", VectorField(a));
  write_field(dir_ / "mix" / "b.field", VectorField(b));
  write_field(dir_ / "mix" / "pi.field", ScalarField(a));
  EXPECT_THROW(read_snapshot(dir_ / "mix"), IoError);
}
