#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "plenreg/groundtruth.hpp"

using namespace plenreg;

namespace {

std::string fixture(const std::string& name) {
  return read_file(std::string(PLENREG_FIXTURES) + "/" + name);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::InvalidArgument;
}

Eigen::Matrix3d rz(double deg) {
  return Eigen::AngleAxisd(deg2rad(deg), Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

MarkerPlate unit_plate(const Eigen::Vector3d& p2) {
  return MarkerPlate{p2 + Eigen::Vector3d(0, 1, 0), p2 + Eigen::Vector3d(1, 1, 0), p2,
                     p2 + Eigen::Vector3d(1, 0, 0), Eigen::Vector3d::Zero()};
}

}  // namespace

TEST(ViconCsv, GoldenFixture) {
  const std::string bytes = fixture("vicon_3row.csv");
  const ViconData d = parse_vicon_csv(bytes);
  ASSERT_EQ(d.streams.size(), 1u);
  const ViconStream& s = d.stream("cam0");
  ASSERT_EQ(s.entries.size(), 3u);
  EXPECT_EQ(s.entries[0].index, 1);
  EXPECT_FALSE(s.entries[1].sample.has_value());
  ASSERT_TRUE(s.entries[2].sample.has_value());

  // Helical (0, 0, 90 deg) mirrored across y is a -90 deg turn about z.
  const ViconSample& a = *s.entries[0].sample;
  EXPECT_LT((a.rotation - rz(-90.0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(a.position, Eigen::Vector3d(100.5, 20.0, 1500.0));
  EXPECT_EQ(a.pose().parent(), kViconFrame);
  EXPECT_EQ(a.pose().child(), FrameId("cam0"));

  const ViconSample& c = *s.entries[2].sample;
  const Eigen::Matrix3d rx10 = Eigen::AngleAxisd(deg2rad(10.0), Eigen::Vector3d::UnitX()).toRotationMatrix();
  const Eigen::Matrix3d M = Eigen::Vector3d(1, -1, 1).asDiagonal();
  EXPECT_LT((c.rotation - M * rx10 * M).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(c.position, Eigen::Vector3d(101.25, 20.5, 1499.75));

  EXPECT_EQ(serialize_vicon_csv(d), bytes);
}

TEST(ViconCsv, ByteStableVariants) {
  const std::string crlf = "Frame,cam0_RX,cam0_RY,cam0_RZ,cam0_TX,cam0_TY,cam0_TZ\r\n"
                           "5, 0.0 ,0,0,1e2,2,3\r\n7,0,0,0,1,2,3";
  EXPECT_EQ(serialize_vicon_csv(parse_vicon_csv(crlf)), crlf);
  const std::string header_only = "Frame,cam0_RX,cam0_RY,cam0_RZ,cam0_TX,cam0_TY,cam0_TZ\n";
  const ViconData h = parse_vicon_csv(header_only);
  ASSERT_EQ(h.streams.size(), 1u);
  EXPECT_TRUE(h.streams[0].entries.empty());
  EXPECT_EQ(serialize_vicon_csv(h), header_only);
}

TEST(ViconCsv, Errors) {
  const std::string head = "Frame,cam0_RX,cam0_RY,cam0_RZ,cam0_TX,cam0_TY,cam0_TZ\n";
  EXPECT_EQ(code_of([&] { parse_vicon_csv(head + "2,0,0,0,1,2,3\n1,0,0,0,1,2,3\n"); }), ErrorCode::MalformedCsv);
  EXPECT_EQ(code_of([&] { parse_vicon_csv(head + "1,0,0,0,1,2\n"); }), ErrorCode::MalformedCsv);
  EXPECT_EQ(code_of([&] { parse_vicon_csv(head + "1,0,0,x,1,2,3\n"); }), ErrorCode::MalformedCsv);
  EXPECT_EQ(code_of([&] { parse_vicon_csv("Time,cam0_RX\n"); }), ErrorCode::MalformedCsv);
  EXPECT_EQ(code_of([&] { parse_vicon_csv("Frame,cam0_RX,cam0_RY,cam0_RZ,cam0_TX,cam0_TY\n"); }),
            ErrorCode::MalformedCsv);
  const ViconData d = parse_vicon_csv(head);
  EXPECT_EQ(code_of([&] { d.stream("cam1"); }), ErrorCode::UnknownObject);

  ViconSchema strict;
  strict.objects = {"cam1"};
  strict.strict = true;
  EXPECT_EQ(code_of([&] { parse_vicon_csv(head, strict); }), ErrorCode::UnknownObject);
  strict.strict = false;
  EXPECT_FALSE(parse_vicon_csv(head, strict).warnings.empty());
}

TEST(ViconCsv, SchemaVariants) {
  ViconSchema s;
  s.rotation = RotationEncoding::Quaternion;
  s.column_pattern = "{object}:{field}";
  s.position_scale = 1000.0;
  s.handedness_axis = 'x';
  const std::string csv = "Frame,plate:QW,plate:QX,plate:QY,plate:QZ,plate:TX,plate:TY,plate:TZ\n"
                          "1,0.7071067811865476,0,0,0.7071067811865476,0.1,0.2,0.3\n";
  const ViconData d = parse_vicon_csv(csv, s);
  const ViconSample& a = *d.stream("plate").entries[0].sample;
  const Eigen::Matrix3d M = Eigen::Vector3d(-1, 1, 1).asDiagonal();
  EXPECT_LT((a.rotation - M * rz(90.0) * M).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a.position - Eigen::Vector3d(-100.0, 200.0, 300.0)).norm(), 1e-12);

  const ViconSchema back = vicon_schema_from_toml(vicon_schema_to_toml(s));
  EXPECT_EQ(back.column_pattern, s.column_pattern);
  EXPECT_EQ(back.rotation, s.rotation);
  EXPECT_EQ(back.position_scale, s.position_scale);
  EXPECT_EQ(back.handedness_axis, 'x');
  EXPECT_EQ(code_of([&] { vicon_schema_from_toml("bogus = 1\n"); }), ErrorCode::ConfigError);
}

TEST(ViconCsv, RotationEncodingsRoundTrip) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (RotationEncoding enc : {RotationEncoding::Helical, RotationEncoding::EulerXyz, RotationEncoding::Quaternion}) {
    for (bool deg : {true, false}) {
      ViconSchema s;
      s.rotation = enc;
      s.angles_in_degrees = deg;
      for (int i = 0; i < 20; ++i) {
        const Eigen::Matrix3d R = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
        EXPECT_LT((rotation_from_vicon(rotation_to_vicon(R, s), s) - R).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
  const Eigen::Vector3d abc(0.1, -0.4, 0.7);
  const Eigen::Matrix3d expected = Eigen::AngleAxisd(0.1, Eigen::Vector3d::UnitX()).toRotationMatrix() *
                                   Eigen::AngleAxisd(-0.4, Eigen::Vector3d::UnitY()).toRotationMatrix() *
                                   Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  EXPECT_LT((rotation_from_euler_xyz(abc) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((euler_xyz_from_rotation(expected) - abc).norm(), 1e-12);
}

TEST(Handedness, MirrorIsAnInvolution) {
  const Posed p("vicon", "cam0", so3_exp(Eigen::Vector3d(0.3, -0.1, 0.2)), {1.0, 2.0, 3.0});
  for (char axis : {'x', 'y', 'z'}) {
    const Posed m = convert_handedness(p, axis);
    EXPECT_TRUE(is_rotation(m.rotation()));
    EXPECT_LT((convert_handedness(m, axis).matrix() - p.matrix()).cwiseAbs().maxCoeff(), 1e-15);
  }
  const Posed y = convert_handedness(p, 'y');
  EXPECT_EQ(y.translation(), Eigen::Vector3d(1.0, -2.0, 3.0));
  // Angle is preserved; the axis is mirrored and the sense reversed.
  EXPECT_NEAR(rotation_angle_deg(y.rotation()), rotation_angle_deg(p.rotation()), 1e-12);
  const Eigen::Vector3d w = so3_log(Eigen::Matrix3d(y.rotation()));
  EXPECT_LT((w - Eigen::Vector3d(-0.3, -0.1, -0.2)).norm(), 1e-12);
  EXPECT_THROW(convert_handedness(p, 'q'), Error);
}

TEST(Sync, FactorEight) {
  ViconStream s{"cam0", {}};
  for (int i = 0; i < 100; ++i) {
    ViconEntry e{1000 + i, std::nullopt};
    if (i % 3 != 0) e.sample = ViconSample{1000 + i, "cam0", Eigen::Vector3d(i, 0, 0), Eigen::Matrix3d::Identity()};
    s.entries.push_back(e);
  }
  const auto f = sync_frames(s, 12, 8);
  ASSERT_EQ(f.size(), 12u);
  for (int k = 0; k < 12; ++k) {
    EXPECT_EQ(f[static_cast<std::size_t>(k)].row, 8 * k);
    EXPECT_EQ(f[static_cast<std::size_t>(k)].index, 1000 + 8 * k);
    EXPECT_EQ(f[static_cast<std::size_t>(k)].pose.has_value(), (8 * k) % 3 != 0);
  }
  const auto g = sync_frames(s, 3, 8, 5);
  EXPECT_EQ(g[2].row, 21);
  EXPECT_EQ(code_of([&] { sync_frames(s, 14, 8); }), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(sync_frames(s, 13, 8, 3).back().row, 99);
}

TEST(Plate, UnitSquareIsIdentity) {
  const Eigen::Vector3d p2(12.0, -7.0, 30.0);
  const Posed f = plate_frame(unit_plate(p2));
  EXPECT_EQ(f.rotation(), Eigen::Matrix3d::Identity());
  EXPECT_EQ(f.translation(), p2);
  EXPECT_EQ(f.parent(), kViconFrame);
  EXPECT_EQ(f.child(), FrameId("plate"));
}

TEST(Plate, RotationEquivariance) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  MarkerPlate base{{3.0, 205.0, 1.0}, {301.0, 198.0, -2.0}, {0.0, 0.0, 0.0}, {299.0, 4.0, 0.5}, Eigen::Vector3d::Zero()};
  const Posed f0 = plate_frame(base);
  for (int i = 0; i < 10; ++i) {
    const Eigen::Matrix3d Q = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
    const Eigen::Vector3d t(n(rng) * 100.0, n(rng) * 100.0, n(rng) * 100.0);
    MarkerPlate m = base;
    for (Eigen::Vector3d* p : {&m.P0, &m.P1, &m.P2, &m.P3}) *p = Q * *p + t;
    const Posed f = plate_frame(m);
    EXPECT_LT((f.rotation() - Q * f0.rotation()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((f.translation() - (Q * f0.translation() + t)).norm(), 1e-10);
  }
  const MarkerPlate r30{rz(30.0) * Eigen::Vector3d(0, 1, 0), rz(30.0) * Eigen::Vector3d(1, 1, 0),
                        Eigen::Vector3d::Zero(), rz(30.0) * Eigen::Vector3d(1, 0, 0), Eigen::Vector3d::Zero()};
  EXPECT_LT((plate_frame(r30).rotation() - rz(30.0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Plate, DegenerateAndValidation) {
  MarkerPlate m = unit_plate(Eigen::Vector3d::Zero());
  m.P3 = m.P2;
  EXPECT_EQ(code_of([&] { plate_frame(m); }), ErrorCode::CollinearMarkers);
  m = unit_plate(Eigen::Vector3d::Zero());
  m.P0 = Eigen::Vector3d(2.0, 0.0, 0.0);
  EXPECT_EQ(code_of([&] { plate_frame(m); }), ErrorCode::CollinearMarkers);

  MarkerPlate plate{{0, 200, 0}, {300, 200, 0}, {0, 0, 0}, {300, 0, 0}, Eigen::Vector3d::Zero()};
  const PlateCheck check{{300.0, 200.0, 0.0}, 5.0};
  EXPECT_NO_THROW(plate_frame(plate, check));
  plate.P1 += Eigen::Vector3d(0.0, 10.0, 0.0);
  EXPECT_EQ(code_of([&] { plate_frame(plate, check); }), ErrorCode::ValidationFailed);
  plate.P1 = Eigen::Vector3d(300.0, 200.0, 4.0);
  EXPECT_NO_THROW(plate_frame(plate, check));
}

TEST(Plate, CommonFrameRoundTrip) {
  const MarkerPlate m{{10, 210, 5}, {310, 210, 5}, {10, 10, 5}, {310, 10, 5}, {1.0, -2.0, 3.0}};
  const Posed plate = plate_frame(m);
  const Posed pose("vicon", "cam0", so3_exp(Eigen::Vector3d(0.2, 0.1, -0.3)), {500.0, 60.0, 1000.0});
  const Posed w = to_common_frame(pose, plate, m.aruco_to_vicon_offset);
  EXPECT_EQ(w.parent(), kWorldFrame);
  EXPECT_EQ(w.child(), FrameId("cam0"));
  // The plate translation plus offset is the world origin.
  EXPECT_LT((w.translation() - (pose.translation() - Eigen::Vector3d(11.0, 8.0, 8.0))).norm(), 1e-12);
  EXPECT_LT((from_common_frame(w, plate, m.aruco_to_vicon_offset).matrix() - pose.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Plate, JsonRoundTrip) {
  const MarkerPlate m{{0, 200, 0}, {300, 200, 0}, {0, 0, 0}, {300, 0, 0}, {1.5, 2.5, 3.5}};
  const PlateCheck c{{300, 200, 0}, 4.0};
  const json j = marker_plate_to_json(m, c);
  const MarkerPlate b = marker_plate_from_json(j);
  EXPECT_EQ(b.P1, m.P1);
  EXPECT_EQ(b.aruco_to_vicon_offset, m.aruco_to_vicon_offset);
  EXPECT_EQ(plate_check_from_json(j)->tolerance_mm, 4.0);
  json missing = j;
  missing.erase("aruco_to_vicon_offset");
  EXPECT_EQ(code_of([&] { marker_plate_from_json(missing); }), ErrorCode::MissingField);
}
