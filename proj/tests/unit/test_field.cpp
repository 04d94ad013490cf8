// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include "glfem/errors.hpp"
#include "glfem/field.hpp"
#include "test_util.hpp"

namespace glfem
{
namespace
{

using test::random_field;
constexpr double pi = std::numbers::pi;

std::string slurp(const std::string &path)
{
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string temp_path(const std::string &name)
{
  return (std::filesystem::temp_directory_path() / ("glfem_field_" + name)).string();
}

TEST(ComplexField, ValidatesLengthsAndValues)
{
  MeshPtr m = make_mesh(2);
  EXPECT_THROW(ComplexField(m, Eigen::VectorXd::Zero(8), Eigen::VectorXd::Zero(9)),
               std::invalid_argument);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(9);
  bad(3) = std::nan("");
  EXPECT_THROW(ComplexField(m, bad, Eigen::VectorXd::Zero(9)), std::domain_error);
}

TEST(ComplexField, TimesIAndRotation)
{
  const ComplexField u = random_field(make_mesh(3), 1);
  const ComplexField iu = u.times_i();
  const ComplexField r = u.rotated(pi / 2);
  EXPECT_LT(test::max_abs(iu.re() - r.re()), 1e-15);
  EXPECT_LT(test::max_abs(iu.im() - r.im()), 1e-15);
  EXPECT_EQ(iu.re(), -u.im());
  EXPECT_EQ(iu.im(), u.re());
}

TEST(Interpolate, UnitModulusConstant)
{
  const ComplexField u = interpolate([](double, double) { return std::complex<double>(0.8, 0.6); },
                                     make_mesh(5));
  EXPECT_LT(test::max_abs(u.modulus().array() - 1.0), 1e-15);
}

TEST(Interpolate, ZeroFunction)
{
  const ComplexField u = interpolate([](double, double) { return std::complex<double>(); },
                                     make_mesh(3));
  EXPECT_EQ(u.re().squaredNorm() + u.im().squaredNorm(), 0.0);
}

TEST(Interpolate, LinearFunctionIsReproduced)
{
  MeshPtr m = make_mesh(4);
  const ComplexField u = interpolate([](double x, double) { return std::complex<double>(x); }, m);
  EXPECT_EQ(u.re(), m->nodes().col(0));
  // At an interior point the P1 function equals x as well.
  const Eigen::Index t = m->locate(0.37, 0.81);
  const Eigen::Vector3d lam = m->barycentric(t, 0.37, 0.81);
  double value = 0.0;
  for (int a = 0; a < 3; ++a)
  {
    value += lam(a) * u.re()(m->triangles()(t, a));
  }
  EXPECT_NEAR(value, 0.37, 1e-15);
}

TEST(Interpolate, RejectsNonFiniteValues)
{
  EXPECT_THROW(interpolate([](double x, double) { return std::complex<double>(1.0 / (x - 0.5)); },
                           make_mesh(2)),
               std::domain_error);
}

TEST(Prolong, ConstantStaysConstant)
{
  const ComplexField u = ComplexField::constant(make_mesh(2), {0.3, -0.4});
  const ComplexField f = prolong(u, make_mesh(8));
  EXPECT_LT(test::max_abs(f.re().array() - 0.3), 1e-15);
  EXPECT_LT(test::max_abs(f.im().array() + 0.4), 1e-15);
}

TEST(Prolong, LinearFieldKeepsNorms)
{
  const auto x = [](double x, double) { return std::complex<double>(x); };
  const ComplexField u = interpolate(x, make_mesh(2));
  const ComplexField f = prolong(u, make_mesh(4));
  EXPECT_LT(test::max_abs(f.re() - interpolate(x, make_mesh(4)).re()), 1e-15);
  const NormReport a = norms(u, 3.0), b = norms(f, 3.0);
  EXPECT_NEAR(a.l2, b.l2, 1e-14);
  EXPECT_NEAR(a.h1_semi, b.h1_semi, 1e-14);
  EXPECT_NEAR(a.hk1, b.hk1, 1e-14);
}

TEST(Prolong, RandomFieldKeepsAllNorms)
{
  const ComplexField u = random_field(make_mesh(4), 11);
  const ComplexField f = prolong(u, make_mesh(16));
  const NormReport a = norms(u, 8.0), b = norms(f, 8.0);
  EXPECT_NEAR(b.l2, a.l2, 1e-13 * a.l2);
  EXPECT_NEAR(b.h1_semi, a.h1_semi, 1e-12 * a.h1_semi);
  EXPECT_NEAR(b.hk1, a.hk1, 1e-12 * a.hk1);
  // The L^4 entry is exact for P1 data; p = 3, 6 are quadrature approximations.
  EXPECT_NEAR(b.lp.at(4), a.lp.at(4), 1e-12 * a.lp.at(4));
}

TEST(Prolong, RejectsNonNestedMeshes)
{
  const ComplexField u = random_field(make_mesh(4), 2);
  EXPECT_THROW(prolong(u, make_mesh(6)), NotNestedError);
  EXPECT_THROW(restrict_interpolate(u, make_mesh(3)), NotNestedError);
}

TEST(Restrict, RoundTripIsExact)
{
  const ComplexField u = random_field(make_mesh(4), 3);
  const ComplexField back = restrict_interpolate(prolong(u, make_mesh(32)), make_mesh(4));
  EXPECT_EQ(back.re(), u.re());
  EXPECT_EQ(back.im(), u.im());
}

TEST(Restrict, ConstantStaysConstant)
{
  const ComplexField u = ComplexField::constant(make_mesh(16), {0.8, 0.6});
  const ComplexField c = restrict_interpolate(u, make_mesh(4));
  EXPECT_LT(test::max_abs(c.re().array() - 0.8), 1e-15);
  EXPECT_LT(test::max_abs(c.im().array() - 0.6), 1e-15);
}

TEST(Restrict, MatchesDirectInterpolation)
{
  const auto f = [](double x, double) { return std::complex<double>(std::sin(pi * x)); };
  const ComplexField c = restrict_interpolate(interpolate(f, make_mesh(64)), make_mesh(8));
  const ComplexField direct = interpolate(f, make_mesh(8));
  EXPECT_LT(test::max_abs(c.re() - direct.re()), 1e-15);
}

TEST(Norms, Constant)
{
  const NormReport r = norms(ComplexField::constant(make_mesh(4), 1.0), 8.0);
  EXPECT_NEAR(r.l2, 1.0, 1e-14);
  EXPECT_NEAR(r.h1_semi, 0.0, 1e-14);
  EXPECT_NEAR(r.hk1, 8.0, 1e-13);
}

TEST(Norms, LinearFunction)
{
  const NormReport r =
      norms(interpolate([](double x, double) { return std::complex<double>(x); }, make_mesh(4)), 0.0);
  EXPECT_NEAR(r.l2, 1.0 / std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(r.h1_semi, 1.0, 1e-14);
  EXPECT_NEAR(r.hk1, 1.0, 1e-14);
}

TEST(Norms, UnitModulusL4)
{
  const NormReport r = norms(ComplexField::constant(make_mesh(4), {0.8, 0.6}), 1.0);
  EXPECT_NEAR(r.lp.at(4), 1.0, 1e-14);
  EXPECT_NEAR(r.lp.at(3), 1.0, 1e-14);
  EXPECT_NEAR(r.lp.at(6), 1.0, 1e-14);
}

TEST(Norms, KappaNormIdentity)
{
  for (double kappa : {0.0, 1.0, 8.0, 24.0})
  {
    for (unsigned seed : {1u, 2u, 3u})
    {
      const NormReport r = norms(random_field(make_mesh(6), seed), kappa);
      const double lhs = r.hk1 * r.hk1, rhs = r.h1_semi * r.h1_semi + kappa * kappa * r.l2 * r.l2;
      EXPECT_NEAR(lhs, rhs, 1e-13 * rhs);
    }
  }
}

TEST(ComplexInner, MatchesNorm)
{
  const ComplexField u = random_field(make_mesh(5), 4);
  const std::complex<double> uu = complex_inner(u, u);
  EXPECT_NEAR(uu.real(), std::pow(norms(u, 0.0).l2, 2), 1e-14);
  EXPECT_NEAR(uu.imag(), 0.0, 1e-15);
  const ComplexField v = random_field(make_mesh(5), 5);
  const std::complex<double> uv = complex_inner(u, v), vu = complex_inner(v, u);
  EXPECT_NEAR(std::abs(uv - std::conj(vu)), 0.0, 1e-15);
}

TEST(AlignPhase, IdenticalFields)
{
  const ComplexField u = random_field(make_mesh(4), 6);
  const PhaseAlignment a = align_phase(u, u);
  EXPECT_NEAR(a.phi, 0.0, 1e-15);
  EXPECT_LT(test::max_abs(a.aligned.re() - u.re()), 1e-15);
}

TEST(AlignPhase, UndoesRotation)
{
  const ComplexField u = random_field(make_mesh(4), 7);
  for (double theta : {0.3, 2.0, -2.9, 3.1})
  {
    const PhaseAlignment a = align_phase(u.rotated(theta), u);
    EXPECT_NEAR(std::remainder(a.phi + theta, 2 * pi), 0.0, 1e-13);
    EXPECT_LT(test::max_abs(a.aligned.re() - u.re()), 1e-13);
    EXPECT_LT(test::max_abs(a.aligned.im() - u.im()), 1e-13);
  }
}

TEST(AlignPhase, GridScanConfirmsMinimizer)
{
  const ComplexField v = random_field(make_mesh(4), 8);
  const ComplexField u = v.rotated(1.234) + 0.3 * random_field(make_mesh(4), 9);
  const PhaseAlignment a = align_phase(u, v);
  const double best = norms(a.aligned - v, 0.0).l2;
  const int samples = 10000;
  double scan_min = 1e300, scan_phi = 0.0;
  for (int s = 0; s < samples; ++s)
  {
    const double phi = -pi + 2 * pi * s / samples;
    const double e = norms(u.rotated(phi) - v, 0.0).l2;
    if (e < scan_min)
    {
      scan_min = e;
      scan_phi = phi;
    }
  }
  EXPECT_LE(best, scan_min + 1e-14);
  EXPECT_NEAR(std::remainder(a.phi - scan_phi, 2 * pi), 0.0, 2 * pi / samples);
}

TEST(AlignPhase, PurelyImaginaryOverlap)
{
  const ComplexField v = random_field(make_mesh(4), 10);
  const PhaseAlignment a = align_phase(v.times_i(), v);
  EXPECT_NEAR(std::abs(a.phi), pi / 2, 1e-14);
}

TEST(AlignPhase, OrthogonalToGaugeDirection)
{
  const ComplexField v = random_field(make_mesh(5), 12);
  const ComplexField u = random_field(make_mesh(5), 13);
  const PhaseAlignment a = align_phase(u, v);
  const double m = complex_inner(a.aligned, v.times_i()).real();
  EXPECT_LE(std::abs(m), 1e-12 * norms(a.aligned, 0).l2 * norms(v, 0).l2);
  EXPECT_GE(complex_inner(a.aligned, v).real(), 0.0);
}

TEST(AlignPhase, UndefinedForOrthogonalFields)
{
  MeshPtr m = make_mesh(2);
  EXPECT_THROW(align_phase(ComplexField::zero(m), random_field(m, 1)), AlignmentUndefined);
}

TEST(FieldFile, RoundTripIsExact)
{
  const ComplexField u = random_field(make_mesh(6), 14, 1.0 / 3.0);
  const std::string path = temp_path("roundtrip.field");
  write_field(path, u, 8.5);
  const FieldFile f = read_field(path);
  EXPECT_EQ(f.kappa, 8.5);
  EXPECT_EQ(f.field.mesh().subdivisions(), 6);
  EXPECT_EQ(f.field.re(), u.re());
  EXPECT_EQ(f.field.im(), u.im());
  std::filesystem::remove(path);
}

TEST(FieldFile, WritingIsDeterministic)
{
  const ComplexField u = random_field(make_mesh(5), 15);
  const std::string a = temp_path("a.field"), b = temp_path("b.field");
  write_field(a, u, 2.0);
  write_field(b, u, 2.0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a).substr(0, 14), "n=5 kappa=2\n0,");
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(FieldFile, RejectsMalformedInput)
{
  const std::string path = temp_path("bad.field");
  {
    std::ofstream out(path);
    out << "n=1 kappa=2\n0,0,0,1,0\n1,1,0,abc,0\n";
  }
  EXPECT_THROW(read_field(path), FormatError);
  {
    std::ofstream out(path);
    out << "kappa=2\n";
  }
  EXPECT_THROW(read_field(path), FormatError);
  {
    std::ofstream out(path);
    out << "n=1 kappa=2\n0,0,0,1,0\n";
  }
  EXPECT_THROW(read_field(path), FormatError);
  std::filesystem::remove(path);
  EXPECT_THROW(read_field(path), FormatError);
}

}  // namespace
}  // namespace glfem
