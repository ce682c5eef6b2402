#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "devo/certificates.hpp"
#include "devo/models.hpp"
#include "devo/stepper/solver.hpp"

using namespace devo;

namespace {

WaveMesh friction_mesh(std::size_t n) { return WaveMesh(n, {0.7, 1.0}, {0.8, 1.0}); }

SolverConfig with_dt(double dt, std::size_t stride = 1)
{
  SolverConfig cfg;
  cfg.dt = dt;
  cfg.snapshot_stride = stride;
  return cfg;
}

/// Largest eigenvalue of the symmetric part of G A, i.e. the dissipation rate in the G-inner product.
double max_dissipation(const DelaySystem& sys)
{
  const Matrix r = *sys.norm.factor();
  const Matrix g = r.transpose() * r;
  const Matrix a = sys.generator.to_dense();
  const Matrix s = g * a + a.transpose() * g;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  return es.eigenvalues().maxCoeff() / g.norm();
}

} // namespace

TEST(WaveMesh, Geometry)
{
  WaveMesh mesh(9, {0.65, 1.0}, {0.75, 1.0});
  EXPECT_DOUBLE_EQ(mesh.dx(), 0.1);
  EXPECT_NEAR(mesh.x(0), 0.1, 1e-15);
  const auto o = mesh.mask(mesh.damping());
  EXPECT_EQ(std::count(o.begin(), o.end(), true), 3);
  EXPECT_NEAR(mesh.indicator(mesh.delay()).sum(), 2.0, 0.0);
  EXPECT_TRUE(mesh.delay_inside_damping());
  EXPECT_FALSE(WaveMesh(9, {0.65, 1.0}, {0.25, 0.55}).delay_inside_damping());
  EXPECT_THROW(WaveMesh(1, {0.0, 1.0}, {0.0, 1.0}), ParameterError);
  EXPECT_THROW(WaveMesh(10, {0.5, 0.4}, {0.0, 1.0}), ParameterError);
}

TEST(WaveMesh, NormsAndPoincare)
{
  for (std::size_t n : {10u, 40u, 160u}) {
    WaveMesh mesh(n, {0.7, 1.0}, {0.8, 1.0});
    const Vector e = mesh.first_eigenvector();
    EXPECT_NEAR(mesh.h1_norm2(e), 1.0, 1e-13);
    EXPECT_NEAR(e.dot(mesh.stiffness() * e), 1.0, 1e-12);
    // Rayleigh quotient of the discrete sine is (4/Δx²) sin²(πΔx/2)
    const double lambda = 1.0 / mesh.l2_norm2(e);
    EXPECT_NEAR(lambda, mesh.first_eigenvalue(), 1e-9 * lambda);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    EXPECT_LE(lambda, pi2);
    EXPECT_NEAR(lambda / pi2, 1.0, pi2 * mesh.dx() * mesh.dx() / 12.0 * 1.01);
  }
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  WaveMesh mesh(30, {0.7, 1.0}, {0.8, 1.0});
  for (int trial = 0; trial < 100; ++trial) {
    Vector u(30);
    for (auto& x : u)
      x = normal(rng);
    EXPECT_LE(mesh.l2_norm2(u), mesh.h1_norm2(u) / mesh.first_eigenvalue() * (1 + 1e-12));
  }
}

TEST(Frictional, DelayOperatorNormIsOne)
{
  auto mesh = friction_mesh(20);
  auto model = build_wave_frictional(mesh, 1.0, Coefficient::constant(0.1), DelayFunction::constant(0.5),
                                     {mesh.first_eigenvector(), Vector::Zero(20)});
  EXPECT_NEAR(model.system.channel_norm(0), 1.0, 1e-10);
  EXPECT_LE(max_dissipation(model.system), 1e-12);
  EXPECT_EQ(model.system.dim(), 40u);
  EXPECT_GT(model.system.envelope->omega, 0.0);
}

TEST(Frictional, ZeroDataStaysZero)
{
  auto mesh = friction_mesh(20);
  auto model = build_wave_frictional(mesh, 1.0, Coefficient::constant(0.3), DelayFunction::constant(0.5),
                                     {Vector::Zero(20), Vector::Zero(20)});
  auto tr = solve(model.system, 5.0, with_dt(0.01), energy_fn(model, 0.01));
  for (std::size_t j = 0; j < tr.size(); ++j) {
    EXPECT_EQ(tr.norms[j], 0.0);
    EXPECT_EQ(tr.energies[j], 0.0);
  }
}

TEST(Frictional, EigenvectorEnergyAndDecay)
{
  auto mesh = friction_mesh(40);
  auto model = build_wave_frictional(mesh, 1.0, Coefficient(), DelayFunction::constant(0.5),
                                     {mesh.first_eigenvector(), Vector::Zero(40)});
  auto tr = solve(model.system, 100.0, with_dt(0.01, 10), energy_fn(model, 0.01));
  EXPECT_NEAR(tr.energies.front(), 0.5, 1e-14);
  for (std::size_t j = 1; j < tr.size(); ++j)
    ASSERT_LE(tr.energies[j], tr.energies[j - 1] + 1e-8 * tr.energies.front());
  // oracle: the eigenvalue pair carrying the initial data, from the eigendecomposition of the generator
  const Matrix a = model.system.generator.to_dense();
  Eigen::EigenSolver<Matrix> es(a);
  const Eigen::VectorXcd c = es.eigenvectors().colPivHouseholderQr().solve(model.system.initial.cast<std::complex<double>>());
  Eigen::Index dominant = 0;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (std::abs(c(i)) * es.eigenvectors().col(i).norm() > std::abs(c(dominant)) * es.eigenvectors().col(dominant).norm())
      dominant = i;
  const double rate = fit_decay_rate(tr, 20.0);
  EXPECT_GT(rate, 0.0);
  EXPECT_NEAR(rate, -es.eigenvalues()(dominant).real(), 0.02 * rate);
}

TEST(Frictional, EmptyDampingIsNotStable)
{
  // O between grid points leaves the generator conservative
  WaveMesh mesh(9, {0.41, 0.49}, {0.41, 0.49});
  EXPECT_THROW(build_wave_frictional(mesh, 1.0, Coefficient(), DelayFunction::constant(0.5),
                                     {Vector::Zero(9), Vector::Zero(9)}),
               StabilityError);
  EXPECT_THROW(build_wave_frictional(friction_mesh(9), 0.0, Coefficient(), DelayFunction::constant(0.5),
                                     {Vector::Zero(9), Vector::Zero(9)}),
               ParameterError);
}

TEST(Energy, WindowTermClosedForm)
{
  // constant k, constant past velocity g: window(0) = ½ |k| τ ‖χ_Õ g‖²
  auto mesh = friction_mesh(20);
  const Vector g = Vector::LinSpaced(20, 0.1, 2.0);
  const double k = 0.3, tau = 0.6;
  auto model = build_wave_frictional(mesh, 1.0, Coefficient::constant(k), DelayFunction::constant(tau),
                                     {Vector::Zero(20), Vector::Zero(20)}, History::constant(g, -tau));
  HistoryBuffer buffer(Interpolation::Cubic);
  buffer.start_segment(0.0, model.system.initial);
  buffer.push(0.1, model.system.initial);
  auto e = energy_terms(model, buffer, 0.0);
  EXPECT_NEAR(e.window, 0.5 * k * tau * mesh.l2_norm2(g, mesh.delay()), 1e-13);
  EXPECT_EQ(e.kinetic, 0.0);
  EXPECT_EQ(e.elastic, 0.0);
  EXPECT_TRUE(monitor_energy_lower(e));

  // time-varying delay: ∫_{−τ(0)}^0 |k(φ⁻¹(s))| ds = k τ(0) for constant k
  auto tv = DelayFunction::sinusoid(0.5, 0.2, 1.0);
  auto model2 = build_wave_frictional(mesh, 1.0, Coefficient::constant(k), tv, {Vector::Zero(20), Vector::Zero(20)},
                                      History::constant(g, -tv.tau_bar()));
  auto e2 = energy_terms(model2, buffer, 0.0);
  EXPECT_NEAR(e2.window, 0.5 * k * tv.value(0.0) * mesh.l2_norm2(g, mesh.delay()) / (1.0 - tv.slope_bound()), 1e-12);
}

TEST(Energy, ZeroStateMonitorFalse)
{
  EnergyTerms zero;
  EXPECT_EQ(zero.total(), 0.0);
  EXPECT_FALSE(monitor_energy_lower(zero));
  EnergyTerms quad{0.3, 0.2, 0.0, 0.1};
  EXPECT_TRUE(monitor_energy_lower(quad));
}

TEST(Memory, KernelConditions)
{
  auto g = MemoryGrid::make(0.5, 1.0, 40);
  auto c = check_kernel_conditions(g);
  EXPECT_TRUE(c.all());
  EXPECT_DOUBLE_EQ(c.mu_tilde, 0.5);
  EXPECT_LE(g.tail_error(), 1e-8 * (1 + 1e-12));
  // the derivative matches a central difference and satisfies μ' <= −δμ
  for (double s = 0.1; s < g.s_max; s += 0.37) {
    const double fd = (g.mu(s + 1e-6) - g.mu(s - 1e-6)) / 2e-6;
    EXPECT_NEAR(g.mu_prime(s), fd, 1e-8);
    EXPECT_LE(g.mu_prime(s), -g.delta * g.mu(s) * (1 - 1e-15));
  }
  // trapezoid weights approximate μ̃ and are decreasing (needed for dissipativity)
  double total = 0.0;
  for (std::size_t k = 1; k <= g.m; ++k) {
    total += g.weight(k);
    if (k > 1)
      EXPECT_LT(g.weight(k), g.weight(k - 1));
  }
  total += 0.5 * g.ds() * g.mu0;
  EXPECT_NEAR(total, g.mu_tilde(), g.ds() * g.ds() / 12.0 * g.mu0 * g.delta * g.delta);
}

TEST(Memory, Rejections)
{
  try {
    MemoryGrid::make(2.0, 1.0, 40);
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("condition (ii)"), std::string::npos);
  }
  EXPECT_THROW(MemoryGrid::make(0.0, 1.0, 40), ParameterError);
  EXPECT_THROW(MemoryGrid::make(0.5, -1.0, 40), ParameterError);
  EXPECT_THROW(MemoryGrid::make(0.5, 1.0, 40, 2.0), ParameterError);
}

TEST(Memory, EtaFromConstantPastIsZero)
{
  WaveMesh mesh(10, {0.7, 1.0}, {0.7, 1.0});
  auto g = MemoryGrid::make(0.5, 1.0, 8);
  const Vector u = Vector::LinSpaced(10, -1.0, 1.0);
  const Vector eta = assemble_eta0(mesh, g, [&](double) { return u; });
  EXPECT_EQ(eta.size(), 80);
  EXPECT_EQ(eta.norm(), 0.0);
  // linear-in-time past u(t) = (1 + t) u gives η(s) = s u
  const Vector eta_lin = assemble_eta0(mesh, g, [&](double t) { return Vector((1.0 + t) * u); });
  for (std::size_t k = 1; k <= g.m; ++k)
    EXPECT_NEAR((eta_lin.segment(static_cast<Eigen::Index>(k - 1) * 10, 10) - g.node(k) * u).norm(), 0.0, 1e-13);
}

TEST(Memory, DissipativeAndDecaying)
{
  WaveMesh mesh(10, {0.7, 1.0}, {0.7, 1.0});
  auto g = MemoryGrid::make(0.5, 1.0, 20);
  auto model = build_wave_memory(mesh, g, Coefficient(), DelayFunction::constant(0.5),
                                 {mesh.first_eigenvector(), Vector::Zero(10)}, Vector::Zero(200));
  EXPECT_EQ(model.system.dim(), 220u);
  EXPECT_LE(max_dissipation(model.system), 1e-12);
  EXPECT_NEAR(model.system.channel_norm(0), 1.0, 1e-10);
  const double abscissa = spectral_abscissa(model.system.generator.to_dense());
  EXPECT_LT(abscissa, 0.0);
  auto tr = solve(model.system, 80.0, with_dt(0.01, 10), energy_fn(model, 0.01));
  for (std::size_t j = 1; j < tr.size(); ++j)
    ASSERT_LE(tr.energies[j], tr.energies[j - 1] + 1e-8 * tr.energies.front());
  const double rate = fit_decay_rate(tr, 40.0);
  EXPECT_GT(rate, 0.0);
  EXPECT_NEAR(rate, -abscissa, 0.1 * -abscissa);
  // energy equals half the squared state norm when k ≡ 0
  EXPECT_NEAR(tr.energies.back(), 0.5 * tr.norms.back() * tr.norms.back(), 1e-12 * tr.energies.front());
}

TEST(Source, PreconditionsRejected)
{
  auto mesh = friction_mesh(20);
  WaveInitial zero{Vector::Zero(20), Vector::Zero(20)};
  try {
    build_wave_source(mesh, 1.0, SourceSpec{2.0}, Coefficient::constant(1.0), DelayFunction::constant(0.5), zero);
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("||k2||_inf < a"), std::string::npos);
  }
  EXPECT_THROW(build_wave_source(mesh, 1.0, SourceSpec{2.0}, Coefficient::constant(1.5), DelayFunction::constant(0.5), zero),
               ParameterError);
  WaveMesh outside(20, {0.7, 1.0}, {0.2, 0.5});
  EXPECT_THROW(build_wave_source(outside, 1.0, SourceSpec{2.0}, Coefficient::constant(0.1), DelayFunction::constant(0.5), zero),
               ParameterError);
  // with c = 0.5 the bounded part must stay below 2a(1−c)/(2−c) = 2/3
  EXPECT_THROW(build_wave_source(mesh, 1.0, SourceSpec{2.0}, Coefficient::constant(0.8),
                                 DelayFunction::sinusoid(0.6, 0.5, 1.0), zero),
               ParameterError);
  EXPECT_NO_THROW(build_wave_source(mesh, 1.0, SourceSpec{2.0}, Coefficient::constant(0.6),
                                    DelayFunction::sinusoid(0.6, 0.5, 1.0), zero));
}

TEST(Source, ConstantsAndRadius)
{
  SourceSpec spec{2.0};
  EXPECT_NEAR(spec.growth(1.3), 1.3 * 1.3 / (2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(spec.lipschitz(1.3), 3.0 * 1.3 * 1.3 / (2.0 * std::numbers::pi), 1e-15);
  auto mesh = friction_mesh(20);
  auto model = build_wave_source(mesh, 1.0, spec, Coefficient(), DelayFunction::constant(0.5),
                                 {Vector::Zero(20), Vector::Zero(20)});
  EXPECT_DOUBLE_EQ(source_cbar(model), 1.0);
  EXPECT_NEAR(source_radius(model), std::sqrt(std::numbers::pi) / 2.0, 1e-10);
  auto decaying = build_wave_source(mesh, 1.0, spec, Coefficient::exponential(0.2, 1.0), DelayFunction::constant(0.5),
                                    {Vector::Zero(20), Vector::Zero(20)});
  // C̄ = exp(2(0.2 e^{−0.5} + 0.2))
  EXPECT_NEAR(source_cbar(decaying), std::exp(2.0 * (0.2 * std::exp(-0.5) + 0.2)), 1e-9);
}

TEST(Source, ZeroDataStaysZero)
{
  auto mesh = friction_mesh(20);
  auto model = build_wave_source(mesh, 1.0, SourceSpec{2.0}, Coefficient::constant(0.3), DelayFunction::constant(0.5),
                                 {Vector::Zero(20), Vector::Zero(20)});
  std::vector<bool> monitor;
  auto tr = solve(model.system, 3.0, with_dt(0.01), energy_fn(model, 0.01), [&](double t, const Vector&, const HistoryBuffer& b) {
    monitor.push_back(monitor_energy_lower(model, b, t, 0.01));
  });
  for (std::size_t j = 0; j < tr.size(); ++j) {
    EXPECT_EQ(tr.norms[j], 0.0);
    EXPECT_EQ(tr.energies[j], 0.0);
  }
  ASSERT_FALSE(monitor.empty());
  for (bool m : monitor)
    EXPECT_FALSE(m);
}

TEST(Source, GateauxDerivativeFiniteDifferences)
{
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  WaveMesh mesh(20, {0.7, 1.0}, {0.8, 1.0});
  const auto nl = SourceSpec{2.0}.nonlinearity(20, mesh.dx());
  for (int trial = 0; trial < 20; ++trial) {
    Vector u(40), v(40);
    for (auto& x : u)
      x = normal(rng);
    for (auto& x : v)
      x = normal(rng);
    v.tail(20).setZero();
    const double exact = mesh.dx() * nl.gradient(u.head(20)).dot(v.head(20));
    double prev_err = 0.0;
    for (double h : {1e-2, 5e-3, 2.5e-3}) {
      const double fd = (nl.potential(u + h * v) - nl.potential(u)) / h;
      const double err = std::abs(fd - exact);
      if (prev_err > 0.0) {
        const double order = std::log2(prev_err / err);
        EXPECT_NEAR(order, 1.0, 0.1);
      }
      prev_err = err;
    }
  }
}

TEST(Source, PotentialMajorantAndLipschitz)
{
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(0.01, 3.0);
  WaveMesh mesh(25, {0.7, 1.0}, {0.8, 1.0});
  for (double mu : {0.5, 1.0, 2.0, 3.0}) {
    SourceSpec spec{mu};
    const auto nl = spec.nonlinearity(25, mesh.dx());
    for (int trial = 0; trial < 50; ++trial) {
      Vector x = Vector::Zero(50), y = Vector::Zero(50);
      for (Eigen::Index j = 0; j < 25; ++j) {
        x(j) = normal(rng);
        y(j) = normal(rng);
      }
      x *= scale(rng);
      y *= scale(rng);
      const double rx = std::sqrt(mesh.h1_norm2(x.head(25)));
      const double ry = std::sqrt(mesh.h1_norm2(y.head(25)));
      EXPECT_LE(std::abs(nl.potential(x)), 0.5 * spec.growth(rx) * rx * rx * (1 + 1e-12));
      const double diff = std::sqrt(mesh.l2_norm2(nl.gradient(x.head(25)) - nl.gradient(y.head(25))));
      EXPECT_LE(diff, spec.lipschitz(std::max(rx, ry)) * std::sqrt(mesh.h1_norm2(x.head(25) - y.head(25))) * (1 + 1e-12));
      EXPECT_LE(std::sqrt(mesh.l2_norm2(nl.gradient(x.head(25)))), spec.growth(rx) * rx * (1 + 1e-12));
    }
  }
}

TEST(Source, InitialEnergyBelowMajorant)
{
  auto mesh = friction_mesh(20);
  const double tau = 0.5;
  const Vector g = 0.2 * Vector::Ones(20);
  for (double amp : {0.05, 0.2, 0.5}) {
    WaveInitial init{amp * mesh.first_eigenvector(), 0.5 * amp * mesh.first_eigenvector()};
    auto model = build_wave_source(mesh, 1.0, SourceSpec{2.0}, Coefficient::exponential(0.2, 1.0),
                                   DelayFunction::constant(tau), init, History::constant(g, -tau));
    HistoryBuffer buffer(Interpolation::Cubic);
    buffer.start_segment(0.0, model.system.initial);
    buffer.push(0.1, model.system.initial);
    const auto e = energy_terms(model, buffer, 0.0);
    ASSERT_LT(SourceSpec{2.0}.growth(std::sqrt(mesh.h1_norm2(init.u0))), 0.5);
    EXPECT_LE(e.total(), initial_energy_majorant(model) * (1 + 1e-10));
    EXPECT_GT(e.total(), 0.0);
    // the window closed form: ½ ∫_{−τ}^0 0.2 e^{−(s+τ)} ds ‖χg‖² = ½·0.2(1 − e^{−τ})‖χg‖²
    EXPECT_NEAR(e.window, 0.5 * 0.2 * (1.0 - std::exp(-tau)) * mesh.l2_norm2(g, mesh.delay()), 1e-10);
  }
}

TEST(Source, SmallDataEnergyBound)
{
  auto mesh = friction_mesh(20);
  const double tau = 0.5;
  WaveInitial init{0.3 * mesh.first_eigenvector(), Vector::Zero(20)};
  KSplit split{Coefficient::exponential(0.2, 1.0), Coefficient()};
  auto model = build_wave_source(mesh, 1.0, SourceSpec{2.0}, split, DelayFunction::constant(tau), init);
  const double rho = source_radius(model);
  ASSERT_LT(small_data_measure(model), rho * rho);
  const double cb = source_cbar(model);
  bool monitor = true;
  auto tr = solve(model.system, 10.0, with_dt(0.005), energy_fn(model, 0.005),
                  [&](double t, const Vector&, const HistoryBuffer& b) { monitor = monitor && monitor_energy_lower(model, b, t, 0.005); });
  const double e0 = tr.energies.front();
  for (std::size_t j = 0; j < tr.size(); ++j)
    ASSERT_LE(tr.energies[j], cb * e0 * (1 + 1e-6)) << "t=" << tr.times[j];
  EXPECT_TRUE(monitor);
}
