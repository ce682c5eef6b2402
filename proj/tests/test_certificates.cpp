#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "devo/certificates.hpp"
#include "devo/models/scalar.hpp"
#include "devo/stepper/solver.hpp"
#include "random_systems.hpp"

using namespace devo;

namespace {

DelaySystem scalar(double k, const DelayFunction& tau, double history = 0.0, double u0 = 1.0)
{
  return build_scalar_dde(1.0, Coefficient::constant(k), tau, History::constant(Vector::Constant(1, history), -tau.tau_bar()),
                          u0);
}

SolverConfig with_dt(double dt)
{
  SolverConfig cfg;
  cfg.dt = dt;
  return cfg;
}

} // namespace

TEST(PhiInverse, Examples)
{
  EXPECT_DOUBLE_EQ(phi_inverse(DelayFunction::constant(0.4), 2.0), 2.4);
  EXPECT_NEAR(phi_inverse(DelayFunction::sinusoid(0.5, 0.25, 1.0), 0.0), 0.651618523135209, 1e-10);
  EXPECT_NEAR(phi_inverse(DelayFunction::sinusoid(0.5, 0.25, 1.0), -0.5), 0.0, 1e-12);
}

TEST(Certificate, ScalarConstantDelay)
{
  auto sys = scalar(0.2, DelayFunction::constant(0.5));
  const double slope = 0.2 * std::exp(0.5);
  for (double t : {0.5, 3.0, 17.0})
    EXPECT_NEAR(cert_lhs(sys, t), slope * t, 1e-12 * slope * t);
  auto c = check_decay_certificate(sys, 0.33, 50.0);
  EXPECT_EQ(c.gamma, 0.0);
  EXPECT_TRUE(c.holds);
  EXPECT_TRUE(c.holds_asymptotic);
  EXPECT_NEAR(c.predicted_rate, 1.0 - 0.33, 1e-15);
  EXPECT_NEAR(c.tail_slope, slope, 1e-9);

  // below the slope the finite-horizon γ grows linearly and the tail verdict fails
  auto tight = check_decay_certificate(sys, 0.3, 50.0);
  EXPECT_NEAR(tight.gamma, (slope - 0.3) * 50.0, 1e-9);
  EXPECT_FALSE(tight.holds_asymptotic);
}

TEST(Certificate, ZeroCoefficient)
{
  auto sys = scalar(0.0, DelayFunction::constant(0.5));
  for (double wp : {0.01, 0.5, 0.99}) {
    auto c = check_decay_certificate(sys, wp, 20.0);
    EXPECT_EQ(c.gamma, 0.0);
    EXPECT_TRUE(c.holds);
    EXPECT_NEAR(c.predicted_rate, 1.0 - wp, 1e-15);
  }
}

TEST(Certificate, TimeVaryingDelay)
{
  auto sys = scalar(0.1, DelayFunction::sinusoid(0.5, 0.25, 1.0));
  const double slope = std::exp(0.75) / 0.75 * 0.1;
  EXPECT_NEAR(slope, 0.2822666689, 1e-9);
  EXPECT_NEAR(cert_lhs(sys, 10.0), slope * 10.0, 1e-10);
  auto c = check_decay_certificate(sys, 0.29, 40.0);
  EXPECT_EQ(c.gamma, 0.0);
  EXPECT_TRUE(c.holds);
}

TEST(Certificate, RejectsOmegaPrimeOutOfRange)
{
  auto sys = scalar(0.2, DelayFunction::constant(0.5));
  EXPECT_THROW(check_decay_certificate(sys, 1.0, 10.0), ParameterError);
  EXPECT_THROW(check_decay_certificate(sys, 1.5, 10.0), ParameterError);
  EXPECT_THROW(check_decay_certificate(sys, 0.0, 10.0), ParameterError);
}

TEST(Certificate, IntermittentGammaAtSwitchImages)
{
  // k(φ⁻¹(s)) = k(s + 0.5) is on for s in [2j − 0.5, 2j), where L rises with slope e^{0.5}
  auto k = Coefficient::intermittent(1.0, 2.0, 0.25);
  auto sys = build_scalar_dde(1.0, k, DelayFunction::constant(0.5), History::zero(1, -0.5), 1.0);
  auto loose = check_decay_certificate(sys, 0.3, 40.0);
  EXPECT_NEAR(loose.gamma, 20.0 * (0.5 * std::exp(0.5) - 0.6), 1e-10);
  EXPECT_FALSE(loose.holds_asymptotic);
  auto fine = check_decay_certificate(sys, 0.45, 40.0);
  EXPECT_EQ(fine.gamma, 0.0);
  EXPECT_TRUE(fine.holds);
}

TEST(Certificate, SpecialCaseReduction)
{
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::vector<Coefficient> ks = {Coefficient::constant(0.3), Coefficient::exponential(-0.4, 0.7),
                                 Coefficient::sinusoid(0.5, 1.3), Coefficient::intermittent(0.8, 1.1, 0.4),
                                 Coefficient::constant(0.2) + Coefficient::exponential(0.3, 0.5)};
  for (int trial = 0; trial < 40; ++trial) {
    const auto& k = ks[static_cast<std::size_t>(trial) % ks.size()];
    const double tau = unif(rng), omega = unif(rng), M = 1.0 + 2.0 * unif(rng), nb = 2.0 * unif(rng);
    DelaySystem sys;
    sys.generator = OperatorSpec::dense(Matrix::Constant(1, 1, -2.0));
    sys.envelope = SemigroupEnvelope{M, omega};
    sys.initial = Vector::Ones(1);
    sys.channels.push_back({OperatorSpec::diagonal(Vector::Constant(1, nb)), k, DelayFunction::constant(tau),
                            History::zero(1, -tau)});
    std::vector<double> ts;
    for (int j = 1; j <= 25; ++j)
      ts.push_back(0.37 * j * unif(rng) * 3.0);
    std::sort(ts.begin(), ts.end());
    const auto general = cert_lhs_series(sys, ts);
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const double single = single_delay_lhs(M, omega, nb, tau, k, ts[j]);
      EXPECT_NEAR(general[j], single, 1e-12 * std::max(1.0, std::abs(single)));
    }
  }
}

TEST(Gronwall, PureSemigroup)
{
  auto sys = scalar(0.0, DelayFunction::constant(0.5));
  EXPECT_NEAR(gronwall_bound(sys, 1.0), std::exp(-1.0), 1e-15);
}

TEST(Gronwall, ScalarClosedForm)
{
  auto sys = scalar(0.2, DelayFunction::constant(0.5));
  const double slope = 0.2 * std::exp(0.5);
  EXPECT_NEAR(gronwall_bound(sys, 2.0), std::exp((slope - 1.0) * 2.0), 1e-12);
  EXPECT_NEAR(gronwall_bound(sys, 2.0), 0.2617117709356303, 1e-13);
  EXPECT_NEAR(gronwall_bound(sys, 2.0, 0.1), std::exp((slope - 1.0) * 2.0 + 0.2), 1e-12);
  EXPECT_NEAR(gronwall_bound(sys, 2.0, 0.1), 0.3196554788637614, 1e-13);
}

TEST(Gronwall, AlphaWithConstantHistory)
{
  // α = |u0| + |k| h (e^{ωτ} − 1)/ω for constant k, τ, history h and M = 1
  auto sys = scalar(0.3, DelayFunction::constant(0.7), 2.0, 1.5);
  EXPECT_NEAR(gronwall_alpha(sys), 1.5 + 0.3 * 2.0 * (std::exp(0.7) - 1.0), 1e-12);
  auto neg = scalar(-0.3, DelayFunction::constant(0.7), -2.0, -1.5);
  EXPECT_NEAR(gronwall_alpha(neg), 1.5 + 0.3 * 2.0 * (std::exp(0.7) - 1.0), 1e-12);
}

TEST(Gronwall, AlphaDominatesEnvelopeTimesInitialNorm)
{
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    auto sys = devo::testing::random_certified_system(rng, 10.0);
    EXPECT_GE(gronwall_alpha(sys), sys.envelope->M * sys.initial.norm());
  }
}

TEST(Gronwall, DominatesRandomTrajectories)
{
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    auto sys = devo::testing::random_certified_system(rng, 12.0);
    auto tr = solve(sys, 10.0, with_dt(0.01));
    const auto bound = gronwall_series(sys, tr.times);
    for (std::size_t j = 0; j < tr.size(); ++j)
      ASSERT_LE(tr.norms[j], bound[j] * (1 + 1e-6)) << "trial " << trial << " t=" << tr.times[j];
  }
}

TEST(Certificate, SoundnessOnScalarInstance)
{
  auto sys = scalar(0.2, DelayFunction::constant(0.5), 1.0, 1.0);
  auto cert = check_decay_certificate(sys, 0.33, 60.0);
  ASSERT_TRUE(cert.holds_asymptotic);
  auto tr = solve(sys, 40.0, with_dt(1e-3));
  EXPECT_GE(fit_decay_rate(tr, 20.0), 0.9 * (cert.omega - cert.omega_prime));
  for (std::size_t j = 0; j < tr.size(); ++j)
    ASSERT_LE(tr.norms[j], certified_envelope(sys, cert, tr.times[j]) * (1 + 1e-6));
}

TEST(NonlinearRate, Examples)
{
  SemigroupEnvelope env{1.0, 1.0};
  EXPECT_NEAR(nonlinear_decay_rate(env, 0.33, 0.0).rate, 0.67, 1e-15);
  auto r = nonlinear_decay_rate(env, 0.33, 0.2);
  EXPECT_NEAR(r.rate, 0.47, 1e-15);
  EXPECT_TRUE(r.wpa_ok);
  auto bad = nonlinear_decay_rate(SemigroupEnvelope{2.0, 1.0}, 0.9, 0.1);
  EXPECT_NEAR(bad.rate, -0.1, 1e-15);
  EXPECT_FALSE(bad.wpa_ok);
}

TEST(KSplit, Condition)
{
  KSplit zero{Coefficient::exponential(1.0, 1.0), Coefficient::constant(0.0)};
  EXPECT_TRUE(check_ksplit_condition({zero}, 1e-6, {0.0})[0]);
  EXPECT_DOUBLE_EQ(ksplit_threshold(1.0, 1, 0.0), 1.0);
  EXPECT_TRUE(check_ksplit_condition({{Coefficient(), Coefficient::constant(0.9)}}, 1.0, {0.0})[0]);
  EXPECT_FALSE(check_ksplit_condition({{Coefficient(), Coefficient::constant(1.1)}}, 1.0, {0.0})[0]);
  EXPECT_NEAR(ksplit_threshold(1.0, 2, 0.5), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(ksplit_threshold(1.0, 2, 0.0), 0.5, 1e-15);
  auto res = check_ksplit_condition({{Coefficient(), Coefficient::constant(0.4)}, {Coefficient(), Coefficient::constant(0.4)}},
                                    1.0, {0.0, 0.5});
  EXPECT_TRUE(res[0]);
  EXPECT_FALSE(res[1]);
  EXPECT_THROW(check_ksplit_condition({zero}, 0.0, {0.0}), ParameterError);
}

TEST(KSplit, SumReproducesCoefficient)
{
  KSplit s{Coefficient::exponential(0.2, 1.0), Coefficient::sinusoid(0.3, 2.0)};
  auto k = s.total();
  for (double t = 0.0; t < 10.0; t += 0.137)
    EXPECT_NEAR(k.value(t), s.k1.value(t) + s.k2.value(t), 1e-15);
}

TEST(Cbar, Examples)
{
  std::vector<KSplit> zero{{Coefficient(), Coefficient::constant(0.5)}};
  EXPECT_DOUBLE_EQ(cbar(zero, {1.0}, {0.0}, {DelayFunction::constant(1.0)}), 1.0);

  std::vector<KSplit> e{{Coefficient::exponential(1.0, 1.0), Coefficient()}};
  EXPECT_NEAR(cbar(e, {1.0}, {0.0}, {DelayFunction::constant(0.0)}), std::exp(4.0), 1e-8);
  EXPECT_NEAR(cbar(e, {1.0}, {0.0}, {DelayFunction::constant(1.0)}), std::exp(2.0 * (std::exp(-1.0) + 1.0)), 1e-8);
  EXPECT_NEAR(cbar(e, {1.0}, {0.0}, {DelayFunction::constant(1.0)}), 15.4214420565, 1e-8);
}

TEST(Cbar, ExponentLinearInD)
{
  std::vector<KSplit> s{{Coefficient::exponential(0.3, 0.7), Coefficient()},
                        {Coefficient::exponential(-0.2, 1.3), Coefficient()}};
  std::vector<DelayFunction> delays{DelayFunction::sinusoid(0.6, 0.2, 1.0), DelayFunction::constant(0.4)};
  std::vector<double> c{0.2, 0.0};
  const double base = cbar(s, {1.0, 1.0}, c, delays);
  const double only_first = cbar({s[0]}, {1.0}, {c[0]}, {delays[0]});
  const double only_second = cbar({s[1]}, {1.0}, {c[1]}, {delays[1]});
  EXPECT_NEAR(base, only_first * only_second, 1e-10 * base);
  const double doubled = cbar(s, {2.0, 1.0}, c, delays);
  EXPECT_NEAR(doubled, only_first * only_first * only_second, 1e-10 * doubled);
}

TEST(Cbar, NonIntegrableRejected)
{
  std::vector<KSplit> s{{Coefficient::constant(0.1), Coefficient()}};
  EXPECT_THROW(cbar(s, {1.0}, {0.0}, {DelayFunction::constant(1.0)}), ParameterError);
}

TEST(SmallDataRadius, Examples)
{
  EXPECT_NEAR(small_data_radius(1.0, [](double r) { return r; }), 0.25, 1e-10);
  EXPECT_NEAR(small_data_radius(1.0, [](double r) { return r * r / (2.0 * std::numbers::pi); }),
              std::sqrt(std::numbers::pi) / 2.0, 1e-10);
  EXPECT_NEAR(small_data_radius(4.0, [](double r) { return r; }), 0.125, 1e-10);
  try {
    small_data_radius(1.0, [](double) { return 0.0; });
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("radius unbounded below 1/2"), std::string::npos);
  }
}

TEST(FitDecayRate, PureSemigroup)
{
  DelaySystem sys;
  sys.generator = OperatorSpec::dense(Matrix::Constant(1, 1, -1.0));
  sys.initial = Vector::Ones(1);
  auto tr = solve(sys, 10.0, with_dt(0.01));
  EXPECT_NEAR(fit_decay_rate(tr, 0.0), 1.0, 1e-3);
}

TEST(FitDecayRate, CharacteristicRoot)
{
  // dominant root of λ = −1 + 0.5 e^{−λ} is −0.314923057845406 (mpmath.findroot);
  // the next pair has real part −2.22
  auto sys = build_scalar_dde(1.0, Coefficient::constant(0.5), DelayFunction::constant(1.0), 1.0);
  auto tr = solve(sys, 40.0, with_dt(1e-3));
  EXPECT_NEAR(fit_decay_rate(tr, 10.0), 0.314923057845406, 1e-4);
}

TEST(FitDecayRate, ConstantAndErrors)
{
  Trajectory flat;
  for (int j = 0; j < 20; ++j) {
    flat.times.push_back(j);
    flat.norms.push_back(2.0);
  }
  EXPECT_NEAR(fit_decay_rate(flat, 0.0), 0.0, 1e-14);
  EXPECT_THROW(fit_decay_rate(flat, 15.0), ParameterError);
  flat.norms[12] = 0.0;
  EXPECT_THROW(fit_decay_rate(flat, 0.0), ParameterError);
}
