#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qcert/acceptance.hpp"
#include "qcert/analysis.hpp"
#include "qcert/errors.hpp"
#include "qcert/fock.hpp"
#include "test_support.hpp"

namespace qcert {
namespace {

ComplexMatrix row(std::initializer_list<Complex> v) {
  ComplexMatrix r(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const Complex& x : v) r(0, i++) = x;
  return r;
}

double interior_norm(const FockSpace& s, const ComplexMatrix& A) {
  const ComplexMatrix Pi = interior_projector(s);
  return (Pi * A * Pi).norm();
}

TEST(FockSpace, Validation) {
  EXPECT_NO_THROW(FockSpace(1, 2, 0).validate());
  EXPECT_THROW(FockSpace(1, 3, 2).validate(), ValidationError);
  EXPECT_THROW(FockSpace(3, 20, 4, 4096).validate(), ValidationError);
  EXPECT_THROW(FockSpace(0, 4, 2).validate(), ValidationError);
}

TEST(FockSpace, IndexingRoundTrip) {
  const FockSpace s(3, 4, 2);
  EXPECT_EQ(s.dim(), 125);
  for (int i = 0; i < s.dim(); ++i) EXPECT_EQ(s.index_of(s.occupations(i)), i);
  EXPECT_EQ(s.occupations(1), (std::vector<int>{0, 0, 1}));
}

TEST(Ladder, SingleModeCutoffTwo) {
  const ComplexMatrix a = mode_annihilator(FockSpace(1, 2, 0), 0);
  ComplexMatrix expected = ComplexMatrix::Zero(3, 3);
  expected(0, 1) = 1.0;
  expected(1, 2) = std::sqrt(2.0);
  EXPECT_EQ(a, expected);
}

TEST(Ladder, CcrOnInterior) {
  const FockSpace s(2, 6, 4);
  const auto xi = mode_vector(s);
  const ComplexMatrix I = ComplexMatrix::Identity(s.dim(), s.dim());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const ComplexMatrix c = xi[i] * xi[2 + j] - xi[2 + j] * xi[i] - (i == j ? I : ComplexMatrix::Zero(s.dim(), s.dim()));
      EXPECT_LE(interior_norm(s, c), 1e-12);
    }
  EXPECT_EQ(xi[0] * xi[1], xi[1] * xi[0]);
}

TEST(Operators, JosephsonZ) {
  const FockSpace s(2, 6, 4);
  const auto& plant = testing::josephson_plant();
  EXPECT_LT((build_z(s, plant.E1(), plant.E2()) - mode_annihilator(s, 1) / std::sqrt(2.0)).norm(), 1e-14);
  EXPECT_EQ(build_z(s, ComplexMatrix::Zero(1, 2), ComplexMatrix::Zero(1, 2)), ComplexMatrix::Zero(s.dim(), s.dim()));
}

TEST(Operators, QHermitian) {
  std::mt19937_64 rng(61);
  const FockSpace s(2, 5, 3);
  const ComplexMatrix q = build_q(s, testing::random_complex(1, 2, rng), testing::random_complex(1, 2, rng));
  EXPECT_EQ(q, ComplexMatrix(q.adjoint()));
}

TEST(Operators, NumberOperatorPlusHalf) {
  const FockSpace s(1, 8, 6);
  ComplexMatrix M = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix H = quadratic_hamiltonian(s, M);
  const ComplexMatrix a = mode_annihilator(s, 0);
  const ComplexMatrix expected = a.adjoint() * a + 0.5 * ComplexMatrix::Identity(s.dim(), s.dim());
  EXPECT_LE(interior_norm(s, H - expected), 1e-12);
  EXPECT_EQ(quadratic_hamiltonian(s, ComplexMatrix::Zero(2, 2)), ComplexMatrix::Zero(s.dim(), s.dim()));
}

TEST(Operators, JosephsonHamiltonianHermitian) {
  const FockSpace s(2, 6, 4);
  const ComplexMatrix H = quadratic_hamiltonian(s, testing::josephson_plant().M());
  EXPECT_LE((H - H.adjoint()).norm(), 1e-12);
}

TEST(Operators, QuadraticFormMatchesModeSum) {
  std::mt19937_64 rng(67);
  const FockSpace s(2, 4, 2);
  const ComplexMatrix X = testing::random_complex(4, 4, rng);
  const auto xi = mode_vector(s);
  ComplexMatrix expected = ComplexMatrix::Zero(s.dim(), s.dim());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) expected += X(i, j) * xi[i].adjoint() * xi[j];
  EXPECT_LT((quadratic_form(s, X) - expected).norm(), 1e-12);
}

TEST(FuncOfHermitian, Identities) {
  std::mt19937_64 rng(71);
  const FockSpace s(2, 5, 3);
  const ComplexMatrix q = build_q(s, testing::random_complex(1, 2, rng), testing::random_complex(1, 2, rng));
  EXPECT_LE((func_of_hermitian(q, [](double x) { return x; }) - q).norm(), 1e-10);
  const ComplexMatrix s2 = func_of_hermitian(q, [](double x) { return std::pow(std::sin(x), 2); });
  const ComplexMatrix c2 = func_of_hermitian(q, [](double x) { return std::pow(std::cos(x), 2); });
  EXPECT_LE((s2 + c2 - ComplexMatrix::Identity(s.dim(), s.dim())).norm(), 1e-10);
  const ComplexMatrix q0 = ComplexMatrix::Zero(s.dim(), s.dim());
  EXPECT_LE((func_of_hermitian(q0, [](double x) { return std::cos(x); }) - ComplexMatrix::Identity(s.dim(), s.dim())).norm(),
            1e-14);
}

TEST(Coupling, Josephson) {
  const FockSpace s(2, 5, 3);
  const auto& plant = testing::josephson_plant();
  const auto Ls = coupling_ops(s, plant.N1(), plant.N2());
  ASSERT_EQ(Ls.size(), 2u);
  EXPECT_EQ(Ls[0], 4.0 * mode_annihilator(s, 0));
  EXPECT_EQ(Ls[1], 4.0 * mode_annihilator(s, 1));
  for (const auto& L : coupling_ops(s, ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)))
    EXPECT_EQ(L, ComplexMatrix::Zero(s.dim(), s.dim()));
}

TEST(Coupling, RandomMatchesEntrywiseLoop) {
  std::mt19937_64 rng(73);
  const FockSpace s(2, 3, 1);
  const ComplexMatrix N1 = testing::random_complex(3, 2, rng);
  const ComplexMatrix N2 = testing::random_complex(3, 2, rng);
  const auto Ls = coupling_ops(s, N1, N2);
  for (int j = 0; j < 3; ++j) {
    ComplexMatrix L = ComplexMatrix::Zero(s.dim(), s.dim());
    for (int col = 0; col < s.dim(); ++col) {
      const auto occ = s.occupations(col);
      for (int i = 0; i < 2; ++i) {
        auto down = occ;
        if (occ[i] > 0) {
          --down[i];
          L(s.index_of(down), col) += N1(j, i) * std::sqrt(static_cast<double>(occ[i]));
        }
        auto up = occ;
        if (occ[i] < s.cutoff) {
          ++up[i];
          L(s.index_of(up), col) += N2(j, i) * std::sqrt(static_cast<double>(occ[i] + 1));
        }
      }
    }
    EXPECT_LT((Ls[j] - L).norm(), 1e-13);
  }
}

TEST(Lindblad, AmplitudeDamping) {
  const FockSpace s(1, 4, 2);
  const ComplexMatrix a = mode_annihilator(s, 0);
  const ComplexMatrix H = ComplexMatrix::Zero(s.dim(), s.dim());
  ComplexMatrix rho = fock_state(s, {1});
  const double dt = 1e-3;
  for (int k = 0; k < 1000; ++k) {
    rho = lindblad_step(H, {a}, rho, dt);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
  }
  EXPECT_NEAR(rho(1, 1).real(), std::exp(-1.0), 1e-10);
  EXPECT_NEAR(rho(0, 0).real(), 1.0 - std::exp(-1.0), 1e-10);
}

TEST(Lindblad, UnitaryPreservesPurity) {
  std::mt19937_64 rng(79);
  const FockSpace s(2, 3, 1);
  const ComplexMatrix H = testing::random_hermitian(s.dim(), rng);
  ComplexVector psi = testing::random_complex(s.dim(), 1, rng);
  psi.normalize();
  ComplexMatrix rho = psi * psi.adjoint();
  const LindbladIntegrator integ(H, {});
  for (int k = 0; k < 100; ++k) rho = integ.step(rho, 1e-3);
  EXPECT_NEAR((rho * rho).trace().real(), 1.0, 1e-8);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
}

TEST(Lindblad, RhsMatchesDefinition) {
  std::mt19937_64 rng(83);
  const FockSpace s(2, 3, 1);
  const ComplexMatrix H = testing::random_hermitian(s.dim(), rng);
  const std::vector<ComplexMatrix> Ls = {testing::random_complex(s.dim(), s.dim(), rng),
                                         testing::random_complex(s.dim(), s.dim(), rng)};
  const ComplexMatrix rho = testing::random_hermitian(s.dim(), rng);
  ComplexMatrix expected = -kI * (H * rho - rho * H);
  for (const auto& L : Ls) {
    const ComplexMatrix LdL = L.adjoint() * L;
    expected += L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL);
  }
  EXPECT_LT((LindbladIntegrator(H, Ls).rhs(rho) - expected).norm(), 1e-11);
}

TEST(Lindblad, RejectsNonFinite) {
  const FockSpace s(1, 2, 0);
  ComplexMatrix rho = vacuum_state(s);
  rho(0, 0) = NAN;
  EXPECT_THROW(lindblad_step(ComplexMatrix::Zero(3, 3), {}, rho, 1e-3), NumericalError);
}

TEST(Simulate, VacuumCostMatchesGaussianMoment) {
  // <W> = 4 <z z^dag> - <sin^2 q> with <z z^dag> = 1/2 and <cos 2q> = exp(-2 <q^2>), <q^2> = 1/2.
  const double expected = 2.0 - 0.5 * (1.0 - std::exp(-1.0));
  const FockSpace s(2, 24, 4);
  const auto cfg = josephson_config();
  const auto ops = build_system(s, cfg.plant, cfg.nonlinearity, cfg.cost, Ordering::AsWritten);
  EXPECT_NEAR((ops.W * vacuum_state(s)).trace().real(), expected, 1e-9);

  auto opts = cfg.simulate;
  opts.t_final = 1e-3;
  opts.dt = 1e-3;
  const auto r = simulate(cfg.plant, cfg.nonlinearity, cfg.cost, opts);
  EXPECT_NEAR(r.series.front().expW, expected, 1e-6);
}

TEST(Simulate, ZeroPlantCostConstant) {
  const auto plant = testing::zero_plant(2, row({0.0, 1.0 / std::sqrt(2.0)}), row({0.0, 0.0}));
  const auto cost = CostSpec::make(4.0, CostSpec::GwKind::Zero);
  SimulationOptions opts;
  opts.cutoff = 4;
  opts.interior_cutoff = 2;
  opts.t_final = 1.0;
  opts.dt = 1e-2;
  const auto r = simulate(plant, NonlinearitySpec::zero(), cost, opts);
  for (const auto& row : r.series) EXPECT_NEAR(row.expW, 2.0, 1e-12);
  EXPECT_NEAR(r.final_average, 2.0, 1e-12);
}

TEST(Simulate, ShortJosephsonRunIntegrity) {
  auto cfg = josephson_config();
  auto opts = cfg.simulate;
  opts.t_final = 1.0;
  const auto r = simulate(cfg.plant, cfg.nonlinearity, cfg.cost, opts);
  EXPECT_EQ(r.steps, 1000);
  EXPECT_LE(r.max_trace_drift, 1e-8);
  EXPECT_GE(r.min_eigenvalue, -1e-8);
  EXPECT_TRUE(std::isfinite(r.final_average));
  EXPECT_EQ(r.series.size(), 101u);
  EXPECT_DOUBLE_EQ(r.series.back().t, 1.0);
}

TEST(Simulate, HalvingDtChangesAverageBelowOnePercent) {
  auto cfg = josephson_config();
  auto opts = cfg.simulate;
  opts.cutoff = 6;
  opts.t_final = 2.0;
  opts.dt = 2e-3;
  const auto coarse = simulate(cfg.plant, cfg.nonlinearity, cfg.cost, opts);
  opts.dt = 1e-3;
  const auto fine = simulate(cfg.plant, cfg.nonlinearity, cfg.cost, opts);
  EXPECT_LT(std::abs(coarse.final_average - fine.final_average), 0.01 * std::abs(fine.final_average));
}

TEST(Simulate, TinyCutoffWarnsOfTruncation) {
  auto cfg = josephson_config();
  auto opts = cfg.simulate;
  opts.cutoff = 2;
  opts.interior_cutoff = 0;
  opts.t_final = 1.0;
  const auto r = simulate(cfg.plant, cfg.nonlinearity, cfg.cost, opts);
  EXPECT_TRUE(r.truncation_warning);
  EXPECT_GT(r.max_top_level_population, kTruncationLeakThreshold);
}

TEST(Simulate, OptionValidation) {
  SimulationOptions o;
  o.dt = 0.0;
  EXPECT_THROW(o.validate(), ValidationError);
  o = SimulationOptions{};
  o.initial.occupations = {9, 0};
  EXPECT_THROW(o.validate(), ValidationError);
  EXPECT_THROW(ordering_from_string("normal"), ValidationError);
}

TEST(Identities, ZeroP) {
  const auto rep = commutator_identity_report(FockSpace(2, 6, 3), ComplexMatrix::Zero(4, 4), testing::josephson_plant());
  EXPECT_EQ(rep.max(), 0.0);
}

TEST(Identities, IdentityPSingleMode) {
  const ComplexMatrix I = ComplexMatrix::Identity(1, 1);
  const auto plant = testing::make_plant(I, ComplexMatrix::Zero(1, 1), I, ComplexMatrix::Zero(1, 1), row({1.0}), row({0.0}));
  const auto rep = commutator_identity_report(FockSpace(1, 10, 6), ComplexMatrix::Identity(2, 2), plant);
  EXPECT_LE(rep.mu_identity, 1e-10);
  EXPECT_LE(rep.max(), 1e-10);
}

TEST(Identities, JosephsonReportedP) {
  const auto rep = commutator_identity_report(FockSpace(2, 12, 6), reported_P(), testing::josephson_plant());
  EXPECT_LE(rep.mu_identity, 1e-8);
  EXPECT_LE(rep.quad_hamiltonian, 1e-8);
  EXPECT_LE(rep.dissipation, 1e-8);
  EXPECT_LE(rep.xi_commutator, 1e-8);
}

TEST(Identities, RandomPlantAndP) {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 5; ++trial) {
    const auto plant = testing::random_plant(2, 2, rng);
    const auto rep = commutator_identity_report(FockSpace(2, 8, 4), testing::random_structured(2, rng), plant);
    EXPECT_LE(rep.quad_hamiltonian, 1e-10);
    EXPECT_LE(rep.dissipation, 1e-10);
    EXPECT_LE(rep.xi_commutator, 1e-10);
  }
}

// The double commutator is the constant 2 Et J P Sigma J Et^T. It coincides
// with mu only when both vanish, as they do for the bundled example.
TEST(Identities, DoubleCommutatorConstant) {
  std::mt19937_64 rng(97);
  const FockSpace s(2, 8, 2);
  const ComplexMatrix Pi = interior_projector(s);
  const ComplexMatrix J = build_J(2).cast<Complex>();
  const ComplexMatrix S = build_Sigma(2).cast<Complex>();
  for (int trial = 0; trial < 5; ++trial) {
    const auto plant = testing::random_plant(2, 2, rng);
    const ComplexMatrix P = testing::random_structured(2, rng);
    const auto d = doubled_matrices(plant);
    const ComplexMatrix z = build_z(s, plant.E1(), plant.E2());
    const ComplexMatrix V = quadratic_form(s, P);
    const ComplexMatrix zV = z * V - V * z;
    const ComplexMatrix zzV = z * zV - zV * z;
    const Complex c = (2.0 * d.E_tilde * J * P * S * J * d.E_tilde.transpose())(0, 0);
    EXPECT_LE((Pi * (zzV - c * ComplexMatrix::Identity(s.dim(), s.dim())) * Pi).norm(), 1e-10 * std::abs(c));
    EXPECT_GT(std::abs(c - mu(P, d.E_tilde)), 1e-3);
  }
  const auto d = testing::josephson_doubled();
  EXPECT_EQ((2.0 * d.E_tilde * J * reported_P() * S * J * d.E_tilde.transpose())(0, 0), Complex(0.0));
  EXPECT_EQ(mu(reported_P(), d.E_tilde), Complex(0.0));
}

}  // namespace
}  // namespace qcert
