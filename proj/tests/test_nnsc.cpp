#include "gsrsep/nnsc.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace gsrsep {
namespace {

using testing::random_matrix;

TEST(SparseCode, ZeroSignalGivesZeroCode) {
  std::mt19937_64 rng(41);
  const Matrix D = random_matrix(6, 4, rng, 0.0, 1.0);
  EXPECT_TRUE(nnsc::sparse_code(Vector::Zero(6), D, 0.1, 50).isZero(0.0));
}

TEST(SparseCode, SingleAtomClosedForm) {
  std::mt19937_64 rng(42);
  Matrix d = random_matrix(7, 1, rng, 0.0, 1.0);
  d.col(0).normalize();
  const Vector alpha = nnsc::sparse_code(2.5 * d.col(0), d, 0.4, 10);
  EXPECT_NEAR(alpha(0), 2.1, 1e-12);
}

TEST(SparseCode, MatchesSupportEnumeration) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix D = random_matrix(8, 3, rng, 0.0, 1.0);
    const Vector x = random_matrix(8, 1, rng, 0.0, 1.0).col(0);
    const double lambda = 0.05 + 0.05 * (trial % 4);
    const Vector alpha = nnsc::sparse_code(x, D, lambda, 500);
    const double got = 0.5 * (x - D * alpha).squaredNorm() + lambda * alpha.sum();
    const double oracle = testing::nonneg_lasso_enumeration(x, D, lambda);
    ASSERT_NEAR(got, oracle, 1e-5) << "trial " << trial;
    ASSERT_GE(alpha.minCoeff(), 0.0);
  }
}

TEST(SparseCode, RejectsMismatchedDimensions) {
  EXPECT_THROW(nnsc::sparse_code(Vector::Ones(5), Matrix::Ones(6, 2), 0.1, 10), InvalidArgument);
  EXPECT_THROW(nnsc::sparse_code_all(Matrix::Ones(5, 3), Matrix::Ones(6, 2), 0.1, 10), InvalidArgument);
}

TEST(TrainDictionary, RecoversPlantedAtoms) {
  const auto p = testing::planted_nnsc_problem(44);
  nnsc::NnscConfig cfg;
  cfg.num_atoms = 5;
  cfg.max_epochs = 60;
  cfg.seed = 3;
  const auto dict = nnsc::train_dictionary(p.frames, cfg);
  for (Eigen::Index j = 0; j < p.atoms.cols(); ++j) {
    EXPECT_GE(testing::best_cosine(p.atoms.col(j), dict.atoms), 0.95) << "atom " << j;
  }
}

TEST(TrainDictionary, ObjectiveNonincreasing) {
  const auto p = testing::planted_nnsc_problem(45);
  nnsc::NnscConfig cfg;
  cfg.num_atoms = 8;
  cfg.max_epochs = 25;
  nnsc::NnscTrace trace;
  nnsc::train_dictionary(p.frames, cfg, &trace);
  ASSERT_EQ(trace.objective.size(), 25u);
  for (std::size_t e = 1; e < trace.objective.size(); ++e) {
    EXPECT_LE(trace.objective[e], trace.objective[e - 1] * (1.0 + 1e-12)) << "epoch " << e;
  }
}

TEST(TrainDictionary, AtomsNonNegativeWithBoundedNorm) {
  std::mt19937_64 rng(46);
  const Matrix frames = random_matrix(30, 120, rng, 0.0, 3.0);
  nnsc::NnscConfig cfg;
  cfg.num_atoms = 12;
  cfg.max_epochs = 10;
  const auto dict = nnsc::train_dictionary(frames, cfg);
  EXPECT_EQ(dict.atoms.rows(), 30);
  EXPECT_EQ(dict.atoms.cols(), 12);
  EXPECT_GE(dict.atoms.minCoeff(), 0.0);
  EXPECT_LE(dict.atoms.colwise().norm().maxCoeff(), 1.0 + 1e-9);
  EXPECT_GT(dict.atoms.colwise().norm().maxCoeff(), 0.0);
  const Matrix codes = nnsc::sparse_code_all(frames, dict.atoms, 0.1, 50);
  EXPECT_GE(codes.minCoeff(), 0.0);
}

TEST(TrainDictionary, RankOneFrames) {
  std::mt19937_64 rng(47);
  Vector v = random_matrix(10, 1, rng, 0.0, 1.0).col(0);
  v.normalize();
  const Matrix frames = v.replicate(1, 20);
  nnsc::NnscConfig cfg;
  cfg.num_atoms = 1;
  cfg.max_epochs = 20;
  const auto dict = nnsc::train_dictionary(frames, cfg);
  EXPECT_LE((dict.atoms.col(0) - v).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(TrainDictionary, Deterministic) {
  const auto p = testing::planted_nnsc_problem(48);
  nnsc::NnscConfig cfg;
  cfg.num_atoms = 6;
  cfg.max_epochs = 8;
  cfg.seed = 99;
  const auto a = nnsc::train_dictionary(p.frames, cfg);
  const auto b = nnsc::train_dictionary(p.frames, cfg);
  EXPECT_EQ(a.atoms, b.atoms);
}

TEST(TrainDictionary, Errors) {
  nnsc::NnscConfig cfg;
  cfg.num_atoms = 10;
  EXPECT_THROW(nnsc::train_dictionary(Matrix::Ones(5, 9), cfg), InvalidArgument);
  EXPECT_THROW(nnsc::train_dictionary(Matrix::Zero(5, 20), cfg), DegenerateInput);
  EXPECT_THROW(nnsc::train_dictionary(-Matrix::Ones(5, 20), cfg), InvalidArgument);
}

nnsc::Dictionary make_dict(Eigen::Index m, Eigen::Index k, std::mt19937_64& rng) {
  nnsc::Dictionary d;
  d.atoms = random_matrix(m, k, rng, 0.0, 1.0);
  return d;
}

TEST(ConcatDictionaries, ThreeBlocks) {
  std::mt19937_64 rng(49);
  const auto a = make_dict(706, 100, rng), b = make_dict(706, 100, rng), c = make_dict(706, 100, rng);
  const auto merged = nnsc::concat_dictionaries({a, b, c});
  EXPECT_EQ(merged.size(), 300);
  ASSERT_TRUE(merged.groups.has_value());
  EXPECT_EQ(merged.groups->block_sizes, (std::vector<std::size_t>{100, 100, 100}));
  EXPECT_EQ(merged.atoms.middleCols(100, 100), b.atoms);
}

TEST(ConcatDictionaries, SingleIsIdentity) {
  std::mt19937_64 rng(50);
  const auto a = make_dict(12, 7, rng);
  const auto merged = nnsc::concat_dictionaries({a});
  EXPECT_EQ(merged.atoms, a.atoms);
  EXPECT_EQ(merged.groups->block_sizes, (std::vector<std::size_t>{7}));
}

TEST(ConcatDictionaries, Mismatches) {
  std::mt19937_64 rng(51);
  auto a = make_dict(12, 7, rng);
  EXPECT_THROW(nnsc::concat_dictionaries({a, make_dict(13, 7, rng)}), InvalidArgument);
  auto b = make_dict(12, 7, rng);
  b.fft_size = 2048;
  EXPECT_THROW(nnsc::concat_dictionaries({a, b}), InvalidArgument);
  EXPECT_THROW(nnsc::concat_dictionaries({}), InvalidArgument);
}

TEST(SplitActivation, BlocksRestack) {
  std::mt19937_64 rng(52);
  const Matrix Z = random_matrix(5, 4, rng);
  const auto blocks = nnsc::split_activation(Z, GroupPartition{{2, 3}});
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].rows(), 2);
  EXPECT_EQ(blocks[1].rows(), 3);
  Matrix restacked(5, 4);
  restacked << blocks[0], blocks[1];
  EXPECT_EQ(restacked, Z);
  EXPECT_EQ(nnsc::split_activation(Z, GroupPartition{{5}}).front(), Z);
  EXPECT_THROW(nnsc::split_activation(Z, GroupPartition{{2, 2}}), InvalidArgument);
}

TEST(SplitActivation, ComponentsSumToReconstruction) {
  std::mt19937_64 rng(53);
  nnsc::Dictionary d;
  d.atoms = random_matrix(60, 300, rng, 0.0, 1.0);
  d.groups = GroupPartition{{100, 100, 100}};
  const Matrix Z = random_matrix(300, 25, rng);
  const auto parts = nnsc::component_spectrograms(d, Z);
  ASSERT_EQ(parts.size(), 3u);
  Matrix sum = Matrix::Zero(60, 25);
  for (const auto& p : parts) sum += p;
  const Matrix full = d.atoms * Z;
  EXPECT_LE((sum - full).norm(), 1e-10 * full.norm());
}

}  // namespace
}  // namespace gsrsep
