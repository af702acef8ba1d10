#include <catch_amalgamated.hpp>

#include "domcheck/hierarchy.hpp"
#include "domcheck/majorization.hpp"
#include "domcheck/schur.hpp"

using namespace domcheck;
using Catch::Matchers::WithinAbs;

namespace {

ComplexMatrix heavy_row_grid(Eigen::Index n, double heavy) {
  ComplexVector v = ComplexVector::Constant(n, heavy);
  v(0) = 1.0;
  return v * v.adjoint();
}

// Hermitian symbol, PSD about half the time
ComplexMatrix random_symbol(Rng& rng, Eigen::Index n) {
  if (uniform(rng) < 0.5) return random_psd(rng, n, uniform_int(rng, 1, static_cast<int>(n)));
  return random_hermitian(rng, n);
}

}  // namespace

TEST_CASE("schur_apply", "[schur]") {
  Rng rng(1);
  const ComplexMatrix x = random_gaussian(rng, 4, 4);
  CHECK(schur_apply(SchurSymbol(ComplexMatrix::Ones(4, 4)), x) == x);
  CHECK(schur_apply(SchurSymbol(ComplexMatrix::Identity(4, 4)), x) == pinch(x, contiguous_blocks(4, 1)));
  CHECK(schur_apply(SchurSymbol(ComplexMatrix::Zero(4, 4)), x).norm() == 0.0);
  CHECK_THROWS_AS(schur_apply(SchurSymbol(ComplexMatrix::Ones(3, 3)), x), Error);

  // diagonal symbol = singleton pinching scaled by the diagonal
  const ComplexMatrix d = diag({2.0, -1.0, 0.5, 3.0});
  CHECK((schur_apply(SchurSymbol(d), x) - d * pinch(x, contiguous_blocks(4, 1))).norm() < 1e-15);

  // agrees with the builtin superoperator
  const ComplexMatrix phi = random_hermitian(rng, 4);
  CHECK((SuperOperator::schur(phi).apply(x) - schur_apply(SchurSymbol(phi), x)).norm() < 1e-14);
}

TEST_CASE("formally_positive", "[schur]") {
  CHECK(formally_positive(SchurSymbol(ComplexMatrix::Ones(2, 2))));
  ComplexMatrix bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_FALSE(formally_positive(SchurSymbol(bad)));
  ComplexMatrix skew(2, 2);
  skew << 1, 1, 0, 1;
  CHECK_FALSE(formally_positive(SchurSymbol(skew)));
}

TEST_CASE("formal positivity, positivity and complete positivity agree", "[schur]") {
  Rng rng(17);
  int positive = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = uniform_int(rng, 1, 6);
    const ComplexMatrix phi = random_symbol(rng, n);
    const bool formal = formally_positive(SchurSymbol(phi));
    const auto t = SuperOperator::schur(phi);
    const auto pos = check_positive(t);
    const auto cp = check_cp(t);
    CHECK(formal == cp.holds());
    CHECK(formal == pos.holds());
    if (formal) CHECK(pos.status == Status::certified);
    else CHECK(pos.status == Status::violated);
    positive += formal;
  }
  CHECK(positive > 20);
  CHECK(positive < 80);
}

TEST_CASE("dp_tail_score", "[schur]") {
  ComplexMatrix row = ComplexMatrix::Zero(6, 6);
  row.row(0).setConstant(0.3);
  CHECK(dp_tail_score(SchurSymbol(row), 2).score >= 0.3);

  CHECK(dp_tail_score(SchurSymbol(diag({1, 2, 3, 4})), 0).score == 0.0);

  const Eigen::Index n = 10;
  ComplexMatrix decay(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) decay(i, j) = std::pow(2.0, -static_cast<double>(i + j));
  const auto r = dp_tail_score(SchurSymbol(decay), n / 2);
  CHECK(r.score <= std::pow(2.0, -static_cast<double>(n / 2)));
  CHECK_THAT(r.row_tail(0), WithinAbs(std::pow(2.0, -6.0), 1e-15));
  CHECK_THAT(r.column_tail(0), WithinAbs(std::pow(2.0, -6.0), 1e-15));

  CHECK_THROWS_AS(dp_tail_score(SchurSymbol(decay), n), Error);
  CHECK_THROWS_AS(dp_tail_score(SchurSymbol(decay), -1), Error);
}

TEST_CASE("build_obstruction", "[schur]") {
  auto inst = build_obstruction(0.9, 3, 1);
  CHECK(validate(inst).empty());
  CHECK_THAT(inst.alpha, WithinAbs(2.7, 1e-15));
  CHECK_THAT(inst.alpha * inst.alpha, WithinAbs(7.29, 1e-12));
  CHECK(inst.C.rows() == 4);
  for (Eigen::Index j = 1; j <= 3; ++j) CHECK(std::abs(inst.C(0, j)) > 0.9);

  inst = build_obstruction(1.0, 2, 2);
  CHECK(validate(inst).empty());

  CHECK_THROWS_AS(build_obstruction(0.5, 2, 0), Error);
  CHECK_THROWS_AS(build_obstruction(1.5, 2, 0), Error);
  try {
    build_obstruction(0.5, 2, 0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleParameters);
  }

  // any PSD C meeting the entry constraints is accepted: a non-rank-one example
  ComplexMatrix c(3, 3);
  c << 1, 0.95, 0.95, 0.95, 1, 0.9025, 0.95, 0.9025, 1;
  const auto other = make_instance(c, ComplexMatrix::Identity(3, 3), 0.95, 2);
  CHECK(validate(other).empty());
}

TEST_CASE("obstruction_witness", "[schur]") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (auto [c, m] : {std::pair{0.9, 3}, std::pair{1.0, 2}, std::pair{0.6, 5}, std::pair{0.35, 12}}) {
      const auto inst = build_obstruction(c, m, seed);
      const auto w = obstruction_witness(inst);
      CHECK_THAT(w.bound, WithinAbs(m + 1 - (m * c) * (m * c), 1e-12));
      CHECK(w.q <= w.bound + 1e-7);
      CHECK(w.q < 0);
      CHECK(w.min_eig_d_minus_c < 0);
      // certificates re-check against the raw matrices
      Certificate block = w.certificate;
      CHECK(verify_psd_witness(obstruction_block(inst), block));
      Certificate gap = w.certificate;
      gap.vectors = {w.certificate.vectors[1]};
      gap.value = (gap.vectors[0].adjoint() * (inst.D - inst.C) * gap.vectors[0])(0, 0).real();
      CHECK(verify_psd_witness(inst.D - inst.C, gap));
    }
  }
  const auto w = obstruction_witness(build_obstruction(0.9, 3, 7));
  CHECK(w.bound <= 4 - 7.29 + 1e-12);

  // a malformed instance (C = 0) has no negative form
  auto broken = build_obstruction(0.9, 3, 1);
  broken.C.setZero();
  CHECK_THROWS_AS(obstruction_witness(broken), Error);
}

TEST_CASE("finite_domination_obstruction", "[schur]") {
  // phi = psi: C <= D holds, and the off-diagonal smallness rules out heavy rows
  const SchurSymbol same(heavy_row_grid(6, 0.9));
  auto r = finite_domination_obstruction(same, same, 0.9, 3);
  CHECK(r.preconditions_hold);
  CHECK_FALSE(r.found);
  CHECK(r.exhaustive);

  // heavy-row phi under a diagonal psi with psi - phi PSD: entries of psi exceed 1
  const ComplexMatrix heavy = heavy_row_grid(8, 0.9);
  const double top = operator_norm(heavy);
  r = finite_domination_obstruction(SchurSymbol(heavy), SchurSymbol(top * ComplexMatrix::Identity(8, 8)), 0.9, 3);
  CHECK(r.preconditions_hold);
  CHECK_FALSE(r.found);
  CHECK(r.subsets_examined == 70);

  // scaled so psi = 1 dominates: the row is no longer heavy
  r = finite_domination_obstruction(SchurSymbol(heavy / top), SchurSymbol(ComplexMatrix::Identity(8, 8)), 0.9, 3);
  CHECK(r.preconditions_hold);
  CHECK_FALSE(r.found);

  // heavy row under psi = 1 without domination: found and witnessed
  r = finite_domination_obstruction(SchurSymbol(heavy), SchurSymbol(ComplexMatrix::Identity(8, 8)), 0.9, 3);
  CHECK_FALSE(r.preconditions_hold);
  REQUIRE(r.found);
  CHECK(r.indices == std::vector<Eigen::Index>{0, 1, 2, 3});
  REQUIRE(r.witness);
  CHECK(r.witness->q < 0);
  CHECK(r.witness->min_eig_d_minus_c < 0);

  // heavy row placed late: the smallest index must carry it
  ComplexMatrix shifted = ComplexMatrix::Identity(8, 8) * 0.0;
  ComplexVector v = ComplexVector::Zero(8);
  v(3) = 1.0;
  v.tail(4).setConstant(0.95);
  shifted = v * v.adjoint();
  r = finite_domination_obstruction(SchurSymbol(shifted), SchurSymbol(ComplexMatrix::Identity(8, 8)), 0.9, 3);
  REQUIRE(r.found);
  CHECK(r.indices.front() == 3);

  // beyond the exhaustive limit the greedy pass still finds the planted configuration
  const ComplexMatrix big = heavy_row_grid(16, 0.95);
  r = finite_domination_obstruction(SchurSymbol(big), SchurSymbol(ComplexMatrix::Identity(16, 16)), 0.9, 3);
  CHECK_FALSE(r.exhaustive);
  CHECK(r.found);

  // infeasible parameters: nothing to search
  r = finite_domination_obstruction(SchurSymbol(heavy), SchurSymbol(ComplexMatrix::Identity(8, 8)), 0.5, 2);
  CHECK_FALSE(r.found);
  CHECK(r.subsets_examined == 0);
}
