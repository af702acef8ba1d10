#include <catch_amalgamated.hpp>

#include "domcheck/order.hpp"
#include "support.hpp"

using namespace domcheck;
using Catch::Matchers::WithinAbs;

namespace {

ComplexMatrix ones(Eigen::Index n) { return ComplexMatrix::Ones(n, n); }

SuperOperator random_cp(Rng& rng, Eigen::Index din, Eigen::Index dout, int terms) {
  std::vector<ComplexMatrix> ks;
  for (int i = 0; i < terms; ++i) ks.push_back(random_gaussian(rng, dout, din));
  return SuperOperator::from_kraus(ks);
}

}  // namespace

TEST_CASE("interval_member", "[order]") {
  CHECK(interval_member(OrderInterval(ComplexMatrix::Identity(2, 2)), diag({0.5, 0.5})));
  const auto v = interval_member(OrderInterval(diag({1.0, 0.0})), diag({0.0, 0.5}));
  REQUIRE_FALSE(v.member);
  const ComplexVector& w = v.certificate.vectors.front();
  CHECK_THAT(std::abs(w(1)), WithinAbs(1.0, 1e-12));
  CHECK_THAT(v.certificate.value, WithinAbs(-0.5, 1e-12));

  CHECK_FALSE(interval_member(OrderInterval(ComplexMatrix::Identity(2, 2)), diag({-0.1, 0.5})));
  CHECK_THROWS_AS(interval_member(OrderInterval(ComplexMatrix::Identity(2, 2)), ComplexMatrix::Identity(3, 3)), Error);
  CHECK_THROWS_AS(OrderInterval(diag({1.0, -1.0})), Error);

  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = uniform_int(rng, 1, 5);
    const ComplexMatrix a = random_psd(rng, n, uniform_int(rng, 1, n));
    const ComplexMatrix root = spectral_power(a, 0.5);
    const ComplexMatrix x = root * testing::random_positive_contraction(rng, n) * root;
    CHECK(interval_member(OrderInterval(a), hermitian_part(x)));
  }
}

TEST_CASE("interval_parameterize", "[order]") {
  const ComplexMatrix w = interval_parameterize(OrderInterval(ComplexMatrix::Identity(2, 2)), diag({0.5, 0.5}));
  CHECK((w - diag({0.5, 0.5})).norm() < 1e-14);

  // x = a recovers a^{1/2}; a projection recovers itself
  const ComplexMatrix p = diag({1.0, 1.0, 0.0});
  CHECK((interval_parameterize(OrderInterval(p), p) - p).norm() < 1e-12);

  CHECK_THROWS_AS(interval_parameterize(OrderInterval(diag({1.0, 0.0})), diag({0.0, 0.5})), Error);

  const ToleranceConfig tol;
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = uniform_int(rng, 1, 5);
    const ComplexMatrix a = random_psd(rng, n, uniform_int(rng, 1, n));
    const ComplexMatrix root = spectral_power(a, 0.5);
    const ComplexMatrix x = hermitian_part(root * testing::random_positive_contraction(rng, n) * root);
    const ComplexMatrix wx = interval_parameterize(OrderInterval(a), x);
    const ComplexMatrix q = spectral_power(a, 0.25);
    CHECK(frobenius_norm(q * wx * q - x) <= tol.tol_cert * std::max(1.0, frobenius_norm(a)));
    CHECK(operator_norm(wx) <= std::sqrt(operator_norm(a)) * (1 + tol.tol_cert));
    CHECK(is_psd(wx).holds);
  }

  // normalized endpoint: the parameter is a contraction
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4;
    ComplexMatrix a = random_psd(rng, n);
    a /= operator_norm(a);
    const ComplexMatrix root = spectral_power(a, 0.5);
    const ComplexMatrix x = hermitian_part(root * testing::random_positive_contraction(rng, n) * root);
    CHECK(operator_norm(interval_parameterize(OrderInterval(a), x)) <= 1 + tol.tol_cert);
  }
}

TEST_CASE("multiplication_operator", "[order]") {
  CHECK(multiplication_operator(ComplexMatrix::Zero(2, 2)).choi().norm() == 0.0);
  Rng rng(2);
  const ComplexMatrix x = random_gaussian(rng, 3, 3);
  const auto m = multiplication_operator(x);
  CHECK((m.apply(ComplexMatrix::Identity(3, 3)) - x.adjoint() * x).norm() < 1e-12);
  CHECK(check_cp(m).status == Status::certified);

  const ComplexMatrix u = random_unitary(rng, 3);
  const ComplexMatrix h = random_hermitian(rng, 3);
  const auto before = eig_hermitian(h), after = eig_hermitian(multiplication_operator(u).apply(h));
  CHECK((before.eigenvalues - after.eigenvalues).norm() < 1e-10);
}

TEST_CASE("interval_equals_ball_image", "[order]") {
  auto r = interval_equals_ball_image(ComplexMatrix::Identity(2, 2));
  CHECK(r.holds);
  r = interval_equals_ball_image(diag({1.0, 0.0}));
  CHECK(r.holds);
  CHECK(r.samples == 100);
  Rng rng(3);
  r = interval_equals_ball_image(random_psd(rng, 3));
  CHECK(r.holds);
  CHECK(r.worst_preimage_error < 1e-8);
  CHECK_THROWS_AS(interval_equals_ball_image(diag({1.0, -1.0})), Error);
}

TEST_CASE("psol_member", "[order]") {
  Rng rng(5);
  CHECK(psol_member({ComplexMatrix::Identity(3, 3)}, testing::random_positive_contraction(rng, 3)));
  CHECK_FALSE(psol_member({diag({1.0, 0.0})}, diag({0.0, 1.0})));
  const auto v = psol_member({diag({1.0, 0.0}), diag({0.0, 2.0})}, diag({0.0, 1.0}));
  CHECK(v.member);
  CHECK(v.index == 1u);
  CHECK_FALSE(psol_member({}, diag({0.0, 1.0})));
  CHECK_THROWS_AS(psol_member({ComplexMatrix::Identity(3, 3)}, diag({0.0, 1.0})), Error);
}

TEST_CASE("corner_truncations", "[order]") {
  Rng rng(6);
  const ComplexMatrix x = random_gaussian(rng, 5, 5);
  auto c = corner_truncations(x, Truncation(0, 5));
  CHECK(c.q.norm() == 0.0);
  CHECK(c.r == x);
  CHECK(c.offdiag.norm() == 0.0);
  c = corner_truncations(x, Truncation(5, 5));
  CHECK(c.q == x);
  CHECK(c.r.norm() == 0.0);

  for (int n = 0; n <= 5; ++n) {
    c = corner_truncations(x, Truncation(n, 5));
    CHECK(ComplexMatrix(c.q + c.r + c.offdiag) == x);
    CHECK((c.q - Truncation(n, 5).p() * x * Truncation(n, 5).p()).norm() < 1e-15);
  }
  const ComplexMatrix block = diag({1.0, 2.0, 3.0});
  CHECK(corner_truncations(block, Truncation(1, 3)).offdiag.norm() == 0.0);
  CHECK_THROWS_AS(Truncation(4, 3), Error);
  CHECK_THROWS_AS(corner_truncations(x, Truncation(1, 4)), Error);
}

TEST_CASE("verify_offdiag_inequality", "[order]") {
  const auto id4 = SuperOperator::identity(4);
  // block-diagonal x: the left side vanishes
  auto r = verify_offdiag_inequality(id4, diag({1.0, 2.0, 3.0, 4.0}), Truncation(2, 4), Gauge::trace_class());
  CHECK(r.lhs == 0.0);
  CHECK(r.holds);

  // all-ones 4x4, cut at 2, trace class: Qx and Rx have trace norm 2, offdiag has trace norm 4
  r = verify_offdiag_inequality(id4, ones(4), Truncation(2, 4), Gauge::trace_class());
  CHECK_THAT(r.lhs, WithinAbs(16.0, 1e-12));
  CHECK_THAT(r.rhs, WithinAbs(16.0, 1e-12));
  CHECK(r.holds);
  CHECK_THAT(r.ratio, WithinAbs(1.0, 1e-12));
  CHECK_THAT(r.general_rhs, WithinAbs(128.0, 1e-11));
  CHECK_THAT(r.t_star, WithinAbs(1.0, 1e-12));
  CHECK(r.interpolation_holds);
  CHECK_THAT(r.scalar_lhs, WithinAbs(4.0, 1e-12));
  CHECK_THAT(r.scalar_rhs, WithinAbs(4.0, 1e-12));
  CHECK(r.map_status == Status::certified);

  // a vanishing corner
  r = verify_offdiag_inequality(id4, diag({1.0, 0.0, 0.0, 0.0}), Truncation(1, 4), Gauge::trace_class());
  CHECK(r.zero_denominator);
  CHECK(r.holds);

  CHECK_THROWS_AS(verify_offdiag_inequality(id4, diag({1.0, -1.0, 0.0, 0.0}), Truncation(1, 4), Gauge::trace_class()),
                  Error);
  CHECK_THROWS_AS(verify_offdiag_inequality(id4, ones(3), Truncation(1, 3), Gauge::trace_class()), Error);

  ToleranceConfig tol;
  tol.restarts = 4;
  Rng rng(77);
  int violations = 0, general_violations = 0, interpolation_violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = uniform_int(rng, 2, 5), m = uniform_int(rng, 1, 4);
    const auto t = random_cp(rng, n, m, uniform_int(rng, 1, 3));
    const ComplexMatrix x = random_psd(rng, n, uniform_int(rng, 1, n));
    const auto rep = verify_offdiag_inequality(t, x, Truncation(uniform_int(rng, 0, n), n), Gauge::trace_class(), tol);
    violations += !rep.holds;
    general_violations += !rep.general_holds;
    interpolation_violations += !rep.interpolation_holds || !rep.scalar_holds;
    worst = std::max(worst, rep.ratio);
  }
  CHECK(violations == 0);
  CHECK(general_violations == 0);
  CHECK(interpolation_violations == 0);
  CHECK(worst <= 1.0 + 1e-9);
}

TEST_CASE("truncation_norm_estimate", "[order]") {
  Rng rng(8);
  const auto t = random_cp(rng, 4, 3, 2);
  const auto e = truncation_norm_estimate(t, Truncation(2, 4), Gauge::trace_class(), {}, 64, 32);
  CHECK(e.estimate);
  CHECK(e.norm_complement > 0.0);
  CHECK(e.norm_q > 0.0);
  CHECK(e.norm_r > 0.0);
  CHECK_THAT(e.constant, WithinAbs(8.0 * std::sqrt(2.0), 1e-14));
  CHECK(e.holds);

  // identity on trace class: every restricted norm is 1
  const auto id = truncation_norm_estimate(SuperOperator::identity(3), Truncation(1, 3), Gauge::trace_class(), {}, 64, 32);
  CHECK(id.norm_q <= 1.0 + 1e-12);
  CHECK(id.norm_r <= 1.0 + 1e-12);
  CHECK_THAT(id.norm_q, WithinAbs(1.0, 1e-12));
  // I - Q_n is not contractive on trace class: ones(2)/2 is mapped to trace norm sqrt(5)/2
  CHECK(id.norm_complement >= std::sqrt(5.0) / 2 - 1e-3);
  CHECK(id.holds);
}

TEST_CASE("comparison_lemma_check", "[order]") {
  Rng rng(9);
  const ComplexMatrix z = random_gaussian(rng, 3, 3);
  const ComplexMatrix p = diag({1.0, 1.0, 0.0});
  CHECK(comparison_lemma_check(z, p, ComplexMatrix::Identity(3, 3)).holds);
  CHECK(comparison_lemma_check(z, testing::random_positive_contraction(rng, 3), ComplexMatrix::Zero(3, 3)).holds);
  CHECK_THROWS_AS(comparison_lemma_check(z, 2.0 * p, p), Error);
  CHECK_THROWS_AS(comparison_lemma_check(z, p, -p), Error);

  for (int trial = 0; trial < 500; ++trial) {
    const int n = uniform_int(rng, 1, 5);
    const ComplexMatrix zz = random_gaussian(rng, uniform_int(rng, 1, 5), n);
    CHECK(comparison_lemma_check(zz, testing::random_positive_contraction(rng, n),
                                 testing::random_positive_contraction(rng, n))
              .holds);
  }
}

TEST_CASE("monotone_chain", "[order]") {
  const ComplexMatrix x1 = 2.0 * diag({1.0, 1.0, 0.0, 0.0});
  auto chain = monotone_chain(x1, 1);
  REQUIRE(chain.a.size() == 2);
  CHECK_THAT(chain.c, WithinAbs(std::pow(2.0 / 3.0, 1.0 / 3.0), 1e-15));
  CHECK(chain.gaps[0] >= chain.c * 4.0 - 1e-12);
  CHECK(chain.gaps_exceed);
  CHECK(chain.monotone);

  const ComplexMatrix x3 = diag({2, 2, 2, 2, 2, 2, 0.1, 0.1});
  chain = monotone_chain(x3, 3);
  REQUIRE(chain.a.size() == 4);
  CHECK(chain.monotone);
  CHECK(chain.gaps_exceed);
  for (std::size_t k = 1; k < chain.a.size(); ++k) {
    CHECK(is_psd(chain.a[k - 1] - chain.a[k]).holds);
    CHECK(is_psd(chain.a[k]).holds);
    CHECK(operator_norm(chain.a[k]) <= 1.0 + 1e-12);
  }
  // a_k acts as c^{2k+1} on eta_i for i <= n - k
  for (int k = 0; k < 3; ++k)
    CHECK_THAT((chain.a[k] * chain.xi[0]).norm(), WithinAbs(std::pow(chain.c, 2 * k + 1), 1e-12));

  CHECK_THROWS_AS(monotone_chain(ComplexMatrix::Zero(4, 4), 1), Error);
  CHECK_THROWS_AS(monotone_chain(x1, 3), Error);
}
