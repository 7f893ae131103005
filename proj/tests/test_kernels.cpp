#include <doctest.h>

#include <cmath>
#include <vector>

#include "mpcm/errors.hpp"
#include "mpcm/kernels/kernels.hpp"
#include "mpcm/rng.hpp"

using namespace mpcm;
namespace kn = mpcm::kernels;

namespace {

template <typename T>
std::vector<T> random_vec(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return v;
}

// SIMD variants reassociate reductions and contract via FMA, so results may
// differ from the scalar reference by a few ULP per accumulated term.
template <typename T>
void expect_close(T a, T b, double scale) {
  const double tol = (sizeof(T) == 8 ? 1e-12 : 1e-4) * std::max(1.0, scale);
  CHECK(std::abs(static_cast<double>(a) - static_cast<double>(b)) <= tol);
}

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 32, 33, 100, 257, 1024};

template <typename T>
void check_equivalence(kn::Isa isa) {
  const auto& ref = kn::table<T>(kn::Isa::scalar);
  const auto& alt = kn::table<T>(isa);
  Rng rng(20260810);

  for (std::size_t n : kSizes) {
    auto x = random_vec<T>(rng, n);
    auto y = random_vec<T>(rng, n);
    const double scale = static_cast<double>(n);

    expect_close(ref.dot(x.data(), y.data(), n), alt.dot(x.data(), y.data(), n), scale);
    expect_close(ref.sum(x.data(), n), alt.sum(x.data(), n), scale);
    expect_close(ref.sumsq(x.data(), n), alt.sumsq(x.data(), n), scale);

    std::vector<T> o1(n), o2(n);
    ref.add(x.data(), y.data(), o1.data(), n);
    alt.add(x.data(), y.data(), o2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == o2[i]);

    ref.mul(x.data(), y.data(), o1.data(), n);
    alt.mul(x.data(), y.data(), o2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == o2[i]);

    ref.scale(T(1.5), x.data(), o1.data(), n);
    alt.scale(T(1.5), x.data(), o2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == o2[i]);

    auto y1 = y, y2 = y;
    ref.axpy(T(0.75), x.data(), y1.data(), n);
    alt.axpy(T(0.75), x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) expect_close(y1[i], y2[i], 1.0);

    auto m1 = y, m2 = y;
    ref.madd(x.data(), y.data(), m1.data(), n);
    alt.madd(x.data(), y.data(), m2.data(), n);
    for (std::size_t i = 0; i < n; ++i) expect_close(m1[i], m2[i], 1.0);
  }

  // gemm over assorted (m, k, n) including vector-width remainders
  const std::size_t dims[][3] = {{1, 1, 1}, {2, 3, 5}, {3, 7, 4}, {5, 5, 8},
                                 {4, 9, 17}, {8, 16, 33}, {6, 40, 100}};
  for (const auto& d : dims) {
    auto a = random_vec<T>(rng, d[0] * d[1]);
    auto b = random_vec<T>(rng, d[1] * d[2]);
    std::vector<T> c1(d[0] * d[2], T(0.25)), c2(d[0] * d[2], T(0.25));
    ref.gemm(a.data(), b.data(), c1.data(), d[0], d[1], d[2]);
    alt.gemm(a.data(), b.data(), c2.data(), d[0], d[1], d[2]);
    for (std::size_t i = 0; i < c1.size(); ++i) expect_close(c1[i], c2[i], static_cast<double>(d[1]));
  }
}

}  // namespace

TEST_CASE("scalar kernels compute the definitions") {
  const auto& k = kn::table<double>(kn::Isa::scalar);
  const double x[] = {1, 2, 3};
  const double y[] = {4, 5, 6};
  CHECK(k.dot(x, y, 3) == doctest::Approx(32.0));
  CHECK(k.sum(x, 3) == doctest::Approx(6.0));
  CHECK(k.sumsq(x, 3) == doctest::Approx(14.0));

  // [1 2; 3 4] * [5 6; 7 8] = [19 22; 43 50]
  const double a[] = {1, 2, 3, 4};
  const double b[] = {5, 6, 7, 8};
  double c[4] = {0, 0, 0, 0};
  k.gemm(a, b, c, 2, 2, 2);
  CHECK(c[0] == doctest::Approx(19));
  CHECK(c[1] == doctest::Approx(22));
  CHECK(c[2] == doctest::Approx(43));
  CHECK(c[3] == doctest::Approx(50));
}

TEST_CASE("simd kernels match the scalar reference") {
  bool any = false;
  for (kn::Isa isa : {kn::Isa::avx2, kn::Isa::neon}) {
    if (!kn::isa_supported(isa)) continue;
    any = true;
    INFO("isa = ", kn::isa_name(isa));
    check_equivalence<double>(isa);
    check_equivalence<float>(isa);
  }
  if (!any) MESSAGE("no SIMD isa available on this host; scalar only");
}

TEST_CASE("isa dispatch") {
  CHECK(kn::isa_supported(kn::Isa::scalar));
  const kn::Isa before = kn::active_isa();
  kn::set_active_isa(kn::Isa::scalar);
  CHECK(kn::active_isa() == kn::Isa::scalar);
  CHECK(kn::active<double>().dot != nullptr);
  kn::set_active_isa(before);

#if !defined(__aarch64__)
  CHECK_THROWS_AS(kn::set_active_isa(kn::Isa::neon), InvalidInputError);
#endif
}
