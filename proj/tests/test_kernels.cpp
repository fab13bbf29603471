#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "lipreg/error.hpp"
#include "lipreg/kernels.hpp"
#include "lipreg/rng.hpp"

using namespace lipreg;
namespace k = lipreg::kernels;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> uniform(std::mt19937_64& g, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(g);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels compute the documented quantities") {
  const k::Table& s = k::table(k::Isa::scalar);
  const double a[3] = {1, 2, 3};
  const double b[3] = {4, 5, 6};
  CHECK(s.dot(a, b, 3) == 32.0);
  double y[3] = {1, 1, 1};
  s.axpy(2.0, a, y, 3);
  CHECK(y[2] == 7.0);

  double lower = 0, upper = 0;
  const double w[2] = {0.2, 0.8};
  const double rho[2] = {1.0, 3.0};
  s.envelopes(w, rho, 0.1, 2, &lower, &upper);
  CHECK(lower == doctest::Approx(0.5));
  CHECK(upper == doctest::Approx(0.3));
}

TEST_CASE("every variant agrees with the scalar reference") {
  if (!k::available(k::Isa::avx2)) {
    MESSAGE("AVX2 not available; only the scalar variant is exercised");
    return;
  }
  const k::Table& s = k::table(k::Isa::scalar);
  const k::Table& v = k::table(k::Isa::avx2);
  std::mt19937_64 g(77);
  for (std::size_t n = 0; n < 70; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto a = uniform(g, n, -1, 1);
      const auto b = uniform(g, n, -1, 1);
      const double ds = s.dot(a.data(), b.data(), n);
      const double dv = v.dot(a.data(), b.data(), n);
      double mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
      CHECK(std::abs(ds - dv) <= 1e-15 * std::max(1.0, mag));

      auto ys = b, yv = b;
      s.axpy(0.37, a.data(), ys.data(), n);
      v.axpy(0.37, a.data(), yv.data(), n);
      CHECK(same_bits(ys, yv));

      const auto w = uniform(g, n, 0.05, 0.95);
      const auto ones = uniform(g, n, 0, 3);
      const auto zeros = uniform(g, n, 0, 3);
      std::vector<double> gs(n), hs(n), gv(n), hv(n);
      s.risk_terms(w.data(), ones.data(), zeros.data(), n, gs.data(), hs.data());
      v.risk_terms(w.data(), ones.data(), zeros.data(), n, gv.data(), hv.data());
      CHECK(same_bits(gs, gv));
      CHECK(same_bits(hs, hv));

      const auto box = uniform(g, n, 0.11, 0.89);
      std::vector<double> bgs(n, 1.0), bhs(n, 2.0), bgv(n, 1.0), bhv(n, 2.0);
      const double ms = s.box_barrier(box.data(), 0.1, n, bgs.data(), bhs.data());
      const double mv = v.box_barrier(box.data(), 0.1, n, bgv.data(), bhv.data());
      CHECK(ms == mv);
      CHECK(same_bits(bgs, bgv));
      CHECK(same_bits(bhs, bhv));

      const auto bound = uniform(g, n, 1.0, 2.0);
      std::vector<double> os(n), dgs(n, 0.5), grs(n, 0.25), ov(n), dgv(n, 0.5), grv(n, 0.25);
      double gi_s = 0.1, di_s = 0.2, gi_v = 0.1, di_v = 0.2;
      const double ps = s.lipschitz_pairs(0.4, w.data(), bound.data(), n, os.data(), dgs.data(),
                                          grs.data(), &gi_s, &di_s);
      const double pv = v.lipschitz_pairs(0.4, w.data(), bound.data(), n, ov.data(), dgv.data(),
                                          grv.data(), &gi_v, &di_v);
      CHECK(ps == pv);
      CHECK(same_bits(os, ov));
      CHECK(same_bits(dgs, dgv));
      CHECK(same_bits(grs, grv));
      CHECK(std::abs(gi_s - gi_v) <= 1e-13 * std::max(1.0, std::abs(gi_s)));
      CHECK(std::abs(di_s - di_v) <= 1e-13 * std::max(1.0, std::abs(di_s)));

      if (n > 0) {
        const auto rho = uniform(g, n, 0.01, 1.0);
        double ls, us, lv, uv;
        s.envelopes(w.data(), rho.data(), 0.7, n, &ls, &us);
        v.envelopes(w.data(), rho.data(), 0.7, n, &lv, &uv);
        CHECK(ls == lv);
        CHECK(us == uv);
      }
    }
  }
}

TEST_CASE("variant selection") {
  CHECK(k::available(k::Isa::scalar));
  CHECK(k::name(k::Isa::scalar) == "scalar");
  CHECK(k::name(k::Isa::avx2) == "avx2");
  const k::Isa before = k::active().isa;
  k::force(k::Isa::scalar);
  CHECK(k::active().isa == k::Isa::scalar);
  if (k::available(k::Isa::avx2)) {
    k::force(k::Isa::avx2);
    CHECK(k::active().isa == k::Isa::avx2);
  } else {
    CHECK_THROWS_AS(k::force(k::Isa::avx2), ParameterError);
  }
  k::force(before);
}

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::encrypt(B{0, 0, 0, 0}, {0, 0}) ==
        B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::encrypt(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                            {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::encrypt(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                            {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("Philox streams are reproducible and independent") {
  Philox4x32 a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    CHECK(x == b.next_u32());
    differs_stream |= x != c.next_u32();
    differs_seed |= x != d.next_u32();
  }
  CHECK(differs_stream);
  CHECK(differs_seed);

  Philox4x32 r(1, 0);
  std::vector<int> hist(6, 0);
  double sum = 0.0;
  const int draws = 600000;
  for (int i = 0; i < draws; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    ++hist[r.below(6)];
  }
  CHECK(sum / draws == doctest::Approx(0.5).epsilon(0.005));
  double chi2 = 0.0;
  for (int h : hist) chi2 += (h - draws / 6.0) * (h - draws / 6.0) / (draws / 6.0);
  CHECK(chi2 < 25.0);  // 5 dof; p ~ 1e-4
}
