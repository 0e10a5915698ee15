#include <random>
#include <vector>

#include "doctest.h"
#include "support.hpp"

#include "entrylab/kernels.hpp"
#include "entrylab/lstm.hpp"

using namespace entrylab;
using namespace entrylab::kernels;
using testing::rel_err;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(a[i] - b[i]) <= 1e-13 * (1.0 + std::abs(a[i])));
}

// Restores the default backend when a test case ends.
struct BackendGuard {
  Backend saved = active().backend;
  ~BackendGuard() { select(saved); }
};

}  // namespace

TEST_CASE("scalar and avx2 kernels agree") {
  if (!avx2_available()) {
    MESSAGE("AVX2 not available; only the scalar path is exercised");
    return;
  }
  std::mt19937_64 rng(17);
  for (std::size_t rows : {1u, 3u, 4u, 7u, 16u, 33u, 128u}) {
    for (std::size_t cols : {1u, 2u, 5u, 8u, 13u, 32u, 39u}) {
      const auto a = random_vec(rows * cols, rng);
      const auto x = random_vec(cols, rng);
      const auto xr = random_vec(rows, rng);
      const ConstMatrixView av{a.data(), rows, cols};

      CHECK(rel_err(scalar::dot(a.data(), x.data(), cols), avx2::dot(a.data(), x.data(), cols), 1e-12) < 1e-12);

      auto y1 = random_vec(rows, rng);
      auto y2 = y1;
      scalar::gemv(av, x.data(), y1.data());
      avx2::gemv(av, x.data(), y2.data());
      check_close(y1, y2);

      auto t1 = random_vec(cols, rng);
      auto t2 = t1;
      scalar::gemv_t(av, xr.data(), t1.data());
      avx2::gemv_t(av, xr.data(), t2.data());
      check_close(t1, t2);

      auto m1 = a;
      auto m2 = a;
      scalar::ger({m1.data(), rows, cols}, 0.37, xr.data(), x.data());
      avx2::ger({m2.data(), rows, cols}, 0.37, xr.data(), x.data());
      check_close(m1, m2);

      auto z1 = random_vec(cols, rng);
      auto z2 = z1;
      scalar::axpy(-1.7, x.data(), z1.data(), cols);
      avx2::axpy(-1.7, x.data(), z2.data(), cols);
      check_close(z1, z2);
    }
  }
}

TEST_CASE("scalar kernels match naive loops") {
  std::mt19937_64 rng(3);
  const std::size_t rows = 5, cols = 7;
  const auto a = random_vec(rows * cols, rng);
  const auto x = random_vec(cols, rng);
  const auto xr = random_vec(rows, rng);
  std::vector<double> y(rows, 1.0), yt(cols, -1.0);
  scalar::gemv({a.data(), rows, cols}, x.data(), y.data());
  scalar::gemv_t({a.data(), rows, cols}, xr.data(), yt.data());
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 1.0;
    for (std::size_t j = 0; j < cols; ++j) acc += a[i * cols + j] * x[j];
    CHECK(std::abs(acc - y[i]) < 1e-14);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    double acc = -1.0;
    for (std::size_t i = 0; i < rows; ++i) acc += a[i * cols + j] * xr[i];
    CHECK(std::abs(acc - yt[j]) < 1e-14);
  }
}

TEST_CASE("backend selection") {
  BackendGuard guard;
  CHECK(select(Backend::scalar));
  CHECK(active().backend == Backend::scalar);
  CHECK(backend_name(Backend::avx2) == "avx2");
  const bool ok = select(Backend::avx2);
  CHECK(ok == avx2_available());
  CHECK(active().backend == (ok ? Backend::avx2 : Backend::scalar));
}

TEST_CASE("network passes agree across backends") {
  BackendGuard guard;
  neural::Architecture arch;
  arch.hidden = 12;
  neural::LstmModel model(arch);
  model.initialize(8);
  std::mt19937_64 rng(1);
  const std::size_t N = 9;
  const auto xs = random_vec(N * arch.inputs, rng);
  const auto dout = random_vec(N * arch.outputs, rng);
  std::mt19937_64 mrng(2);
  const auto masks = neural::sample_masks(arch, N, mrng);

  auto run = [&](Backend b) {
    select(b);
    neural::Trace tr;
    neural::forward_trace(model, xs, &masks, tr);
    std::vector<double> grad(model.param_count(), 0.0);
    neural::BackwardWorkspace ws;
    neural::backward_trace(model, tr, &masks, dout, grad, ws);
    grad.insert(grad.end(), tr.output.begin(), tr.output.end());
    return grad;
  };
  const auto s = run(Backend::scalar);
  if (!avx2_available()) return;
  const auto v = run(Backend::avx2);
  REQUIRE(s.size() == v.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(s[i] - v[i]) <= 1e-12 * (1.0 + std::abs(s[i])));
}
