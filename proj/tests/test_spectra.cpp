#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nopo/analytic.hpp"
#include "nopo/errors.hpp"
#include "nopo/spectra.hpp"

using namespace nopo;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<cplx> ou_series(double lambda, double sigma, double dt, std::size_t n, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> N;
  double rho = std::exp(-lambda * dt);
  double s = sigma * std::sqrt((1 - rho * rho) / (2 * lambda));
  double x = sigma / std::sqrt(2 * lambda) * N(eng);
  std::vector<cplx> out(n);
  for (auto& v : out) {
    x = rho * x + s * N(eng);
    v = x;
  }
  return out;
}

// Mean of v over consecutive groups of `width` bins starting at bin 1.
std::vector<double> groups(const std::vector<double>& v, std::size_t width, std::size_t last) {
  std::vector<double> g;
  for (std::size_t k = 1; k + width - 1 <= last; k += width) {
    double s = 0;
    for (std::size_t j = 0; j < width; ++j) s += v[k + j];
    g.push_back(s / width);
  }
  return g;
}

// Hand-built ensemble with a single trajectory.
EnsembleResult synthetic(Representation rep, double dt, std::size_t n_frames, auto fill) {
  EnsembleResult e;
  e.info.rep = rep;
  e.info.record_interval = dt;
  e.info.config.store_records = true;
  e.info.scaled.g = 1.0;
  e.info.scaled.gamma_r = 0.5;
  e.info.has_noise = rep == Representation::TruncatedWigner;
  TrajectoryRecord r;
  for (std::size_t i = 0; i < n_frames; ++i) {
    RecordFrame f{};
    f.time = (i + 1) * dt;
    fill(i, f);
    r.frames.push_back(f);
  }
  e.records.push_back(std::move(r));
  e.n_completed = 1;
  return e;
}

}  // namespace

TEST_SUITE("spectra") {

TEST_CASE("cross spectrum: OU oracle") {
  const double lambda = 1, sigma = 1.3, dt = 0.02, T = 100;
  auto x = ou_series(lambda, sigma, dt, 200 * 5000, 17);
  auto s = cross_spectrum(x, x, dt, T, 5.0);
  CHECK(s.segments == 200);
  CHECK(s.omega[1] == doctest::Approx(2 * pi / T));
  std::vector<double> est, ref;
  for (std::size_t k = 0; k < s.value.size(); ++k) {
    CHECK(std::abs(s.value[k].imag()) < 1e-12 * std::abs(s.value[k].real()) + 1e-15);
    est.push_back(s.value[k].real());
    ref.push_back(sigma * sigma / (s.omega[k] * s.omega[k] + lambda * lambda));
  }
  auto ge = groups(est, 16, est.size() - 1), gr = groups(ref, 16, ref.size() - 1);
  for (std::size_t i = 0; i < ge.size(); ++i) CHECK(ge[i] == doctest::Approx(gr[i]).epsilon(0.05));
}

TEST_CASE("cross spectrum: white noise and zero series") {
  const double v = 2.0, dt = 0.1, T = 50;
  std::mt19937_64 eng(3);
  std::normal_distribution<double> N(0, std::sqrt(v));
  std::vector<cplx> w(400 * 500);
  for (auto& z : w) z = N(eng);
  auto s = cross_spectrum(w, w, dt, T);
  std::vector<double> est;
  for (auto z : s.value) est.push_back(z.real());
  for (double g : groups(est, 25, est.size() - 1)) CHECK(g == doctest::Approx(v * dt).epsilon(0.05));

  std::vector<cplx> zero(1000, 0.0);
  auto z = cross_spectrum(zero, zero, 0.1, 10);
  for (auto c : z.value) CHECK(std::abs(c) == 0);

  CHECK_THROWS_AS(cross_spectrum(std::vector<cplx>(50), std::vector<cplx>(50), 0.1, 10), EstimationError);
  CHECK_THROWS_AS(cross_spectrum(std::vector<cplx>(50), std::vector<cplx>(40), 0.1, 1), ContractError);
  CHECK_THROWS_AS(cross_spectrum(zero, zero, 0.1, 10, 100.0), ParameterError);
}

TEST_CASE("cross spectrum: Parseval") {
  const double dt = 0.05, T = 20;
  auto x = ou_series(0.7, 1.0, dt, 400 * 40, 5);
  auto s = cross_spectrum(x, x, dt, T);
  std::size_t n = 400;
  double dw = 2 * pi / T;
  double total = s.value[0].real() + s.value[n / 2].real();
  for (std::size_t k = 1; k < n / 2; ++k) total += 2 * s.value[k].real();
  total *= dw / (2 * pi);
  double m = 0, var = 0;
  for (auto z : x) m += z.real();
  m /= x.size();
  for (auto z : x) var += (z.real() - m) * (z.real() - m);
  var /= x.size();
  CHECK(total == doctest::Approx(var).epsilon(0.05));
}

TEST_CASE("spectrum normalisation on a synthetic tone") {
  const double dt = 0.05, T = 10;
  const std::size_t n = 200;
  const int k0 = 7;
  const cplx A(0.3, 0.1), B(0.2, -0.4);
  auto ens = synthetic(Representation::PositiveP, dt, 3 * n, [&](std::size_t i, RecordFrame& f) {
    double ph = 2 * pi * k0 * static_cast<double>(i % n) / n;
    f.mean.X = A * std::polar(1.0, -ph);
    f.mean.Xp = B * std::polar(1.0, ph);
  });
  SpectralSettings set;
  set.t_seg = T;
  set.omega_max = 6;
  auto e = squeezing_spectra(ens, set);
  CHECK(e.segments == 3);
  for (std::size_t k = 0; k < e.omega.size(); ++k) {
    double expect = k == static_cast<std::size_t>(k0) ? 1 + T * (A * B).real() : 1.0;
    CHECK(e.v0[k] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(e.vpi2[k] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("+P vacuum spectra are exactly one") {
  PhysicalParams p{1, 1, 0.2, {0, 0}};
  IntegratorConfig c;
  c.dt = 0.01;
  c.t_burn = 0;
  c.t_record = 40;
  c.n_traj = 3;
  c.linear_shadow = true;
  SpectralSettings s;
  s.t_seg = 10;
  s.thetas = {0.3, 1.0};
  SpectrumReducer r(s);
  EnsembleReducer* rs[] = {&r};
  run_ensemble(p, Representation::PositiveP, c, rs);
  auto e = r.result();
  for (std::size_t k = 0; k < e.omega.size(); ++k) {
    CHECK(e.v0[k] == 1.0);
    CHECK(e.vpi2[k] == 1.0);
    CHECK(e.vtheta[0][k] == 1.0);
    CHECK(e.vtheta[1][k] == 1.0);
    CHECK(e.nl_vpi2[k] == 0.0);
  }
}

TEST_CASE("Wigner empty cavity: output spectrum is the vacuum level") {
  PhysicalParams p{1, 1, 0, {0, 0}};
  IntegratorConfig c;
  c.dt = 0.01;
  c.t_burn = 10;
  c.t_record = 2000;
  c.n_traj = 8;
  SpectralSettings s;
  s.t_seg = 50;
  s.band = 10;
  s.thetas = {0.7};
  SpectrumReducer r(s);
  EnsembleReducer* rs[] = {&r};
  run_ensemble(p, Representation::TruncatedWigner, c, rs);
  auto e = r.result();
  CHECK(e.max_imag < 1e-10);
  for (std::size_t k = 0; k < e.omega.size(); ++k) {
    CHECK(std::abs(e.v0[k] - 1) < 4 * e.v0_se[k]);
    CHECK(std::abs(e.vpi2[k] - 1) < 4 * e.vpi2_se[k]);
    CHECK(std::abs(e.vtheta[0][k] - 1) < 4 * e.vtheta_se[0][k]);
  }
}

TEST_CASE("Wigner spectra need the noise record") {
  auto ens = synthetic(Representation::TruncatedWigner, 0.1, 100, [](std::size_t, RecordFrame&) {});
  ens.info.has_noise = false;
  CHECK_THROWS_AS(squeezing_spectra(ens, {}), ContractError);
}

TEST_CASE("weak coupling: residuals vanish") {
  auto p = physical_from_scaled(1e-8, 1, 0.5);
  IntegratorConfig c;
  c.dt = 0.01;
  c.t_record = 1000;
  c.n_traj = 8;
  c.linear_shadow = true;
  c.scheme = Scheme::EulerMaruyama;
  SpectralSettings s;
  s.t_seg = 100;
  s.band = 8;
  SpectrumReducer r(s);
  EnsembleReducer* rs[] = {&r};
  run_ensemble(p, Representation::PositiveP, c, rs);
  auto e = r.result();
  auto res = nonlinear_residual(e, 0.5);
  auto dif = differenced_residual(e);
  for (std::size_t k = 0; k < res.value.size(); ++k) {
    CHECK(std::abs(res.value[k]) < 3 * res.se[k]);
    CHECK(std::abs(dif.value[k]) < 1e-5);
  }
  e.has_differenced = false;
  CHECK_THROWS_AS(differenced_residual(e), ContractError);
}

TEST_CASE("band averaging") {
  SpectrumEstimate e;
  e.omega = {0.1, 0.3};
  e.band = 2;
  e.d_omega = 0.2;
  auto v = band_average(e, [](double w) { return w; });
  CHECK(v[0] == doctest::Approx(0.1));
  CHECK(v[1] == doctest::Approx(0.5));
}

TEST_CASE("settings validation") {
  SpectralSettings s;
  s.t_seg = 0;
  CHECK_THROWS_AS(validate(s), ParameterError);
  s = {};
  s.band = 0;
  CHECK_THROWS_AS(validate(s), ParameterError);
}

TEST_CASE("intracavity moments") {
  PhysicalParams vac{1, 1, 0.2, {0, 0}};
  IntegratorConfig c;
  c.dt = 0.01;
  c.t_burn = 0;
  c.t_record = 10;
  c.n_traj = 3;
  MomentReducer z;
  EnsembleReducer* zs[] = {&z};
  run_ensemble(vac, Representation::PositiveP, c, zs);
  auto m0 = z.result();
  CHECK(m0.x0.value == 0);
  CHECK(m0.xx.value == 0);
  CHECK(m0.yy.value == 0);
  CHECK(m0.triple.value == 0);
  CHECK(m0.total.value == 1);

  auto p = physical_from_scaled(1e-4, 1, 0.5);
  c.dt = 0.005;
  c.t_burn = 50;
  c.t_record = 1000;
  c.n_traj = 16;
  c.record_interval = 0.05;
  MomentReducer r;
  EnsembleReducer* rs[] = {&r};
  run_ensemble(p, Representation::PositiveP, c, rs);
  auto m = r.result();
  auto ref = moments_plusp(0.5, 1);
  // the second-order pump equation ties depletion to the linear moments
  const double depletion = -(ref.xx1 - ref.yy1);
  CAPTURE(m.x0_2.value);
  CAPTURE(m.xx.value);
  CAPTURE(m.yy.value);
  CAPTURE(m.triple.value);
  CHECK(std::abs(m.x0_2.value - depletion) < 3 * m.x0_2.se);
  CHECK(std::abs(m.xx.value - ref.xx1) < 3 * m.xx.se);
  CHECK(std::abs(m.yy.value - ref.yy1) < 3 * m.yy.se);
  CHECK(std::abs(m.triple.value - ref.triple) < 3 * m.triple.se);
  CHECK(m.trajectories == 16);
}

TEST_CASE("triple estimator: synthetic tones") {
  const double dt = 0.1, T = 6.4;
  const std::size_t n = 64;
  const cplx A(0.5, 0.2), B(-0.3, 0.4), C(1.1, -0.6);
  const int k1 = 2, k2 = -3, k3 = 1;
  auto ens = synthetic(Representation::PositiveP, dt, 2 * n, [&](std::size_t i, RecordFrame& f) {
    double w = 2 * pi * static_cast<double>(i % n) / n;
    f.mean.X = A * std::polar(1.0, -k1 * w) + 0.7;  // constant offsets must not leak
    f.mean.Yp = B * std::polar(1.0, -k2 * w);
    f.mean.Y0 = C * std::polar(1.0, -k3 * w) - 0.2;
  });
  auto e = triple_spectrum(ens, square_triple_grid(4, T));
  const double scale3 = std::sqrt(2 * 0.5);  // y0 = g sqrt(2 gr) Y0
  for (std::size_t j = 0; j < e.value.size(); ++j) {
    int a = static_cast<int>(std::lround(e.omega1[j] * T / (2 * pi)));
    int b = static_cast<int>(std::lround(e.omega2[j] * T / (2 * pi)));
    cplx expect = (a == k1 && b == k2) ? T * T * A * B * C * scale3 / std::sqrt(2 * pi) : 0.0;
    CAPTURE(a);
    CAPTURE(b);
    CHECK(std::abs(e.value[j] - expect) < 1e-10);
  }
  CHECK_THROWS_AS(triple_spectrum(ens, square_triple_grid(40, T)), ParameterError);
}

TEST_CASE("triple estimator: +P vacuum and Wigner conjugate symmetry") {
  PhysicalParams vac{1, 1, 0.2, {0, 0}};
  IntegratorConfig c;
  c.dt = 0.01;
  c.t_burn = 0;
  c.t_record = 40;
  c.n_traj = 2;
  c.record_interval = 0.05;
  TripleReducer z(square_triple_grid(2, 10));
  EnsembleReducer* zs[] = {&z};
  run_ensemble(vac, Representation::PositiveP, c, zs);
  for (auto v : z.result().value) CHECK(std::abs(v) == 0);

  auto p = physical_from_scaled(0.04, 1, 0.0);
  c.t_burn = 10;
  c.t_record = 2000;
  c.n_traj = 8;
  TripleReducer w(square_triple_grid(2, 10));
  EnsembleReducer* ws[] = {&w};
  run_ensemble(p, Representation::TruncatedWigner, c, ws);
  auto e = w.result();
  std::size_t m = e.value.size();
  double z2 = 0;
  int pairs = 0;
  for (std::size_t j = 0; j <= m / 2; ++j) {
    std::size_t k = m - 1 - j;  // (-k1, -k2) on the symmetric square grid
    CHECK(e.omega1[k] == doctest::Approx(-e.omega1[j]));
    double se = j == k ? 2 * e.se_im[j] : std::hypot(e.se[j], e.se[k]);
    z2 += std::norm(e.value[j] - std::conj(e.value[k])) / (se * se);
    ++pairs;
  }
  CHECK(std::sqrt(z2 / pairs) < 2.0);
}

}
