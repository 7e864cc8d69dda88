#include "nopo/spectra.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fft_util.hpp"
#include "nopo/analytic.hpp"
#include "nopo/errors.hpp"
#include "output_field.hpp"

namespace nopo {

using detail::FftBuffer;
using detail::FftPlan;

Estimate MeanAcc::get() const {
  Estimate e;
  e.value = n > 0.0 ? mean : 0.0;
  e.se = n > 1.0 ? std::sqrt(m2 / (n - 1.0) / n) : std::numeric_limits<double>::quiet_NaN();
  return e;
}

void validate(const SpectralSettings& s) {
  if (!(s.t_seg > 0.0)) throw ParameterError("spectral.t_seg must be > 0");
  if (!(s.omega_max > 0.0)) throw ParameterError("spectral.omega_max must be > 0");
  if (s.band < 1) throw ParameterError("spectral.band must be >= 1");
}

namespace {

std::size_t samples_per_segment(double t_seg, double dt_record) {
  double r = t_seg / dt_record;
  auto n = static_cast<std::size_t>(std::llround(r));
  if (n < 2 || std::abs(r - static_cast<double>(n)) > 1e-6 * r)
    throw ParameterError("t_seg must be a multiple (>= 2) of the record interval");
  return n;
}

std::size_t last_bin(double omega_max, double d_omega, std::size_t n) {
  std::size_t kmax = omega_max < 0.0 ? n / 2 : static_cast<std::size_t>(std::floor(omega_max / d_omega + 1e-9));
  if (kmax > n / 2) throw ParameterError("omega_max exceeds the Nyquist frequency of the record");
  return kmax;
}

}  // namespace

CrossSpectrum cross_spectrum(const std::vector<cplx>& a, const std::vector<cplx>& b, double dt_record, double t_seg,
                             double omega_max) {
  if (a.size() != b.size()) throw ContractError("cross_spectrum series lengths differ");
  if (!(dt_record > 0.0)) throw ParameterError("dt_record must be > 0");
  std::size_t n = samples_per_segment(t_seg, dt_record);
  std::size_t nseg = a.size() / n;
  if (nseg == 0) throw EstimationError("series shorter than one segment");
  double d_omega = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt_record);
  std::size_t kmax = last_bin(omega_max, d_omega, n);

  cplx ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < nseg * n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(nseg * n);
  mb /= static_cast<double>(nseg * n);

  FftPlan plan(n);
  FftBuffer fa(n), fb(n);
  CrossSpectrum out;
  out.segments = nseg;
  out.value.assign(kmax + 1, 0.0);
  for (std::size_t s = 0; s < nseg; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      fa[i] = a[s * n + i] - ma;
      fb[i] = b[s * n + i] - mb;
    }
    plan.execute(fa.data());
    plan.execute(fb.data());
    for (std::size_t k = 0; k <= kmax; ++k) out.value[k] += fa[k] * fb[(n - k) % n];
  }
  double c = dt_record * dt_record / (t_seg * static_cast<double>(nseg));
  for (std::size_t k = 0; k <= kmax; ++k) {
    out.value[k] *= c;
    out.omega.push_back(static_cast<double>(k) * d_omega);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int XO = 0, YO = 1, XOP = 2, YOP = 3;

struct Channel {
  double cxx, cyy, ccr;
  bool diff;
  double base;
};

// Per-trajectory raw sums for one (full or shadow) set of four series.
struct K0Sums {
  std::array<cplx, 4> f{};  // sum over segments of F_s[0]
  std::array<cplx, 4> p{};  // xx, yy, xy, yx products at k = 0
};

}  // namespace

struct SpectrumReducer::Impl {
  SpectralSettings set;
  RunInfo info;
  std::size_t n = 0, kmax = 0, nbands = 0;
  double d_omega = 0.0, dt_rec = 0.0, norm = 0.0;
  bool shadow = false;
  std::unique_ptr<FftPlan> plan;
  std::vector<Channel> chans;
  OutputFieldBuilder builder;

  // Bands >= 1 stream into accumulators; band 0 needs global k = 0 means.
  std::vector<std::vector<MeanAcc>> acc;  // [channel][band]
  struct Band0 {
    std::size_t nseg;
    std::vector<double> partial;  // per channel, bins 1..band-1 (already normalised)
    K0Sums full, sh;
  };
  std::vector<Band0> band0;
  std::size_t segments = 0;
  std::size_t trajectories = 0;
  double max_imag = 0.0;

  struct Consumer : FrameConsumer {
    Impl* im;
    std::vector<FftBuffer> buf;
    std::size_t pos = 0, nseg = 0;
    std::vector<double> xx, yy, cr, sxx, syy, scr;
    K0Sums k0, sk0;
    double max_imag = 0.0;

    explicit Consumer(Impl* i) : im(i) {
      std::size_t ns = im->shadow ? 8 : 4;
      for (std::size_t s = 0; s < ns; ++s) buf.emplace_back(im->n);
      std::size_t nk = im->kmax + 1;
      xx.assign(nk, 0.0);
      yy = cr = xx;
      if (im->shadow) sxx = syy = scr = xx;
    }

    void on_frame(const RecordFrame& f) override {
      auto o = im->builder(f.mean, f.noise);
      for (int s = 0; s < 4; ++s) buf[s][pos] = o[s];
      if (im->shadow) {
        auto so = im->builder(f.shadow_mean, f.noise);
        for (int s = 0; s < 4; ++s) buf[4 + s][pos] = so[s];
      }
      if (++pos == im->n) {
        segment();
        pos = 0;
      }
    }

    void accumulate(int off, std::vector<double>& axx, std::vector<double>& ayy, std::vector<double>& acr, K0Sums& z,
                    bool track) {
      const std::size_t n = im->n;
      const auto& X = buf[off + XO];
      const auto& Y = buf[off + YO];
      const auto& Xp = buf[off + XOP];
      const auto& Yp = buf[off + YOP];
      for (int s = 0; s < 4; ++s) z.f[s] += buf[off + s][0];
      z.p[0] += X[0] * Xp[0];
      z.p[1] += Y[0] * Yp[0];
      z.p[2] += X[0] * Yp[0];
      z.p[3] += Y[0] * Xp[0];
      for (std::size_t k = 1; k <= im->kmax; ++k) {
        std::size_t m = n - k;
        cplx pxx = 0.5 * (X[k] * Xp[m] + X[m] * Xp[k]);
        cplx pyy = 0.5 * (Y[k] * Yp[m] + Y[m] * Yp[k]);
        cplx pcr = 0.5 * (X[k] * Yp[m] + X[m] * Yp[k] + Y[k] * Xp[m] + Y[m] * Xp[k]);
        axx[k] += pxx.real();
        ayy[k] += pyy.real();
        acr[k] += pcr.real();
        if (track) {
          double r = std::abs(pxx.imag()) / (std::abs(pxx.real()) + 1e-300);
          double q = std::abs(pyy.imag()) / (std::abs(pyy.real()) + 1e-300);
          max_imag = std::max({max_imag, r, q});
        }
      }
    }

    void segment() {
      for (auto& b : buf) im->plan->execute(b.data());
      bool track = im->info.rep == Representation::TruncatedWigner;
      accumulate(0, xx, yy, cr, k0, track);
      if (im->shadow) accumulate(4, sxx, syy, scr, sk0, false);
      ++nseg;
    }
  };

  // Channel value summed over DFT bins [k0, k1), per segment, normalised.
  double chan_sum(const Channel& c, const Consumer& t, std::size_t k0, std::size_t k1) const {
    double s = 0.0;
    for (std::size_t k = k0; k < k1; ++k) {
      double v = c.cxx * t.xx[k] + c.cyy * t.yy[k] + c.ccr * t.cr[k];
      if (c.diff) v -= c.cxx * t.sxx[k] + c.cyy * t.syy[k] + c.ccr * t.scr[k];
      s += v;
    }
    return s * norm / static_cast<double>(t.nseg);
  }

  static double k0_value(const Channel& c, const K0Sums& z, const std::array<cplx, 4>& m, double nseg) {
    auto corr = [&](int i, int a, int b) {
      return z.p[i] - m[a] * z.f[b] - m[b] * z.f[a] + nseg * m[a] * m[b];
    };
    cplx xx = corr(0, XO, XOP), yy = corr(1, YO, YOP);
    cplx cr = corr(2, XO, YOP) + corr(3, YO, XOP);
    return c.cxx * xx.real() + c.cyy * yy.real() + c.ccr * cr.real();
  }
};

SpectrumReducer::SpectrumReducer(SpectralSettings s) : impl_(std::make_unique<Impl>()) {
  validate(s);
  impl_->set = std::move(s);
}

SpectrumReducer::~SpectrumReducer() = default;

void SpectrumReducer::begin(const RunInfo& info) {
  Impl& im = *impl_;
  im.info = info;
  im.dt_rec = info.record_interval;
  im.n = samples_per_segment(im.set.t_seg, im.dt_rec);
  im.d_omega = 2.0 * std::numbers::pi / im.set.t_seg;
  im.kmax = last_bin(im.set.omega_max, im.d_omega, im.n);
  im.nbands = (im.kmax + 1) / im.set.band;
  if (im.nbands == 0) throw ParameterError("spectral.band wider than the frequency range");
  im.norm = im.dt_rec * im.dt_rec / im.set.t_seg;
  im.shadow = info.has_shadow;
  if (info.rep == Representation::TruncatedWigner && !info.has_noise)
    throw ContractError("Wigner spectra need the recorded input noise");
  im.builder = OutputFieldBuilder(info.rep, im.dt_rec);
  im.plan = std::make_unique<FftPlan>(im.n);

  double base = info.rep == Representation::PositiveP ? 1.0 : 0.0;
  im.chans = {{1, 0, 0, false, base}, {0, 1, 0, false, base}};
  for (double th : im.set.thetas) {
    double c = std::cos(th), s = std::sin(th);
    im.chans.push_back({c * c, s * s, c * s, false, base});
  }
  if (im.shadow) {
    im.chans.push_back({1, 0, 0, true, 0.0});
    im.chans.push_back({0, 1, 0, true, 0.0});
  }
  im.acc.assign(im.chans.size(), std::vector<MeanAcc>(im.nbands));
  im.band0.clear();
  im.segments = im.trajectories = 0;
  im.max_imag = 0.0;
}

std::unique_ptr<FrameConsumer> SpectrumReducer::start(std::size_t) {
  return std::make_unique<Impl::Consumer>(impl_.get());
}

void SpectrumReducer::finish(std::size_t, std::unique_ptr<FrameConsumer> c, bool faulted) {
  Impl& im = *impl_;
  auto* t = static_cast<Impl::Consumer*>(c.get());
  if (faulted || t->nseg == 0) return;
  std::size_t B = im.set.band;
  double bd = static_cast<double>(B);
  Impl::Band0 b0;
  b0.nseg = t->nseg;
  b0.full = t->k0;
  b0.sh = t->sk0;
  for (std::size_t ci = 0; ci < im.chans.size(); ++ci) {
    const Channel& ch = im.chans[ci];
    b0.partial.push_back(im.chan_sum(ch, *t, 1, B));
    for (std::size_t b = 1; b < im.nbands; ++b) im.acc[ci][b].add(ch.base + im.chan_sum(ch, *t, b * B, (b + 1) * B) / bd);
  }
  im.band0.push_back(std::move(b0));
  im.segments = t->nseg;
  ++im.trajectories;
  im.max_imag = std::max(im.max_imag, t->max_imag);
}

SpectrumEstimate SpectrumReducer::result() const {
  const Impl& im = *impl_;
  SpectrumEstimate e;
  e.rep = im.info.rep;
  e.t_seg = im.set.t_seg;
  e.d_omega = im.d_omega;
  e.band = im.set.band;
  e.segments = im.segments;
  e.trajectories = im.trajectories;
  e.thetas = im.set.thetas;
  e.has_differenced = im.shadow;
  e.max_imag = im.max_imag;
  if (im.trajectories == 0) throw EstimationError("no completed trajectory produced a full segment");

  // Global k = 0 means over every segment of every trajectory.
  std::array<cplx, 4> mf{}, ms{};
  double total = 0.0;
  for (const auto& b : im.band0) {
    for (int s = 0; s < 4; ++s) {
      mf[s] += b.full.f[s];
      ms[s] += b.sh.f[s];
    }
    total += static_cast<double>(b.nseg);
  }
  for (int s = 0; s < 4; ++s) {
    mf[s] /= total;
    ms[s] /= total;
  }

  std::vector<std::vector<MeanAcc>> acc = im.acc;
  double bd = static_cast<double>(im.set.band);
  for (const auto& b : im.band0) {
    double ns = static_cast<double>(b.nseg);
    for (std::size_t ci = 0; ci < im.chans.size(); ++ci) {
      const Channel& ch = im.chans[ci];
      double v0 = Impl::k0_value(ch, b.full, mf, ns);
      if (ch.diff) v0 -= Impl::k0_value(ch, b.sh, ms, ns);
      v0 *= im.norm / ns;
      acc[ci][0].add(ch.base + (v0 + b.partial[ci]) / bd);
    }
  }

  std::size_t nb = im.nbands;
  for (std::size_t b = 0; b < nb; ++b) {
    double w = 0.0;
    for (std::size_t j = 0; j < im.set.band; ++j) w += static_cast<double>(b * im.set.band + j) * im.d_omega;
    e.omega.push_back(w / bd);
  }
  auto fill = [&](std::size_t ci, std::vector<double>& v, std::vector<double>& se) {
    v.resize(nb);
    se.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      Estimate x = acc[ci][b].get();
      v[b] = x.value;
      se[b] = x.se;
    }
  };
  fill(0, e.v0, e.v0_se);
  fill(1, e.vpi2, e.vpi2_se);
  e.vtheta.resize(e.thetas.size());
  e.vtheta_se.resize(e.thetas.size());
  for (std::size_t i = 0; i < e.thetas.size(); ++i) fill(2 + i, e.vtheta[i], e.vtheta_se[i]);
  if (im.shadow) {
    std::size_t c0 = 2 + e.thetas.size();
    fill(c0, e.nl_v0, e.nl_v0_se);
    fill(c0 + 1, e.nl_vpi2, e.nl_vpi2_se);
  }
  return e;
}

SpectrumEstimate squeezing_spectra(const EnsembleResult& ens, const SpectralSettings& s) {
  if (ens.info.rep == Representation::TruncatedWigner && !ens.info.has_noise)
    throw ContractError("Wigner spectra need the recorded input noise");
  SpectrumReducer r(s);
  EnsembleReducer* rs[] = {&r};
  replay(ens, rs);
  return r.result();
}

Residual nonlinear_residual(const SpectrumEstimate& est, double mu) {
  auto lin = band_average(est, [mu](double w) { return linear_spectra(mu, w).vpi2; });
  Residual r{est.omega, est.vpi2, est.vpi2_se};
  for (std::size_t i = 0; i < r.value.size(); ++i) r.value[i] -= lin[i];
  return r;
}

Residual differenced_residual(const SpectrumEstimate& est) {
  if (!est.has_differenced) throw ContractError("estimate has no linearised companion");
  return {est.omega, est.nl_vpi2, est.nl_vpi2_se};
}

}  // namespace nopo
