#include <array>
#include <cmath>
#include <numbers>

#include "fft_util.hpp"
#include "nopo/errors.hpp"
#include "nopo/spectra.hpp"

namespace nopo {

using detail::FftBuffer;
using detail::FftPlan;

TripleGrid square_triple_grid(int half, double t_seg) {
  if (half < 0) throw ParameterError("triple grid half-width must be >= 0");
  TripleGrid g;
  g.t_seg = t_seg;
  for (int k1 = -half; k1 <= half; ++k1)
    for (int k2 = -half; k2 <= half; ++k2) g.bins.emplace_back(k1, k2);
  return g;
}

namespace {

struct Bin {
  std::array<std::size_t, 3> idx;  // DFT indices of a, b, c
  unsigned zero = 0;               // bit i set when factor i sits at DFT index 0
  std::size_t slot = 0;            // position among zero-index bins
};

// Subset masks of `zero`, including the empty one.
template <class F>
void for_subsets(unsigned zero, F f) {
  for (unsigned s = zero;; s = (s - 1) & zero) {
    f(s);
    if (s == 0) break;
  }
}

}  // namespace

struct TripleReducer::Impl {
  TripleGrid grid;
  RunInfo info;
  std::size_t n = 0;
  double norm = 0.0, d_omega = 0.0;
  std::array<double, 3> scale{};
  std::unique_ptr<FftPlan> plan;
  std::vector<Bin> bins;
  std::size_t n_zero = 0;

  std::vector<MeanAcc> acc_re, acc_im;
  struct Deferred {
    double nseg;
    std::array<cplx, 3> f0;
    std::vector<std::array<cplx, 8>> sums;  // per zero-index bin, per subset mask
  };
  std::vector<Deferred> deferred;
  std::size_t trajectories = 0, segments = 0;

  struct Consumer : FrameConsumer {
    Impl* im;
    std::array<FftBuffer, 3> buf;
    std::size_t pos = 0, nseg = 0;
    std::vector<cplx> sum;  // plain triple products, all bins
    Deferred d{};

    explicit Consumer(Impl* i) : im(i), buf{FftBuffer(i->n), FftBuffer(i->n), FftBuffer(i->n)} {
      sum.assign(im->bins.size(), 0.0);
      d.sums.assign(im->n_zero, {});
    }

    void on_frame(const RecordFrame& f) override {
      buf[0][pos] = im->scale[0] * f.mean.X;
      buf[1][pos] = im->scale[1] * f.mean.Yp;
      buf[2][pos] = im->scale[2] * f.mean.Y0;
      if (++pos == im->n) {
        segment();
        pos = 0;
      }
    }

    void segment() {
      for (auto& b : buf) im->plan->execute(b.data());
      for (int i = 0; i < 3; ++i) d.f0[i] += buf[i][0];
      for (std::size_t j = 0; j < im->bins.size(); ++j) {
        const Bin& b = im->bins[j];
        std::array<cplx, 3> v{buf[0][b.idx[0]], buf[1][b.idx[1]], buf[2][b.idx[2]]};
        if (b.zero == 0) {
          sum[j] += v[0] * v[1] * v[2];
          continue;
        }
        for_subsets(b.zero, [&](unsigned s) {
          cplx p = 1.0;
          for (int i = 0; i < 3; ++i)
            if (!(s & (1u << i))) p *= v[i];
          d.sums[b.slot][s] += p;
        });
      }
      ++nseg;
    }
  };
};

TripleReducer::TripleReducer(TripleGrid grid) : impl_(std::make_unique<Impl>()) {
  if (grid.bins.empty()) throw ParameterError("triple grid is empty");
  if (!(grid.t_seg > 0)) throw ParameterError("triple grid t_seg must be > 0");
  impl_->grid = std::move(grid);
}

TripleReducer::~TripleReducer() = default;

void TripleReducer::begin(const RunInfo& info) {
  Impl& im = *impl_;
  im.info = info;
  double r = im.grid.t_seg / info.record_interval;
  im.n = static_cast<std::size_t>(std::llround(r));
  if (im.n < 2 || std::abs(r - static_cast<double>(im.n)) > 1e-6 * r)
    throw ParameterError("triple t_seg must be a multiple (>= 2) of the record interval");
  const double dt = info.record_interval;
  im.norm = dt * dt * dt / (im.grid.t_seg * std::sqrt(2.0 * std::numbers::pi));
  im.d_omega = 2.0 * std::numbers::pi / im.grid.t_seg;
  const double g = info.scaled.g;
  im.scale = {g, g, g * std::sqrt(2.0 * info.scaled.gamma_r)};
  im.plan = std::make_unique<FftPlan>(im.n);

  const long nl = static_cast<long>(im.n);
  auto wrap = [&](long k) {
    if (2 * std::abs(k) > nl) throw ParameterError("triple grid exceeds the Nyquist frequency");
    return static_cast<std::size_t>(((k % nl) + nl) % nl);
  };
  im.bins.clear();
  im.n_zero = 0;
  for (auto [k1, k2] : im.grid.bins) {
    Bin b;
    long k3 = -static_cast<long>(k1) - k2;
    b.idx = {wrap(k1), wrap(k2), wrap(k3)};
    for (int i = 0; i < 3; ++i)
      if (b.idx[i] == 0) b.zero |= 1u << i;
    if (b.zero) b.slot = im.n_zero++;
    im.bins.push_back(b);
  }
  im.acc_re.assign(im.bins.size(), MeanAcc{});
  im.acc_im = im.acc_re;
  im.deferred.clear();
  im.trajectories = im.segments = 0;
}

std::unique_ptr<FrameConsumer> TripleReducer::start(std::size_t) {
  return std::make_unique<Impl::Consumer>(impl_.get());
}

void TripleReducer::finish(std::size_t, std::unique_ptr<FrameConsumer> c, bool faulted) {
  Impl& im = *impl_;
  auto* t = static_cast<Impl::Consumer*>(c.get());
  if (faulted || t->nseg == 0) return;
  double ns = static_cast<double>(t->nseg);
  for (std::size_t j = 0; j < im.bins.size(); ++j) {
    if (im.bins[j].zero) continue;
    cplx v = t->sum[j] * im.norm / ns;
    im.acc_re[j].add(v.real());
    im.acc_im[j].add(v.imag());
  }
  t->d.nseg = ns;
  im.deferred.push_back(std::move(t->d));
  im.segments = t->nseg;
  ++im.trajectories;
}

TripleCorrEstimate TripleReducer::result() const {
  const Impl& im = *impl_;
  if (im.trajectories == 0) throw EstimationError("no completed trajectory produced a full segment");
  std::array<cplx, 3> c{};
  double total = 0.0;
  for (const auto& d : im.deferred) {
    for (int i = 0; i < 3; ++i) c[i] += d.f0[i];
    total += d.nseg;
  }
  // n times the global mean: what F[0] of a segment would hold for a constant series
  for (auto& v : c) v /= total;

  auto re = im.acc_re;
  auto ri = im.acc_im;
  for (const auto& d : im.deferred) {
    for (std::size_t j = 0; j < im.bins.size(); ++j) {
      const Bin& b = im.bins[j];
      if (!b.zero) continue;
      cplx v = 0.0;
      for_subsets(b.zero, [&](unsigned s) {
        cplx w = d.sums[b.slot][s];
        for (int i = 0; i < 3; ++i)
          if (s & (1u << i)) w *= -c[i];
        v += w;
      });
      v *= im.norm / d.nseg;
      re[j].add(v.real());
      ri[j].add(v.imag());
    }
  }

  TripleCorrEstimate e;
  e.trajectories = im.trajectories;
  e.segments = im.segments;
  for (std::size_t j = 0; j < im.bins.size(); ++j) {
    auto [k1, k2] = im.grid.bins[j];
    e.omega1.push_back(k1 * im.d_omega);
    e.omega2.push_back(k2 * im.d_omega);
    Estimate a = re[j].get(), b = ri[j].get();
    e.value.emplace_back(a.value, b.value);
    e.se_re.push_back(a.se);
    e.se_im.push_back(b.se);
    e.se.push_back(std::hypot(a.se, b.se));
  }
  return e;
}

TripleCorrEstimate triple_spectrum(const EnsembleResult& ens, const TripleGrid& grid) {
  TripleReducer r(grid);
  EnsembleReducer* rs[] = {&r};
  replay(ens, rs);
  return r.result();
}

}  // namespace nopo
