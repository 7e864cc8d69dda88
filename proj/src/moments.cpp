#include <cmath>

#include "nopo/errors.hpp"
#include "nopo/spectra.hpp"

namespace nopo {

struct MomentReducer::Impl {
  RunInfo info;
  MeanAcc x0, xx, yy, triple;
  std::size_t trajectories = 0, samples = 0;

  struct Consumer : FrameConsumer {
    double x0 = 0, xx = 0, yy = 0, triple = 0;
    std::size_t n = 0;
    void on_frame(const RecordFrame& f) override {
      const Quadratures& q = f.point;
      x0 += q.X0.real();
      xx += (q.X * q.Xp).real();
      yy += (q.Y * q.Yp).real();
      triple += (q.X * q.Yp * q.Y0).real();
      ++n;
    }
  };
};

MomentReducer::MomentReducer() : impl_(std::make_unique<Impl>()) {}
MomentReducer::~MomentReducer() = default;

void MomentReducer::begin(const RunInfo& info) {
  *impl_ = Impl{};
  impl_->info = info;
}

std::unique_ptr<FrameConsumer> MomentReducer::start(std::size_t) { return std::make_unique<Impl::Consumer>(); }

void MomentReducer::finish(std::size_t, std::unique_ptr<FrameConsumer> c, bool faulted) {
  auto* t = static_cast<Impl::Consumer*>(c.get());
  if (faulted || t->n == 0) return;
  Impl& im = *impl_;
  double n = static_cast<double>(t->n);
  im.x0.add(t->x0 / n);
  im.xx.add(t->xx / n);
  im.yy.add(t->yy / n);
  im.triple.add(t->triple / n);
  ++im.trajectories;
  im.samples += t->n;
}

MomentEstimate MomentReducer::result() const {
  const Impl& im = *impl_;
  if (im.trajectories == 0) throw EstimationError("no completed trajectory recorded a frame");
  const double g = im.info.scaled.g;
  const double mu = im.info.scaled.mu;
  const double s0 = g * std::sqrt(2.0 * im.info.scaled.gamma_r);
  auto scale = [](Estimate e, double k, double shift = 0.0) {
    return Estimate{k * e.value + shift, std::abs(k) * e.se};
  };
  MomentEstimate m;
  m.trajectories = im.trajectories;
  m.samples = im.samples;
  m.x0 = scale(im.x0.get(), s0);
  m.xx = im.xx.get();
  m.yy = im.yy.get();
  m.xx_scaled = scale(m.xx, g * g);
  m.total = scale(m.yy, 1.0, im.info.rep == Representation::PositiveP ? 1.0 : 0.0);
  if (g > 0) {
    m.x0_2 = scale(m.x0, 1.0 / (g * g), -2.0 * mu / (g * g));
    m.triple = scale(im.triple.get(), std::sqrt(2.0 * im.info.scaled.gamma_r) / g);
  } else {
    double nan = std::nan("");
    m.x0_2 = m.triple = Estimate{nan, nan};
  }
  return m;
}

MomentEstimate intracavity_moments(const EnsembleResult& ens) {
  MomentReducer r;
  EnsembleReducer* rs[] = {&r};
  replay(ens, rs);
  return r.result();
}

}  // namespace nopo
