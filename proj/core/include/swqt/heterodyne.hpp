#pragma once

#include <stdexcept>

#include "swqt/increments.hpp"
#include "swqt/rng.hpp"
#include "swqt/series.hpp"

namespace swqt {

/// A diffusive step produced a first-moment kick too large for the
/// small-rotation transport (|dbeta_i| > 0.5); the step (and trajectory) is
/// invalid rather than silently inaccurate.
struct StepRejectedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HeterodyneOptions {
    double dt = 1e-4;
    double t_final = 1.0;
    int record_every = 100;  // steps between records; t=0 always recorded
};

/// Fixed-step Euler-Maruyama driver for the diffusive (heterodyne) unraveling.
class HeterodyneIntegrator {
  public:
    explicit HeterodyneIntegrator(const ModelSpec& spec);

    const ModelSpec& spec() const { return spec_; }
    const CouplingMatrix& coupling() const { return cm_; }

    /// One Euler-Maruyama step: draws dZ from the stream, applies the moment
    /// increments, transports the frames, enforces u = u^T and v = v^dag.
    void step(GaussianTrajectoryState& state, NoiseStream& noise, double dt) const;

    /// One nominal-dt interval with automatic refinement: a rejected step is
    /// retried as 8 substeps with fresh noise, up to two levels deep.
    void advance(GaussianTrajectoryState& state, NoiseStream& noise, double dt,
                 int depth) const;

    /// Integrate to t_final recording every record_every steps.
    ObservableSeries run(GaussianTrajectoryState state, const HeterodyneOptions& opt,
                         NoiseStream& noise) const;

  private:
    ModelSpec spec_;
    CouplingMatrix cm_;
    HeterodyneWorkspace ws_;
};

}  // namespace swqt
