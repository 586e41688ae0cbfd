// Walkthrough of the closed-loop tracking simulator.
//
// Plans the optimal two-sensor allocation for a distortion target, realizes
// it with additive test-channel noise, and runs the decoder filter against
// sampled trajectories: first a short trace to show the moving parts, then
// a long run to confirm the empirical error lands on the prediction.
//
// Build and run:
//   cmake --build build && ./build/demos/tracking_demo

#include <cstdio>

#include <vector>

#include "ceorate/model.hpp"
#include "ceorate/rdf.hpp"
#include "ceorate/sim.hpp"

using namespace ceorate;

int main() {
  const SourceModel model{0.9, 0.19};
  const ChannelSet channels{{1.0, 1.0}};
  const SteadyState ss = steady_state(model, channels);

  // Plan: split the sum rate optimally at a mid-window target, then solve
  // each branch for the quantizer noise that produces its share.  The
  // fusion convention is the one whose per-channel targets recombine into
  // the joint target in closed form, so it is the natural planning mode.
  const double d = 0.5 * (ss.joint_mmse(JointMode::kFusion) +
                          ss.sigma_x2.variance());
  const RdfResult plan =
      ceo_rdf({model, channels, d, JointMode::kFusion, RateUnit::kBits});
  std::vector<double> sigma_z2;
  for (std::size_t k = 0; k < channels.size(); ++k) {
    sigma_z2.push_back(sigma_z2_from_dk(ss, k, plan.alloc.d_k[k]));
  }
  std::printf("target d = %.4f at %.4f bits per step\n", d, plan.rate);
  std::printf("quantizer noises: {%.4f, %.4f}\n\n", sigma_z2[0], sigma_z2[1]);

  // A short trace: state, decoder estimate, and squared error per step.
  std::printf("%4s %9s %9s %9s\n", "step", "x", "xhat", "sq err");
  for (const TraceRow& row : simulate_trace(model, channels, sigma_z2, 12, 7)) {
    std::printf("%4lld %9.4f %9.4f %9.4f\n", row.step, row.x, row.xhat,
                row.sq_err);
  }

  // Two exact checks close the loop.  First, the per-branch targets
  // recombine into the planned joint target under the precision-additive
  // rule -- that identity is what the fusion-mode planner optimizes.
  // Second, the long-run empirical error must land on the decoder filter's
  // closed-form steady value.  For a memoryless source the two numbers
  // coincide; with memory the transmitted branch estimates are correlated
  // through the shared state history, so the causal decoder's error sits
  // apart from the one-shot recombination.
  double combined_prec =
      -static_cast<double>(channels.size() - 1) * ss.sigma_x2.precision();
  for (double d_k : plan.alloc.d_k) combined_prec += 1.0 / d_k;
  const double predicted =
      exact_decoder_mmse(build_augmented(model, channels), sigma_z2);
  SimOptions opt;
  opt.trials = 400;
  opt.steps = 800;
  opt.seed = 7;
  const SimReport rep = simulate(model, channels, sigma_z2, opt);
  std::printf("\nplanned distortion:     %.6f\n", d);
  std::printf("recombined branches:    %.6f\n", 1.0 / combined_prec);
  std::printf("decoder steady error:   %.6f\n", predicted);
  std::printf("empirical error:        %.6f +/- %.6f (%lld trials x %lld steps)\n",
              rep.empirical_mse, rep.std_error, rep.trials, rep.steps);
  return 0;
}
