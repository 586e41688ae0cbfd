// Walkthrough of the rate-distortion planner.
//
// Builds a two-sensor instance of the causal tracking problem, sweeps the
// distortion target across the feasible window, and prints the four rate
// expressions side by side; then zooms into one target and shows the full
// per-channel allocation together with the quantizer noises that realize it.
//
// Build and run:
//   cmake --build build && ./build/demos/rate_allocation_demo

#include <cstdio>

#include "ceorate/model.hpp"
#include "ceorate/rdf.hpp"
#include "ceorate/sim.hpp"

using namespace ceorate;

int main() {
  // A persistent source tracked through two sensors of unequal quality.
  const SourceModel model{0.8, 0.36};
  const ChannelSet channels{{0.5, 2.0}};
  const SteadyState ss = steady_state(model, channels);

  std::printf("source: x' = %.2f x + v, Var v = %.2f  (Var x = %.4f)\n",
              model.a, model.sigma_v2, ss.sigma_x2.variance());
  std::printf("sensors: Var w = {%.2f, %.2f}\n", channels.sigma_w2[0],
              channels.sigma_w2[1]);
  std::printf("per-sensor filtered error: s = {%.6f, %.6f}\n", ss.ch[0].s,
              ss.ch[1].s);
  std::printf("joint filtered error: %.6f (riccati), %.6f (fusion)\n\n",
              ss.s_joint_riccati, ss.s_joint_fusion);

  // Sweep the target from just above the joint error to just below the
  // source variance: the window where positive finite rates are needed.
  std::printf("%8s %10s %10s %10s %10s\n", "d", "direct", "remote", "ceo",
              "waterfill");
  const double lo = 1.02 * ss.joint_mmse(JointMode::kRiccati);
  const double hi = 0.95 * ss.sigma_x2.variance();
  for (int i = 0; i < 8; ++i) {
    const double d = lo + (hi - lo) * i / 7.0;
    const RdfQuery q{model, channels, d, JointMode::kRiccati, RateUnit::kBits};
    std::printf("%8.4f %10.4f %10.4f %10.4f %10.4f\n", d, direct_rdf(q),
                remote_rdf(q), ceo_rdf(q).rate, waterfilling(q).rate);
  }

  // Full allocation at one target: how the sum rate splits across sensors,
  // and the test-channel noises a quantizer designer would calibrate to.
  const double d = 0.5 * (lo + hi);
  const RdfQuery q{model, channels, d, JointMode::kRiccati, RateUnit::kBits};
  const RdfResult plan = ceo_rdf(q);
  std::printf("\nallocation at d = %.4f (%.4f bits total):\n", d, plan.rate);
  for (std::size_t k = 0; k < channels.size(); ++k) {
    std::printf("  sensor %zu: d_k = %.6f, rate term = %.4f bits, "
                "quantizer noise = %.6f\n",
                k + 1, plan.alloc.d_k[k], plan.alloc.rate_terms[k],
                sigma_z2_from_dk(ss, k, plan.alloc.d_k[k]));
  }

  // The price of isolation: the gap to remote coding never exceeds what the
  // sufficient condition promises.
  const LossReport loss = loss_bound(q);
  std::printf("\ncooperation loss: %.4f bits <= %.4f bits (condition %s)\n",
              loss.lhs, loss.rhs, loss.condition_holds ? "holds" : "open");
  return 0;
}
