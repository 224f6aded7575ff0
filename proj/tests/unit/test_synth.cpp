#include <gtest/gtest.h>

#include "oracles.hpp"
#include "spinerect/spinerect.hpp"

using namespace spinerect;

TEST(Synth, CleanStraightEqualsRenderOfTruth) {
  PhantomSpec spec;
  spec.seed = 9;
  const Phantom p = generate(spec);
  EXPECT_EQ(p.stack, render_gaussians(p.truth, p.stack.geometry(), spec.sigma_mm).stack);
  for (const auto& a : p.truth) {
    EXPECT_NEAR(a.center.x, 0.0, 1e-12);
    EXPECT_NEAR(a.center.y, 0.0, 1e-12);
  }
}

TEST(Synth, Deterministic) {
  PhantomSpec spec;
  spec.seed = 77;
  spec.curve.amplitude_mm = 20;
  spec.noise.label_shift_prob = 0.3;
  spec.noise.dropout_prob = 0.1;
  spec.noise.jitter_sigma_mm = 2.0;
  spec.noise.background_noise = 0.1;
  const Phantom a = generate(spec), b = generate(spec);
  EXPECT_EQ(a.stack, b.stack);
  EXPECT_EQ(a.truth, b.truth);
  spec.seed = 78;
  EXPECT_FALSE(generate(spec).stack == a.stack);
}

TEST(Synth, FullLabelShiftPutsArgmaxOnANeighbor) {
  PhantomSpec spec;
  spec.seed = 5;
  spec.start_label = 3;
  spec.count = 10;
  spec.noise.label_shift_prob = 1.0;
  const Phantom p = generate(spec);
  const auto& geo = p.stack.geometry();
  for (std::size_t i = 0; i < p.truth.size(); ++i) {
    const auto a = oracle::argmax3(p.stack.channel(p.truth[i].label));
    const Vec3 w = geo.world(double(a[0]), double(a[1]), double(a[2]));
    double own = distance(w, p.truth[i].center);
    double nb = 1e9;
    if (i > 0) nb = std::min(nb, distance(w, p.truth[i - 1].center));
    if (i + 1 < p.truth.size()) nb = std::min(nb, distance(w, p.truth[i + 1].center));
    EXPECT_LT(nb, geo.spacing.x * 1.5) << "label " << p.truth[i].label;
    EXPECT_GT(own, 10.0);
  }
}

TEST(Synth, DropoutZeroesChannels) {
  PhantomSpec spec;
  spec.seed = 5;
  spec.noise.dropout_prob = 1.0;
  const Phantom p = generate(spec);
  for (int v = 1; v <= 26; ++v) EXPECT_EQ(p.stack.channel(v).max_value(), 0.0);
  EXPECT_EQ(p.truth.size(), 12u);
}

TEST(Synth, TruthIsConsecutiveAndOrdered) {
  PhantomRanges r;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const PhantomSpec spec = sample_phantom_spec(seed, r);
    const Phantom p = generate(spec);
    validate_truth(p.truth);
    for (std::size_t i = 1; i < p.truth.size(); ++i) {
      EXPECT_EQ(p.truth[i].label, p.truth[i - 1].label + 1);
      EXPECT_GT(p.truth[i].center.z, p.truth[i - 1].center.z);
    }
  }
}

TEST(Synth, GapsWithinRangeAndSmoothlyIncreasing) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    PhantomSpec spec = sample_phantom_spec(seed, PhantomRanges{});
    const Phantom p = generate(spec);
    std::vector<double> gaps;
    for (std::size_t i = 1; i < p.truth.size(); ++i) {
      // arc length between centers is at least the chord; chords on these
      // gentle curves stay within 2% of it
      gaps.push_back(distance(p.truth[i].center, p.truth[i - 1].center));
    }
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      EXPECT_GE(gaps[i], spec.gap_min_mm * 0.98);
      EXPECT_LE(gaps[i], spec.gap_max_mm + 1e-9);
      if (i > 0) {
        EXPECT_LE(std::max(gaps[i] / gaps[i - 1], gaps[i - 1] / gaps[i]), 1.4);
      }
    }
  }
}

TEST(Synth, CropRemovesVertebraeOutsideFov) {
  PhantomSpec spec;
  spec.seed = 3;
  spec.count = 14;
  spec.noise.crop = std::pair{0.3, 0.7};
  const Phantom p = generate(spec);
  EXPECT_LT(p.truth.size(), 14u);
  EXPECT_GT(p.truth.size(), 2u);
  for (const auto& a : p.truth) EXPECT_TRUE(inside_bounds(p.stack.geometry(), a.center));
}

TEST(Synth, InfeasibleSpecs) {
  PhantomSpec spec;
  spec.start_label = 8;
  spec.count = 30;
  EXPECT_THROW(generate(spec), InfeasibleSpecError);
  spec.count = 0;
  EXPECT_THROW(generate(spec), InfeasibleSpecError);
  spec.count = 5;
  spec.dims = {10, 10, 10};
  EXPECT_THROW(generate(spec), InfeasibleSpecError);
  spec.dims = {0, 0, 0};
  spec.noise.dropout_prob = 1.5;
  EXPECT_THROW(generate(spec), InfeasibleSpecError);
}

TEST(Synth, SpecJsonRoundTrip) {
  PhantomSpec spec = sample_phantom_spec(42, PhantomRanges{});
  spec.noise.crop = std::pair{0.1, 0.9};
  spec.noise.label_shift_prob = 0.2;
  const PhantomSpec back = phantom_spec_from_json(phantom_spec_to_json(spec));
  EXPECT_EQ(phantom_spec_to_json(back), phantom_spec_to_json(spec));
  EXPECT_EQ(generate(back).stack, generate(spec).stack);
}

TEST(Synth, AnchoredRangesTouchAnEnd) {
  PhantomRanges r;
  r.require_anchor = true;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const PhantomSpec s = sample_phantom_spec(seed, r);
    EXPECT_TRUE(s.start_label == 1 || s.start_label + s.count - 1 == 26);
  }
}

TEST(Synth, CleanPipelineRecoversEveryLabel) {
  for (std::uint64_t seed = 500; seed < 510; ++seed) {
    const Phantom p = generate(sample_phantom_spec(seed, PhantomRanges{}));
    const Decoded d = infer(p.stack, RunConfig{});
    ASSERT_EQ(d.vertebrae.size(), p.truth.size()) << "seed " << seed;
    for (std::size_t i = 0; i < p.truth.size(); ++i) {
      EXPECT_EQ(d.vertebrae[i].label, p.truth[i].label);
      EXPECT_LT(distance(d.vertebrae[i].position, p.truth[i].center), 2.0);
    }
  }
}
