#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spinerect/spinerect.hpp"

using namespace spinerect;

namespace {

std::vector<std::vector<double>> zeros(int v_max, std::size_t n) {
  return std::vector<std::vector<double>>(static_cast<std::size_t>(v_max), std::vector<double>(n, 0.0));
}

void expect_feasible(const EnergyModel& m, const LabelingState& s) {
  EXPECT_TRUE(m.feasible(s.v_l, s.k)) << "v_l=" << s.v_l << " N=" << s.count();
}

}  // namespace

// --- regularizer ---------------------------------------------------------------

TEST(Regularizer, ClosedFormValues) {
  EXPECT_NEAR(regularizer(5, 5), std::numbers::e, 1e-12);
  EXPECT_NEAR(regularizer(10, 5), std::exp(2.0), 1e-12);
  EXPECT_NEAR(regularizer(5, 10), 7.38905609893065, 1e-12);
}

TEST(Regularizer, Symmetric) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 40.0);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_EQ(regularizer(a, b), regularizer(b, a));
    EXPECT_GE(regularizer(a, b), std::numbers::e);
  }
}

TEST(Regularizer, RejectsNonPositiveGaps) {
  EXPECT_THROW(regularizer(0, 5), DomainError);
  EXPECT_THROW(regularizer(5, -1), DomainError);
}

// --- energy --------------------------------------------------------------------

TEST(Energy, SingleVertebraHasNoRegularizer) {
  auto q = zeros(4, 20);
  q[1][7] = 0.8;
  const auto s = oracle::make_signals(q);
  const EnergyModel m(s, EnergyConfig::with_anchors(4));
  EXPECT_DOUBLE_EQ(m.evaluate(2, std::vector<double>{7}), -2.0 * 0.8);
  EXPECT_DOUBLE_EQ(m.evaluate(3, std::vector<double>{7}), 0.0);
}

TEST(Energy, EqualSpacingAddsEPerTriple) {
  const auto s = oracle::make_signals(zeros(6, 60));
  const EnergyModel m(s, EnergyConfig::uniform(6));
  EXPECT_NEAR(m.evaluate(1, std::vector<double>{5, 15, 25, 35}), 2.0 * std::numbers::e, 1e-12);
  EnergyConfig lit = EnergyConfig::uniform(6);
  lit.reg_range_literal = true;
  EXPECT_NEAR(EnergyModel(s, lit).evaluate(1, std::vector<double>{5, 15, 25, 35}), std::numbers::e, 1e-12);
}

TEST(Energy, MatchesDirectFormulaOnRandomStates) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int v_max = 3 + trial % 8;
    const std::size_t len = 40 + static_cast<std::size_t>(trial % 17);
    auto q = zeros(v_max, len);
    for (auto& ch : q)
      for (auto& x : ch) x = u(rng) * 3.0;
    std::vector<double> lambda(static_cast<std::size_t>(v_max));
    for (auto& l : lambda) l = 0.5 + u(rng) * 2.0;
    const auto sig = oracle::make_signals(q);
    const bool literal = trial % 3 == 0;
    EnergyConfig cfg{lambda, literal};
    const EnergyModel m(sig, cfg);
    const int n = 1 + static_cast<int>(u(rng) * std::min(v_max, 6));
    const int v_l = 1 + static_cast<int>(u(rng) * (v_max - n + 1));
    std::vector<double> k;
    double pos = u(rng) * 3.0;
    for (int i = 0; i < n; ++i) {
      k.push_back(trial % 2 ? std::round(pos) + i : pos);
      pos += 1.0 + u(rng) * 5.0;
    }
    if (!m.feasible(v_l, k)) continue;
    EXPECT_NEAR(m.evaluate(v_l, k), oracle::energy(q, lambda, v_l, k, literal), 1e-9);
  }
}

TEST(Energy, HardConstraintsAreContractViolations) {
  const auto s = oracle::make_signals(zeros(4, 20));
  const EnergyModel m(s, EnergyConfig::uniform(4));
  EXPECT_THROW(m.evaluate(0, std::vector<double>{3}), ContractViolation);
  EXPECT_THROW(m.evaluate(3, std::vector<double>{3, 5, 7}), ContractViolation);
  EXPECT_THROW(m.evaluate(1, std::vector<double>{5, 5}), ContractViolation);
  EXPECT_THROW(m.evaluate(1, std::vector<double>{5, 20}), ContractViolation);
  EXPECT_THROW(m.evaluate(1, std::vector<double>{}), ContractViolation);
  EXPECT_THROW(EnergyModel(s, EnergyConfig::uniform(5)), ConfigError);
}

TEST(Energy, AnchorWeights) {
  const auto cfg = EnergyConfig::with_anchors();
  for (int v = 1; v <= 26; ++v) EXPECT_EQ(cfg.weight(v), (v == 1 || v == 2 || v == 25 || v == 26) ? 2.0 : 1.0);
}

// --- peaks / init ----------------------------------------------------------------

TEST(Peaks, ThreeSeparatedPeaks) {
  std::vector<double> q(80, 0.0);
  for (double c : {15.0, 40.0, 65.0}) oracle::add_bump(q, c, 3.0, 1.0);
  const Signal1D s{q, 1.0};
  EXPECT_EQ(find_peaks(s), (std::vector<std::size_t>{15, 40, 65}));
}

TEST(Peaks, EndsAndRampsAreNotPeaks) {
  std::vector<double> ramp(30);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = double(i);
  EXPECT_TRUE(find_peaks(Signal1D{ramp, 1.0}).empty());
  auto q = zeros(1, 30);
  q[0] = ramp;
  const auto sig = oracle::make_signals(q);
  EXPECT_THROW(init_state(EnergyModel(sig, EnergyConfig::uniform(1))), NoVertebraDetectedError);
}

TEST(Peaks, PlateauCountsOnceAndSeparationKeepsTaller) {
  std::vector<double> q(40, 0.0);
  q[10] = q[11] = 1.0;  // plateau: both qualify as >= neighbors, separation keeps one
  q[25] = 0.9;
  q[30] = 1.0;
  const auto p = find_peaks(Signal1D{q, 1.0});
  EXPECT_EQ(p, (std::vector<std::size_t>{10, 30}));
}

TEST(Peaks, ProminenceFilter) {
  std::vector<double> q(60, 0.0);
  oracle::add_bump(q, 15, 3.0, 1.0);
  oracle::add_bump(q, 40, 3.0, 1.0);
  q[28] += 0.05;  // small ripple, prominence below 10% of max
  const auto p = find_peaks(Signal1D{q, 1.0});
  EXPECT_EQ(p, (std::vector<std::size_t>{15, 40}));
}

TEST(Peaks, PhantomGivesOnePeakPerVertebra) {
  PhantomSpec spec;
  spec.seed = 4;
  spec.start_label = 8;
  spec.count = 12;
  spec.curve.amplitude_mm = 20;
  const Phantom p = generate(spec);
  const CaseAnalysis a = analyze_case(p.stack, RunConfig{});
  const auto peaks = find_peaks(a.signals.combined);
  ASSERT_EQ(peaks.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    // nearest centerline sample to the true center
    double best = 1e9;
    std::size_t arg = 0;
    for (std::size_t z = 0; z < a.centerline.size(); ++z) {
      const double d = distance(a.centerline.samples[z].point, p.truth[i].center);
      if (d < best) best = d, arg = z;
    }
    EXPECT_LE(std::abs(double(peaks[i]) - double(arg)), 1.0);
  }
}

TEST(Init, StartsAtLabelOneOnQHatPeaks) {
  auto q = zeros(6, 80);
  oracle::add_bump(q[2], 15, 3.0, 1.0);
  oracle::add_bump(q[3], 40, 3.0, 1.0);
  oracle::add_bump(q[4], 65, 3.0, 1.0);
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::uniform(6));
  const LabelingState s = init_state(m);
  EXPECT_EQ(s.v_l, 1);
  EXPECT_EQ(s.k, (std::vector<double>{15, 40, 65}));
  EXPECT_DOUBLE_EQ(s.energy, m.evaluate(1, s.k));
}

TEST(Init, KeepsStrongestWhenTooManyPeaks) {
  auto q = zeros(2, 80);
  oracle::add_bump(q[0], 15, 2.0, 0.5);
  oracle::add_bump(q[0], 40, 2.0, 1.0);
  oracle::add_bump(q[1], 65, 2.0, 0.9);
  const auto sig = oracle::make_signals(q);
  const LabelingState s = init_state(EnergyModel(sig, EnergyConfig::uniform(2)));
  EXPECT_EQ(s.k, (std::vector<double>{40, 65}));
}

// --- offset ----------------------------------------------------------------------

TEST(Offset, FindsChannelsWithMass) {
  auto q = zeros(8, 60);
  const std::vector<double> k{10, 25, 40};
  for (int i = 0; i < 3; ++i) q[static_cast<std::size_t>(2 + i)][static_cast<std::size_t>(k[i])] = 1.0;
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::uniform(8));
  const LabelingState out = offset_op(m, m.make_state(1, k));
  EXPECT_EQ(out.v_l, 3);
  EXPECT_EQ(out.k, k);
  // independent loop over every feasible v_l
  const std::vector<double> lambda(8, 1.0);
  double best = 1e18;
  int arg = 0;
  for (int v = 1; v <= 6; ++v) {
    const double e = oracle::energy(q, lambda, v, k);
    if (e < best) best = e, arg = v;
  }
  EXPECT_EQ(out.v_l, arg);
  EXPECT_NEAR(out.energy, best, 1e-12);
}

TEST(Offset, FullRunForcesLabelOne) {
  auto q = zeros(3, 30);
  q[2][5] = 5.0;
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::uniform(3));
  EXPECT_EQ(offset_op(m, m.make_state(1, {5, 15, 25})).v_l, 1);
}

TEST(Offset, TiesGoToSmallestLabel) {
  auto q = zeros(5, 30);
  for (auto& ch : q) oracle::add_bump(ch, 12, 2.0, 1.0);
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::uniform(5));
  EXPECT_EQ(offset_op(m, m.make_state(4, {12})).v_l, 1);
}

TEST(Offset, NeverIncreasesEnergyAndRejectsOversizedRuns) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = oracle::small_instance(seed);
    const EnergyModel m(inst.signals, EnergyConfig::uniform(6));
    const LabelingState s = m.make_state(1, inst.k);
    const LabelingState o = offset_op(m, s);
    EXPECT_LE(o.energy, s.energy);
    expect_feasible(m, o);
  }
  const auto sig = oracle::make_signals(zeros(2, 30));
  const EnergyModel m(sig, EnergyConfig::uniform(2));
  LabelingState big{1, {1, 5, 9}, 0.0};
  EXPECT_THROW(offset_op(m, big), InfeasibleError);
}

// --- fine-tune ---------------------------------------------------------------------

TEST(Finetune, ClimbsToSinglePeak) {
  auto q = zeros(1, 60);
  oracle::add_bump(q[0], 30, 4.0, 1.0);
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::uniform(1));
  const LabelingState out = finetune_op(m, m.make_state(1, {27}));
  ASSERT_EQ(out.count(), 1);
  // 1-D exhaustive argmax
  const auto& v = q[0];
  EXPECT_EQ(out.k[0], double(std::max_element(v.begin(), v.end()) - v.begin()));
}

TEST(Finetune, LocalOptimumIsUnchanged) {
  auto q = zeros(3, 60);
  for (int i = 0; i < 3; ++i) oracle::add_bump(q[static_cast<std::size_t>(i)], 10 + 20 * i, 3.0, 1.0);
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::uniform(3));
  const LabelingState s = m.make_state(1, {10, 30, 50});
  const LabelingState out = finetune_op(m, s);
  EXPECT_EQ(out.k, s.k);
  EXPECT_EQ(out.energy, s.energy);
}

TEST(Finetune, ResultBeatsEveryUnitMove) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = oracle::small_instance(seed);
    const EnergyModel m(inst.signals, EnergyConfig::uniform(6));
    std::vector<double> k = inst.k;
    for (auto& x : k) x = std::clamp(x + 3.0, 0.0, 49.0);
    if (!m.feasible(inst.v_l, k)) continue;
    const LabelingState start = m.make_state(inst.v_l, k);
    const LabelingState out = finetune_op(m, start);
    EXPECT_LE(out.energy, start.energy);
    expect_feasible(m, out);
    for (std::size_t i = 0; i < out.k.size(); ++i) {
      for (double d : {-1.0, 1.0}) {
        std::vector<double> nk = out.k;
        nk[i] += d;
        if (!m.feasible(out.v_l, nk)) continue;
        EXPECT_GE(m.evaluate(out.v_l, nk), out.energy);
      }
    }
  }
}

// --- expansion ---------------------------------------------------------------------

TEST(Expansion, MidpointInsertion) {
  EXPECT_EQ(expand_positions(std::vector<double>{10, 20, 40}, 1), (std::vector<double>{10, 20, 30, 40}));
  EXPECT_EQ(expand_positions(std::vector<double>{10, 20}, 0), (std::vector<double>{10, 15, 20}));
  EXPECT_THROW(expand_positions(std::vector<double>{10, 20}, 1), RangeError);
}

TEST(Expansion, PicksTheGapHoldingTheMissingVertebra) {
  auto q = zeros(6, 60);
  const std::vector<double> truth{10, 20, 30, 40};
  for (int i = 0; i < 4; ++i) oracle::add_bump(q[static_cast<std::size_t>(i + 1)], truth[i], 2.0, 1.0);
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::uniform(6));
  const LabelingState out = expansion_op(m, m.make_state(2, {10, 20, 40}));
  EXPECT_EQ(out.k, truth);
  EXPECT_EQ(out.v_l, 2);
}

TEST(Expansion, ReturnsBestCandidateEvenIfWorse) {
  auto q = zeros(4, 40);
  oracle::add_bump(q[0], 10, 2.0, 1.0);
  oracle::add_bump(q[1], 20, 2.0, 1.0);
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::uniform(4));
  const LabelingState s = m.make_state(1, {10, 20});
  const LabelingState out = expansion_op(m, s);
  EXPECT_EQ(out.k, (std::vector<double>{10, 15, 20}));
  EXPECT_GT(out.energy, s.energy);
}

TEST(Expansion, NoOpWhenNoGapOrNoRoom) {
  const auto sig = oracle::make_signals(zeros(3, 40));
  const EnergyModel m(sig, EnergyConfig::uniform(3));
  const LabelingState one = m.make_state(2, {10});
  EXPECT_EQ(expansion_op(m, one).k, one.k);
  const LabelingState full = m.make_state(1, {5, 15, 25});
  EXPECT_EQ(expansion_op(m, full).k, full.k);
}

TEST(Expansion, GrownRunStaysFeasibleAtTheTop) {
  auto q = zeros(4, 40);
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::uniform(4));
  const LabelingState out = expansion_op(m, m.make_state(3, {10, 30}));
  EXPECT_EQ(out.count(), 3);
  expect_feasible(m, out);
}

TEST(Expansion, PhantomMissingVertebraIsReinserted) {
  PhantomSpec spec;
  spec.seed = 12;
  spec.start_label = 10;
  spec.count = 10;
  spec.curve.amplitude_mm = 15;
  const Phantom p = generate(spec);
  const CaseAnalysis a = analyze_case(p.stack, RunConfig{});
  const EnergyModel m(a.signals, EnergyConfig::with_anchors());
  const LabelingState full = offset_op(m, init_state(m));
  ASSERT_EQ(full.count(), 10);
  std::vector<double> k = full.k;
  const double missing = k[5];
  k.erase(k.begin() + 5);
  const LabelingState out = expansion_op(m, m.make_state(full.v_l, k));
  ASSERT_EQ(out.count(), 10);
  EXPECT_LE(std::abs(out.k[5] - missing), 2.0);
}

// --- solve -------------------------------------------------------------------------

TEST(Solve, SingleIsolatedPeakGivesC1) {
  auto q = zeros(5, 50);
  oracle::add_bump(q[0], 25, 3.0, 1.0);
  for (std::size_t v = 1; v < 5; ++v) oracle::add_bump(q[v], 25, 3.0, 0.2);
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::with_anchors(5));
  const SolveResult r = solve(m);
  EXPECT_EQ(r.best.v_l, 1);
  EXPECT_EQ(r.best.count(), 1);
  // oracle over all (v_l, k_0)
  double best = 1e18;
  for (int v = 1; v <= 5; ++v)
    for (std::size_t z = 0; z < 50; ++z) best = std::min(best, m.evaluate(v, std::vector<double>{double(z)}));
  EXPECT_NEAR(r.best.energy, best, 1e-12);
}

TEST(Solve, TraceIsStrictlyDecreasingAndBounded) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = oracle::small_instance(seed);
    const EnergyModel m(inst.signals, EnergyConfig::with_anchors(6));
    const SolveResult r = solve(m);
    expect_feasible(m, r.best);
    EXPECT_LE(r.iterations, kDefaultMaxIters);
    for (std::size_t i = 1; i < r.accepted_energies.size(); ++i) {
      EXPECT_LT(r.accepted_energies[i], r.accepted_energies[i - 1]);
    }
    ASSERT_FALSE(r.accepted_energies.empty());
    EXPECT_LE(r.best.energy, r.accepted_energies.back());
  }
}

TEST(Solve, MaxItersCapsTheLoop) {
  const auto inst = oracle::small_instance(3);
  const EnergyModel m(inst.signals, EnergyConfig::uniform(6));
  SolveOptions opts;
  opts.max_iters = 1;
  const SolveResult r = solve(m, opts);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.accepted_energies.size(), 1u);
}

TEST(Solve, LabelShiftedChannelsStayConsecutive) {
  // Every channel fires one vertebra up; Q-hat peaks are still correct.
  auto q = zeros(8, 90);
  const std::vector<double> centers{10, 30, 50, 70};
  for (int i = 0; i < 4; ++i) oracle::add_bump(q[static_cast<std::size_t>(i + 2)], centers[i], 2.0, 1.0);
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::uniform(8));
  const SolveResult r = solve(m);
  EXPECT_EQ(r.best.count(), 4);
  EXPECT_EQ(r.best.v_l, 3);
  EXPECT_EQ(offset_op(m, m.make_state(1, centers)).v_l, r.best.v_l);
}

TEST(Solve, AnchorWeightDoesNotChangeAgreeingOptimum) {
  auto q = zeros(6, 70);
  const std::vector<double> centers{8, 20, 32, 44};
  for (int i = 0; i < 4; ++i) oracle::add_bump(q[static_cast<std::size_t>(i)], centers[i], 2.0, 1.0);
  const auto sig = oracle::make_signals(q);
  const SolveResult u = solve(EnergyModel(sig, EnergyConfig::uniform(6)));
  for (double w : {2.0, 3.0, 5.0}) {
    const SolveResult a = solve(EnergyModel(sig, EnergyConfig::with_anchors(6, w)));
    EXPECT_EQ(a.best.v_l, u.best.v_l);
    EXPECT_EQ(a.best.k, u.best.k);
  }
}

// --- brute force -------------------------------------------------------------------

TEST(BruteForce, NeverWorseThanSolveOnIntegerGrid) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto inst = oracle::small_instance(seed);
    const EnergyModel m(inst.signals, EnergyConfig::with_anchors(6));
    const LabelingState bf = brute_force_solve(m, 6);
    const SolveResult r = solve(m);
    expect_feasible(m, bf);
    const bool integral =
        std::all_of(r.best.k.begin(), r.best.k.end(), [](double x) { return x == std::floor(x); });
    if (integral) {
      EXPECT_LE(bf.energy, r.best.energy + 1e-12);
    }
    EXPECT_NEAR(bf.energy, m.evaluate(bf.v_l, bf.k), 1e-9);
  }
}

TEST(BruteForce, SingleVertebraIsWeightedArgmax) {
  const auto inst = oracle::small_instance(5);
  const auto cfg = EnergyConfig::with_anchors(6);
  const EnergyModel m(inst.signals, cfg);
  const LabelingState bf = brute_force_solve(m, 1);
  double best = -1;
  int bv = 0;
  std::size_t bk = 0;
  for (int v = 1; v <= 6; ++v)
    for (std::size_t z = 0; z < 50; ++z) {
      const double s = cfg.weight(v) * inst.signals.q(v).values[z];
      if (s > best) best = s, bv = v, bk = z;
    }
  EXPECT_EQ(bf.v_l, bv);
  EXPECT_EQ(bf.k, (std::vector<double>{double(bk)}));
  EXPECT_NEAR(bf.energy, -best, 1e-12);
}

TEST(BruteForce, HandEnumeratedThreePeakInstance) {
  // V_max = 4, length 7. Q values chosen so the optimum is easy to enumerate:
  //   labels 2,3,4 at positions 1,3,5 -> -(4+4+4) + R(2,2) = -12 + e
  //   best 2-run collects only -8; any 4-run pays R(1,2) + R(2,2) for 0.5 more.
  std::vector<std::vector<double>> q{
      {0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
      {0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0},
      {0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0},
      {0.0, 0.0, 0.0, 0.0, 0.0, 4.0, 0.0},
  };
  const auto sig = oracle::make_signals(q);
  const EnergyModel m(sig, EnergyConfig::uniform(4));
  // Enumerate by hand-written nested loops for N <= 3 and all v_l.
  double best = 1e18;
  const std::vector<double> lambda(4, 1.0);
  for (int v = 1; v <= 4; ++v)
    for (int a = 0; a < 7; ++a) best = std::min(best, oracle::energy(q, lambda, v, {double(a)}));
  for (int v = 1; v <= 3; ++v)
    for (int a = 0; a < 7; ++a)
      for (int b = a + 1; b < 7; ++b) best = std::min(best, oracle::energy(q, lambda, v, {double(a), double(b)}));
  for (int v = 1; v <= 2; ++v)
    for (int a = 0; a < 7; ++a)
      for (int b = a + 1; b < 7; ++b)
        for (int c = b + 1; c < 7; ++c)
          best = std::min(best, oracle::energy(q, lambda, v, {double(a), double(b), double(c)}));
  for (int a = 0; a < 7; ++a)
    for (int b = a + 1; b < 7; ++b)
      for (int c = b + 1; c < 7; ++c)
        for (int d = c + 1; d < 7; ++d)
          best = std::min(best, oracle::energy(q, lambda, 1, {double(a), double(b), double(c), double(d)}));
  EXPECT_NEAR(best, -12.0 + std::numbers::e, 1e-12);
  const LabelingState bf = brute_force_solve(m, 4);
  EXPECT_NEAR(bf.energy, best, 1e-12);
  EXPECT_EQ(bf.v_l, 2);
  EXPECT_EQ(bf.k, (std::vector<double>{1, 3, 5}));
}

TEST(BruteForce, RefusesOverBudget) {
  const auto sig = oracle::make_signals(zeros(26, 400));
  const EnergyModel m(sig, EnergyConfig::uniform(26));
  EXPECT_THROW(brute_force_solve(m, 26), BudgetExceededError);
  EXPECT_GT(brute_force_space(26, 400, 26, 1), kDefaultBruteForceBudget);
  EXPECT_DOUBLE_EQ(brute_force_space(4, 7, 1, 1), 28.0);
}

TEST(BruteForce, GridStepQuantizesPositions) {
  const auto inst = oracle::small_instance(9);
  const EnergyModel m(inst.signals, EnergyConfig::uniform(6));
  const LabelingState bf = brute_force_solve(m, 3, 2);
  for (double k : bf.k) EXPECT_EQ(std::fmod(k, 2.0), 0.0);
}
