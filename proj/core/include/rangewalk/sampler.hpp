#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "rangewalk/lattice.hpp"
#include "rangewalk/numerics.hpp"
#include "rangewalk/random.hpp"
#include "rangewalk/spectral.hpp"

namespace rangewalk {

// Exact E(exp(-beta |R_N|)) by enumerating all (2d)^N step sequences.
inline constexpr double kEnumerationBudget = 1e8;
std::vector<std::uint64_t> exact_range_counts(int d, int N);  // index = |R_N|
double exact_partition(int d, int N, double beta = 1.0);

// Proposal kinds. SingleStep, Block and Pivot change the end-to-end
// displacement and cost O(N) when they do; Fiber and Shuffle keep it and cost
// O(window).
enum class MoveKind : int { SingleStep = 0, Block, Pivot, Fiber, Shuffle };
inline constexpr int kMoveKinds = 5;
const char* move_name(MoveKind k);

struct MoveMix {
  // global moves cost O(N) each, so they are kept rare
  std::array<double, kMoveKinds> p{0.004, 0.002, 0.004, 0.55, 0.44};
  double operator[](MoveKind k) const { return p[static_cast<int>(k)]; }
  static MoveMix only(MoveKind k);
};

struct ChainConfig {
  int d = 3;
  int N = 1;
  double beta = 1.0;
  MoveMix mix;
  std::uint64_t seed = 1;
  long sweeps = 1000;   // one sweep = N proposals
  long burn_in = 100;   // sweeps discarded before the first sample
  long thinning = 1;    // sweeps between samples
  bool verify = false;  // recount the range after every proposal

  void validate() const;
  // longest window for Block, Fiber and Shuffle: floor(sqrt N), at least 1
  int window() const;
};

struct StepOutcome {
  MoveKind kind = MoveKind::SingleStep;
  long delta = 0;   // change in |R_N| of the proposal
  bool accepted = false;
};

StepOutcome metropolis_step(WalkPath& walk, const ChainConfig& cfg, Rng& rng);

// Every proposal the sampler can make from `steps`, with its probability.
// Duplicates are not merged. Used to assemble the exact transition kernel.
struct Proposal {
  std::vector<std::uint8_t> steps;
  double prob = 0;
};
std::vector<Proposal> proposal_distribution(const std::vector<std::uint8_t>& steps, const ChainConfig& cfg);

struct MoveStats {
  std::array<long, kMoveKinds> proposed{};
  std::array<long, kMoveKinds> accepted{};
  double acceptance(MoveKind k) const;
};

struct SampleRecord {
  long sweep = 0;
  long range = 0;
  double energy = 0;   // E(sqrt L_N)
};

struct ChainResult {
  std::vector<SampleRecord> samples;
  MoveStats stats;
  WalkPath final_walk;
};

// Called on every sample with the current walk; return false to stop early.
using SampleVisitor = std::function<bool(const WalkPath&, const SampleRecord&)>;

std::vector<std::uint8_t> random_steps(int d, int N, Rng& rng);
ChainResult run_chain(const ChainConfig& cfg, const SampleVisitor& visit = {});
ChainResult run_chain(const ChainConfig& cfg, std::vector<std::uint8_t> initial, const SampleVisitor& visit = {});

struct AisOptions {
  int replicas = 64;
  long sweeps_per_rung = 1;
  MoveMix mix;
  std::uint64_t seed = 1;
};

struct AisResult {
  double estimate = 0;
  double se = 0;
  double log_estimate = 0;
  std::vector<double> log_weights;
};

// beta_0 = 0 < beta_1 < ... ; estimates E(exp(-beta_K |R_N|)). Each replica
// starts from an exact uniform draw and anneals with metropolis_step.
AisResult ais_partition(int d, int N, const std::vector<double>& schedule, const AisOptions& opt = {});
// 0 followed by `rungs` geometrically spaced values ending at beta
std::vector<double> geometric_schedule(int rungs, double beta = 1.0, double first = 1e-3);

// p'(x,y) = p(x,y) phi(y) / ((1 - lambda_1) phi(x)) on the ball.
struct TiltedKernel {
  Domain ball;
  double lambda1 = 0;
  std::vector<double> phi;
  // rows[i][code] for site ball[i]
  std::vector<std::array<double, 2 * kMaxDim>> rows;
  bool degenerate = false;

  double row_sum(std::size_t i) const;
  double phi_at(const Site& s) const;
  Site sample_next(const Site& x, Rng& rng) const;
};

TiltedKernel tilted_kernel(const Domain& ball, const DiscreteEigenpair& pair);
WalkPath sample_tilted_path(const TiltedKernel& kernel, const Site& start, int N, Rng& rng);
// prod of p/p' along the path = (1 - lambda_1)^N phi(X_0)/phi(X_N); log domain
double log_importance_weight(const WalkPath& path, const TiltedKernel& kernel);
double importance_weight(const WalkPath& path, const TiltedKernel& kernel);

}  // namespace rangewalk
