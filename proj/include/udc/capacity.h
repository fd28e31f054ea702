// Copyright 2026 The UDC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Uncertainty-guided capacity selection over a synthetic detection stream.
//
// A stream carries two independent latent processes per frame: difficulty
// d_t (representation shift) and noise n_t (measurement corruption). Frame
// features follow a rotation autoregression whose angle depends on d_t, plus
// slow appearance channels; n_t adds white noise to every channel. A five-tier
// model ladder turns (tier, d_t, n_t) into a detection quality, and a tabular
// TD selector moves up and down the ladder from binned uncertainty signals.

#ifndef UDC_CAPACITY_H_
#define UDC_CAPACITY_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "udc/aleatoric.h"
#include "udc/epistemic.h"

namespace udc {

inline constexpr int kNumTiers = 5;
inline constexpr std::array<double, kNumTiers> kTierParams = {3.2, 11.2, 25.9,
                                                             43.7, 68.2};
inline constexpr std::array<const char*, kNumTiers> kTierNames = {
    "nano", "small", "medium", "large", "xlarge"};

struct QualityCurve {
  std::array<double, kNumTiers> q_max = {0.78, 0.84, 0.91, 0.912, 0.915};
  std::array<double, kNumTiers> margin = {0.10, 0.15, 0.30, 0.75, 1.00};
  double k_d = 0.6;
  double k_n = 0.04;
  double noise_std = 0.004;

  void Validate() const;
};

// clamp(q_max - k_d * max(0, d - margin) - k_n * n + noise, 0, 1). A null rng
// gives the noise-free value.
double FrameQuality(const QualityCurve& curve, int tier, double difficulty,
                    double noise, std::mt19937_64* rng);

struct StreamSpec {
  int frames = 2000;
  int calib_frames = 1000;
  // Latent segments.
  int segment_min = 40;
  int segment_max = 120;
  double shift_density = 0.10;
  double baseline_difficulty_max = 0.10;
  double shift_difficulty_min = 0.70;
  double shift_difficulty_max = 1.00;
  int noise_segment_min = 20;
  int noise_segment_max = 80;
  double noise_density = 0.20;
  double noise_floor_max = 0.05;
  double burst_noise_min = 0.70;
  double burst_noise_max = 1.00;
  // Features.
  int ar_blocks = 2;  // each block is a 2-D rotation
  double ar_radius = 0.9;
  double ar_angle = 0.6;
  double shift_angle = 3.14159265358979323846;  // added at d = 1
  double innovation_std = 1.0;
  int appearance_dims = 2;
  double appearance_rho = 0.95;
  double appearance_std = 0.1;  // stationary
  double feature_noise_std = 0.4;  // at n = 1

  int feature_dim() const { return 2 * ar_blocks + appearance_dims; }
  void Validate() const;
};

struct SceneStream {
  std::vector<double> difficulty;
  std::vector<double> noise;
  std::vector<Eigen::VectorXd> features;

  int size() const { return static_cast<int>(features.size()); }
};

// Difficulty, noise, innovations and feature noise each use their own seed
// derived from `seed`.
SceneStream GenerateStream(const StreamSpec& spec, uint64_t seed);

// Nominal prefix: d = 0, n = 0 for calib_frames frames.
SceneStream GenerateCalibrationStream(const StreamSpec& spec, uint64_t seed);

struct StreamEstimators {
  AleatoricModel alea;
  DynamicsEnsemble ens;
};

struct EstimatorConfig {
  AleatoricOptions alea;
  EnsembleConfig ensemble;

  EstimatorConfig() { ensemble.train.epochs = 100; }
};

StreamEstimators FitStreamEstimators(const StreamSpec& spec,
                                     const EstimatorConfig& config,
                                     uint64_t seed);

// Per-frame signals. sigma_epis[0] is zero; the epistemic term compares the
// ensemble's one-step feature prediction with the observed change.
struct StreamSignals {
  std::vector<double> alea;
  std::vector<double> epis;
};

StreamSignals StreamUncertainties(const SceneStream& stream,
                                  const StreamEstimators& est);

enum class SelectorKind { kDecomposed, kTotalU, kFixed };
const char* SelectorKindName(SelectorKind kind);

enum class TierAction { kDown = 0, kStay = 1, kUp = 2 };
inline constexpr int kNumTierActions = 3;

int ApplyTierAction(int tier, TierAction action);

// Signal bin: 0 below threshold, 1 within [1, 2) x threshold, 2 above.
int SignalBin(double score, double threshold);

struct SelectorState {
  int tier = 0;
  double sigma_alea = 0.0;
  double sigma_epis = 0.0;
  double d_alea = 0.0;
  double d_epis = 0.0;
  double last_quality = 0.0;
  // Discretization inputs.
  int alea_bin = 0;
  int epis_bin = 0;
  bool prev_fired = false;
};

struct RewardConfig {
  double c_cap = 1.0;
  double c_up = 0.1;
  double c_down = 0.05;
  double c_fail = 5.0;
  double q_keep = 0.88;
  double q_min = 0.85;
};

// `delta_signal` is the one-step change of the signal the selector escalates
// on (sigma_epis for the decomposed selector, the total score otherwise).
double TierReward(const RewardConfig& config, TierAction action,
                  double delta_signal, double quality, int tier);

class QTable {
 public:
  explicit QTable(int num_states = 0);

  int num_states() const { return static_cast<int>(values_.size()); }
  double Get(int s, TierAction a) const;
  void Set(int s, TierAction a, double v);
  double MaxValue(int s) const;
  // Increments and returns the visit count of (s, a).
  int Visit(int s, TierAction a);
  // Ties go to kStay, then kDown.
  TierAction Greedy(int s) const;

  nlohmann::json ToJson() const;
  static QTable FromJson(const nlohmann::json& j);

 private:
  std::vector<std::array<double, kNumTierActions>> values_;
  std::vector<std::array<int, kNumTierActions>> visits_;
};

// Q(s,a) += lr * (r + gamma * max_a' Q(s',a') - Q(s,a)).
void QUpdate(QTable* table, int s, TierAction a, double r, int s_next,
             double lr, double gamma);

struct SelectorConfig {
  SelectorKind kind = SelectorKind::kDecomposed;
  int fixed_tier = 4;
  int initial_tier = 4;
  double epsilon = 0.1;
  // Step size for a (state, action) pair is max(lr, 1 / visits).
  double lr = 0.02;
  double gamma = 0.9;
  int train_streams = 20;
  int train_passes = 10;
  RewardConfig reward;
  QualityCurve quality;
};

// Number of discrete states for an adaptive selector kind.
int NumSelectorStates(SelectorKind kind);
int StateIndex(SelectorKind kind, const SelectorState& state);

// epsilon-greedy over the table; actions clamp at the ladder ends.
TierAction SelectTierAction(const QTable& table, int s, double epsilon,
                            std::mt19937_64* rng);

// Runs the adaptive selector state machine over precomputed signals.
struct SelectorTrace {
  std::vector<int> tiers;
  std::vector<TierAction> actions;
  std::vector<double> quality;
  std::vector<bool> alea_fired;
  std::vector<bool> epis_fired;
};

SelectorTrace RunSelector(const SelectorConfig& config,
                          const StreamEstimators& est,
                          const SceneStream& stream,
                          const StreamSignals& signals, QTable* table,
                          bool learn, uint64_t seed);

QTable TrainSelector(const SelectorConfig& config, const StreamSpec& spec,
                     const StreamEstimators& est, uint64_t seed);

struct TrackingReport {
  std::string stream;
  std::string selector;
  int frames = 0;
  std::array<double, kNumTiers> occupancy{};
  int switches = 0;
  double mean_quality = 0.0;
  double mean_params = 0.0;
  double savings = 0.0;
  // Escalation counts for the asymmetry statistic.
  int epis_fired_frames = 0;
  int epis_fired_ups = 0;
  int alea_only_frames = 0;
  int alea_only_ups = 0;
  double signal_correlation = 0.0;
};

// 1 - sum_t params(tier_t) / (T * 68.2).
double Savings(const std::vector<int>& tiers);

TrackingReport SummarizeTrace(const std::string& stream_name,
                              const std::string& selector_name,
                              const SelectorTrace& trace,
                              const StreamSignals& signals);

struct TrackingConfig {
  StreamSpec stream;
  EstimatorConfig estimators;
  SelectorConfig selector;
  int eval_streams = 5;
  int workers = 1;
};

struct TrackingResult {
  std::vector<TrackingReport> reports;  // stream-major, then selector
  QTable decomposed_table;
  QTable total_table;
  double tau_alea = 0.0;
  double tau_epis = 0.0;
};

// Fits estimators, trains both adaptive selectors, then evaluates decomposed,
// total-U and the five fixed tiers on eval_streams held-out streams.
TrackingResult RunTrackingExperiment(const TrackingConfig& config,
                                     uint64_t seed);

void WriteTrackingCsv(const std::vector<TrackingReport>& reports,
                      const std::string& path);
nlohmann::json TrackingToJson(const TrackingResult& result);

nlohmann::json StreamSpecToJson(const StreamSpec& spec);
StreamSpec StreamSpecFromJson(const nlohmann::json& j);

}  // namespace udc

#endif  // UDC_CAPACITY_H_
