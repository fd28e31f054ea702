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

#include "udc/capacity.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "udc/error.h"
#include "udc/harness.h"
#include "udc/parallel.h"
#include "udc/stats.h"

namespace udc {
namespace {

constexpr uint64_t kDifficultyTag = 0xd1f;
constexpr uint64_t kNoiseTag = 0x2015e;
constexpr uint64_t kInnovationTag = 0x1220;
constexpr uint64_t kFeatureNoiseTag = 0xfea7;
constexpr uint64_t kCalibTag = 0xca1;
constexpr uint64_t kEnsembleTag = 0xe25;
constexpr uint64_t kTrainStreamTag = 0x7a;
constexpr uint64_t kEvalStreamTag = 0xe7a1;
constexpr uint64_t kQualityTag = 0x9a1;
constexpr uint64_t kExploreTag = 0xe4;

// Fills `out` with piecewise-constant segments.
void FillSegments(int frames, int seg_min, int seg_max, double density,
                  double low_max, double high_min, double high_max,
                  uint64_t seed, std::vector<double>* out) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> length(seg_min, seg_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out->clear();
  out->reserve(frames);
  while (static_cast<int>(out->size()) < frames) {
    const int len = length(rng);
    const bool high = unit(rng) < density;
    const double value = high ? high_min + (high_max - high_min) * unit(rng)
                              : low_max * unit(rng);
    for (int i = 0; i < len && static_cast<int>(out->size()) < frames; ++i) {
      out->push_back(value);
    }
  }
}

SceneStream FeaturesFromLatents(const StreamSpec& spec,
                                std::vector<double> difficulty,
                                std::vector<double> noise, uint64_t seed) {
  const int frames = static_cast<int>(difficulty.size());
  const int ar_dim = 2 * spec.ar_blocks;
  const int dim = spec.feature_dim();
  std::mt19937_64 innov_rng(HashSeed(seed, kInnovationTag));
  std::mt19937_64 noise_rng(HashSeed(seed, kFeatureNoiseTag));
  std::normal_distribution<double> normal(0.0, 1.0);

  const double ar_std =
      spec.innovation_std / std::sqrt(1.0 - spec.ar_radius * spec.ar_radius);
  const double app_innov =
      spec.appearance_std *
      std::sqrt(1.0 - spec.appearance_rho * spec.appearance_rho);
  Eigen::VectorXd x(ar_dim);
  Eigen::VectorXd a(spec.appearance_dims);
  for (int i = 0; i < ar_dim; ++i) x(i) = ar_std * normal(innov_rng);
  for (int i = 0; i < spec.appearance_dims; ++i) {
    a(i) = spec.appearance_std * normal(innov_rng);
  }

  SceneStream s;
  s.features.reserve(frames);
  for (int t = 0; t < frames; ++t) {
    if (t > 0) {
      const double theta = spec.ar_angle + spec.shift_angle * difficulty[t];
      const double c = spec.ar_radius * std::cos(theta);
      const double sn = spec.ar_radius * std::sin(theta);
      for (int b = 0; b < spec.ar_blocks; ++b) {
        const double x0 = x(2 * b);
        const double x1 = x(2 * b + 1);
        x(2 * b) = c * x0 - sn * x1 + spec.innovation_std * normal(innov_rng);
        x(2 * b + 1) =
            sn * x0 + c * x1 + spec.innovation_std * normal(innov_rng);
      }
      for (int i = 0; i < spec.appearance_dims; ++i) {
        a(i) = spec.appearance_rho * a(i) + app_innov * normal(innov_rng);
      }
    }
    Eigen::VectorXd f(dim);
    f.head(ar_dim) = x;
    f.tail(spec.appearance_dims) = a;
    if (noise[t] > 0.0) {
      for (int i = 0; i < dim; ++i) {
        f(i) += noise[t] * spec.feature_noise_std * normal(noise_rng);
      }
    }
    s.features.push_back(std::move(f));
  }
  s.difficulty = std::move(difficulty);
  s.noise = std::move(noise);
  return s;
}

double TotalRatio(const StreamEstimators& est, double alea, double epis) {
  return std::max(alea / est.alea.tau_alea, epis / *est.ens.tau_epis);
}

}  // namespace

void QualityCurve::Validate() const {
  for (int i = 0; i < kNumTiers; ++i) {
    if (q_max[i] < 0.0 || q_max[i] > 1.0 || margin[i] < 0.0) {
      throw Error(ErrorCode::kConfiguration, "quality curve out of range");
    }
    if (i > 0 && (q_max[i] < q_max[i - 1] || margin[i] < margin[i - 1])) {
      throw Error(ErrorCode::kConfiguration,
                  "quality curve must be monotone in tier");
    }
  }
  if (k_d < 0.0 || k_n < 0.0 || noise_std < 0.0) {
    throw Error(ErrorCode::kConfiguration, "negative quality coefficient");
  }
}

double FrameQuality(const QualityCurve& curve, int tier, double difficulty,
                    double noise, std::mt19937_64* rng) {
  if (tier < 0 || tier >= kNumTiers) {
    throw Error(ErrorCode::kInvalidInput, "tier out of range");
  }
  double q = curve.q_max[tier] -
             curve.k_d * std::max(0.0, difficulty - curve.margin[tier]) -
             curve.k_n * noise;
  if (rng != nullptr && curve.noise_std > 0.0) {
    q += curve.noise_std * std::normal_distribution<double>(0.0, 1.0)(*rng);
  }
  return std::clamp(q, 0.0, 1.0);
}

void StreamSpec::Validate() const {
  if (frames < 2 || calib_frames < 20) {
    throw Error(ErrorCode::kConfiguration, "stream too short");
  }
  if (segment_min < 1 || segment_max < segment_min || noise_segment_min < 1 ||
      noise_segment_max < noise_segment_min) {
    throw Error(ErrorCode::kConfiguration, "bad segment lengths");
  }
  if (shift_density < 0.0 || shift_density > 1.0 || noise_density < 0.0 ||
      noise_density > 1.0) {
    throw Error(ErrorCode::kConfiguration, "density outside [0, 1]");
  }
  if (ar_blocks < 1 || appearance_dims < 0 || ar_radius <= 0.0 ||
      ar_radius >= 1.0 || appearance_rho < 0.0 || appearance_rho >= 1.0) {
    throw Error(ErrorCode::kConfiguration, "unstable feature process");
  }
}

SceneStream GenerateStream(const StreamSpec& spec, uint64_t seed) {
  spec.Validate();
  std::vector<double> d;
  std::vector<double> n;
  FillSegments(spec.frames, spec.segment_min, spec.segment_max,
               spec.shift_density, spec.baseline_difficulty_max,
               spec.shift_difficulty_min, spec.shift_difficulty_max,
               HashSeed(seed, kDifficultyTag), &d);
  FillSegments(spec.frames, spec.noise_segment_min, spec.noise_segment_max,
               spec.noise_density, spec.noise_floor_max, spec.burst_noise_min,
               spec.burst_noise_max, HashSeed(seed, kNoiseTag), &n);
  return FeaturesFromLatents(spec, std::move(d), std::move(n), seed);
}

SceneStream GenerateCalibrationStream(const StreamSpec& spec, uint64_t seed) {
  spec.Validate();
  return FeaturesFromLatents(
      spec, std::vector<double>(spec.calib_frames, 0.0),
      std::vector<double>(spec.calib_frames, 0.0), seed);
}

StreamEstimators FitStreamEstimators(const StreamSpec& spec,
                                     const EstimatorConfig& config,
                                     uint64_t seed) {
  const SceneStream prefix =
      GenerateCalibrationStream(spec, HashSeed(seed, kCalibTag));
  const int dim = spec.feature_dim();
  std::vector<int> mask(dim);
  std::iota(mask.begin(), mask.end(), 0);

  CalibrationSet cal;
  for (int t = 0; t + 1 < prefix.size(); ++t) {
    cal.transitions.push_back(
        {prefix.features[t], Eigen::VectorXd(0), prefix.features[t + 1]});
  }
  StreamEstimators est;
  est.alea = FitAleatoric(prefix.features, mask, config.alea);
  const Eigen::VectorXd sigma =
      Eigen::VectorXd::Constant(dim, spec.feature_noise_std);
  est.ens = FitEnsemble(cal, mask, sigma, config.ensemble,
                        HashSeed(seed, kEnsembleTag));
  est.ens.tau_epis =
      ThresholdFromScores(OfflineScores(est.ens, cal), config.ensemble.m_e);
  return est;
}

StreamSignals StreamUncertainties(const SceneStream& stream,
                                  const StreamEstimators& est) {
  if (!est.ens.tau_epis.has_value() || est.alea.tau_alea <= 0.0) {
    throw Error(ErrorCode::kConfiguration, "stream estimators uncalibrated");
  }
  StreamSignals s;
  s.alea.resize(stream.size());
  s.epis.resize(stream.size(), 0.0);
  const Eigen::VectorXd no_action(0);
  for (int t = 0; t < stream.size(); ++t) {
    s.alea[t] = AleaScore(est.alea, stream.features[t]);
    if (t > 0) {
      s.epis[t] = EpisScore(est.ens, stream.features[t - 1], no_action,
                            stream.features[t]);
    }
  }
  return s;
}

const char* SelectorKindName(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::kDecomposed:
      return "decomposed";
    case SelectorKind::kTotalU:
      return "total_u";
    case SelectorKind::kFixed:
      return "fixed";
  }
  return "unknown";
}

int ApplyTierAction(int tier, TierAction action) {
  const int step = static_cast<int>(action) - 1;
  return std::clamp(tier + step, 0, kNumTiers - 1);
}

int SignalBin(double score, double threshold) {
  if (score > 2.0 * threshold) return 2;
  if (score > threshold) return 1;
  return 0;
}

double TierReward(const RewardConfig& config, TierAction action,
                  double delta_signal, double quality, int tier) {
  double r = -config.c_cap * kTierParams[tier] / kTierParams[kNumTiers - 1];
  if (action == TierAction::kUp && delta_signal < 0.0) r += config.c_up;
  if (action == TierAction::kDown && quality >= config.q_keep) {
    r += config.c_down;
  }
  if (quality < config.q_min) r -= config.c_fail;
  return r;
}

QTable::QTable(int num_states) : values_(num_states), visits_(num_states) {
  for (auto& row : values_) row.fill(0.0);
  for (auto& row : visits_) row.fill(0);
}

int QTable::Visit(int s, TierAction a) {
  return ++visits_.at(s)[static_cast<int>(a)];
}

double QTable::Get(int s, TierAction a) const {
  return values_.at(s)[static_cast<int>(a)];
}

void QTable::Set(int s, TierAction a, double v) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNumeric, "non-finite value table entry");
  }
  values_.at(s)[static_cast<int>(a)] = v;
}

double QTable::MaxValue(int s) const {
  const auto& row = values_.at(s);
  return *std::max_element(row.begin(), row.end());
}

TierAction QTable::Greedy(int s) const {
  const auto& row = values_.at(s);
  TierAction best = TierAction::kStay;
  for (TierAction a : {TierAction::kDown, TierAction::kUp}) {
    if (row[static_cast<int>(a)] > row[static_cast<int>(best)]) best = a;
  }
  return best;
}

nlohmann::json QTable::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : values_) rows.push_back({row[0], row[1], row[2]});
  return {{"num_states", num_states()}, {"values", rows}};
}

QTable QTable::FromJson(const nlohmann::json& j) {
  QTable t(j.at("num_states").get<int>());
  const auto& rows = j.at("values");
  if (static_cast<int>(rows.size()) != t.num_states()) {
    throw Error(ErrorCode::kInvalidInput, "value table size mismatch");
  }
  for (int s = 0; s < t.num_states(); ++s) {
    for (int a = 0; a < kNumTierActions; ++a) {
      t.Set(s, static_cast<TierAction>(a), rows[s][a].get<double>());
    }
  }
  return t;
}

void QUpdate(QTable* table, int s, TierAction a, double r, int s_next,
             double lr, double gamma) {
  if (!(lr > 0.0 && lr <= 1.0) || !(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "lr in (0, 1], gamma in [0, 1)");
  }
  const double q = table->Get(s, a);
  const double target = r + gamma * table->MaxValue(s_next);
  table->Set(s, a, q + lr * (target - q));
}

int NumSelectorStates(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::kDecomposed:
      return kNumTiers * 3 * 3 * 2;
    case SelectorKind::kTotalU:
      return kNumTiers * 3 * 2;
    case SelectorKind::kFixed:
      return 1;
  }
  return 0;
}

int StateIndex(SelectorKind kind, const SelectorState& state) {
  const int prev = state.prev_fired ? 1 : 0;
  switch (kind) {
    case SelectorKind::kDecomposed:
      return ((state.tier * 3 + state.alea_bin) * 3 + state.epis_bin) * 2 +
             prev;
    case SelectorKind::kTotalU:
      // alea_bin carries the total-score bin for this selector.
      return (state.tier * 3 + state.alea_bin) * 2 + prev;
    case SelectorKind::kFixed:
      return 0;
  }
  return 0;
}

TierAction SelectTierAction(const QTable& table, int s, double epsilon,
                            std::mt19937_64* rng) {
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(*rng) < epsilon) {
      return static_cast<TierAction>(
          std::uniform_int_distribution<int>(0, kNumTierActions - 1)(*rng));
    }
  }
  return table.Greedy(s);
}

SelectorTrace RunSelector(const SelectorConfig& config,
                          const StreamEstimators& est,
                          const SceneStream& stream,
                          const StreamSignals& signals, QTable* table,
                          bool learn, uint64_t seed) {
  config.quality.Validate();
  const SelectorKind kind = config.kind;
  const bool adaptive = kind != SelectorKind::kFixed;
  if (adaptive &&
      (table == nullptr || table->num_states() != NumSelectorStates(kind))) {
    throw Error(ErrorCode::kConfiguration, "value table missing or mis-sized");
  }
  const double tau_a = est.alea.tau_alea;
  const double tau_e = est.ens.tau_epis.value();
  std::mt19937_64 quality_rng(HashSeed(seed, kQualityTag));
  std::mt19937_64 explore_rng(HashSeed(seed, kExploreTag));
  const double epsilon = learn ? config.epsilon : 0.0;

  SelectorTrace trace;
  const int n = stream.size();
  trace.tiers.reserve(n);
  SelectorState state;
  state.tier = adaptive ? config.initial_tier : config.fixed_tier;
  int prev_s = -1;
  TierAction prev_a = TierAction::kStay;
  double prev_signal = 0.0;
  double prev_quality = 0.0;
  int prev_tier = state.tier;
  for (int t = 0; t < n; ++t) {
    const double a = signals.alea[t];
    const double e = signals.epis[t];
    const bool alea_fired = a > tau_a;
    const bool epis_fired = e > tau_e;
    state.d_alea = t > 0 ? a - state.sigma_alea : 0.0;
    state.d_epis = t > 0 ? e - state.sigma_epis : 0.0;
    state.sigma_alea = a;
    state.sigma_epis = e;
    double signal = e;
    if (kind == SelectorKind::kTotalU) {
      signal = TotalRatio(est, a, e);
      state.alea_bin = SignalBin(signal, 1.0);
      state.epis_bin = 0;
    } else {
      state.alea_bin = SignalBin(a, tau_a);
      state.epis_bin = SignalBin(e, tau_e);
    }
    const int s = StateIndex(kind, state);
    if (learn && adaptive && prev_s >= 0) {
      const double r = TierReward(config.reward, prev_a, signal - prev_signal,
                                  prev_quality, prev_tier);
      const int n_visits = table->Visit(prev_s, prev_a);
      const double lr = std::max(config.lr, 1.0 / n_visits);
      QUpdate(table, prev_s, prev_a, r, s, lr, config.gamma);
    }

    TierAction action = TierAction::kStay;
    if (adaptive) action = SelectTierAction(*table, s, epsilon, &explore_rng);
    state.tier = ApplyTierAction(state.tier, action);
    const double q = FrameQuality(config.quality, state.tier,
                                  stream.difficulty[t], stream.noise[t],
                                  &quality_rng);
    state.last_quality = q;
    state.prev_fired = kind == SelectorKind::kTotalU ? signal > 1.0
                                                     : epis_fired;

    trace.tiers.push_back(state.tier);
    trace.actions.push_back(action);
    trace.quality.push_back(q);
    trace.alea_fired.push_back(alea_fired);
    trace.epis_fired.push_back(epis_fired);
    prev_s = s;
    prev_a = action;
    prev_signal = signal;
    prev_quality = q;
    prev_tier = state.tier;
  }
  return trace;
}

QTable TrainSelector(const SelectorConfig& config, const StreamSpec& spec,
                     const StreamEstimators& est, uint64_t seed) {
  if (config.kind == SelectorKind::kFixed) {
    throw Error(ErrorCode::kConfiguration, "fixed selector has no table");
  }
  QTable table(NumSelectorStates(config.kind));
  std::vector<SceneStream> streams;
  std::vector<StreamSignals> signals;
  for (int i = 0; i < config.train_streams; ++i) {
    streams.push_back(GenerateStream(
        spec, HashSeed(seed, kTrainStreamTag, static_cast<uint64_t>(i))));
    signals.push_back(StreamUncertainties(streams.back(), est));
  }
  for (int pass = 0; pass < config.train_passes; ++pass) {
    for (int i = 0; i < config.train_streams; ++i) {
      RunSelector(config, est, streams[i], signals[i], &table, true,
                  HashSeed(seed, static_cast<uint64_t>(pass),
                           static_cast<uint64_t>(i)));
    }
  }
  return table;
}

double Savings(const std::vector<int>& tiers) {
  if (tiers.empty()) throw Error(ErrorCode::kInvalidInput, "empty schedule");
  // Summing the per-frame shortfall keeps an all-XLarge schedule at exactly 0.
  const double top = kTierParams[kNumTiers - 1];
  double sum = 0.0;
  for (int t : tiers) sum += top - kTierParams.at(t);
  return sum / (static_cast<double>(tiers.size()) * top);
}

TrackingReport SummarizeTrace(const std::string& stream_name,
                              const std::string& selector_name,
                              const SelectorTrace& trace,
                              const StreamSignals& signals) {
  TrackingReport r;
  r.stream = stream_name;
  r.selector = selector_name;
  r.frames = static_cast<int>(trace.tiers.size());
  if (r.frames == 0) throw Error(ErrorCode::kInvalidInput, "empty trace");
  double q_sum = 0.0;
  double p_sum = 0.0;
  for (int t = 0; t < r.frames; ++t) {
    const int tier = trace.tiers[t];
    r.occupancy[tier] += 1.0;
    q_sum += trace.quality[t];
    p_sum += kTierParams[tier];
    if (t > 0 && tier != trace.tiers[t - 1]) ++r.switches;
    const bool up = trace.actions[t] == TierAction::kUp &&
                    (t == 0 ? tier > 0 : tier > trace.tiers[t - 1]);
    if (trace.epis_fired[t]) {
      ++r.epis_fired_frames;
      if (up) ++r.epis_fired_ups;
    } else if (trace.alea_fired[t]) {
      ++r.alea_only_frames;
      if (up) ++r.alea_only_ups;
    }
  }
  for (double& o : r.occupancy) o /= r.frames;
  r.mean_quality = q_sum / r.frames;
  r.mean_params = p_sum / r.frames;
  r.savings = Savings(trace.tiers);
  std::vector<double> a(signals.alea.begin() + 1, signals.alea.end());
  std::vector<double> e(signals.epis.begin() + 1, signals.epis.end());
  r.signal_correlation = a.size() >= 2 ? PearsonR(a, e) : 0.0;
  return r;
}

TrackingResult RunTrackingExperiment(const TrackingConfig& config,
                                     uint64_t seed) {
  config.stream.Validate();
  const StreamEstimators est =
      FitStreamEstimators(config.stream, config.estimators, seed);
  TrackingResult result;
  result.tau_alea = est.alea.tau_alea;
  result.tau_epis = est.ens.tau_epis.value();

  SelectorConfig dec = config.selector;
  dec.kind = SelectorKind::kDecomposed;
  SelectorConfig tot = config.selector;
  tot.kind = SelectorKind::kTotalU;
  result.decomposed_table = TrainSelector(dec, config.stream, est, seed);
  result.total_table = TrainSelector(tot, config.stream, est, seed);

  struct Entry {
    std::string name;
    SelectorConfig cfg;
  };
  std::vector<Entry> entries = {{"decomposed", dec}, {"total_u", tot}};
  for (int tier = 0; tier < kNumTiers; ++tier) {
    SelectorConfig fixed = config.selector;
    fixed.kind = SelectorKind::kFixed;
    fixed.fixed_tier = tier;
    entries.push_back({std::string("fixed_") + kTierNames[tier], fixed});
  }

  const int per_stream = static_cast<int>(entries.size());
  result.reports.resize(static_cast<size_t>(config.eval_streams) * per_stream);
  ParallelFor(config.eval_streams, config.workers, [&](int i) {
    const uint64_t stream_seed =
        HashSeed(seed, kEvalStreamTag, static_cast<uint64_t>(i));
    const SceneStream stream = GenerateStream(config.stream, stream_seed);
    const StreamSignals signals = StreamUncertainties(stream, est);
    const std::string name = "stream_" + std::to_string(i);
    for (int k = 0; k < per_stream; ++k) {
      QTable table = entries[k].cfg.kind == SelectorKind::kDecomposed
                         ? result.decomposed_table
                     : entries[k].cfg.kind == SelectorKind::kTotalU
                         ? result.total_table
                         : QTable();
      const SelectorTrace trace =
          RunSelector(entries[k].cfg, est, stream, signals, &table, false,
                      stream_seed);
      result.reports[static_cast<size_t>(i) * per_stream + k] =
          SummarizeTrace(name, entries[k].name, trace, signals);
    }
  });
  return result;
}

void WriteTrackingCsv(const std::vector<TrackingReport>& reports,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidInput, "cannot open " + path);
  out << "stream,selector,frames";
  for (const char* name : kTierNames) out << ",occ_" << name;
  out << ",switches,switches_per_100,mean_quality,mean_params_m,savings,"
         "epis_fired_frames,epis_fired_ups,alea_only_frames,alea_only_ups,"
         "signal_r\n";
  for (const TrackingReport& r : reports) {
    out << r.stream << ',' << r.selector << ',' << r.frames;
    for (double o : r.occupancy) out << ',' << FormatDouble(o);
    out << ',' << r.switches << ','
        << FormatDouble(100.0 * r.switches / r.frames) << ','
        << FormatDouble(r.mean_quality) << ',' << FormatDouble(r.mean_params)
        << ',' << FormatDouble(r.savings) << ',' << r.epis_fired_frames << ','
        << r.epis_fired_ups << ',' << r.alea_only_frames << ','
        << r.alea_only_ups << ',' << FormatDouble(r.signal_correlation)
        << '\n';
  }
}

nlohmann::json TrackingToJson(const TrackingResult& result) {
  nlohmann::json reports = nlohmann::json::array();
  for (const TrackingReport& r : result.reports) {
    reports.push_back({{"stream", r.stream},
                       {"selector", r.selector},
                       {"frames", r.frames},
                       {"occupancy", r.occupancy},
                       {"switches", r.switches},
                       {"mean_quality", r.mean_quality},
                       {"mean_params_m", r.mean_params},
                       {"savings", r.savings},
                       {"epis_fired_frames", r.epis_fired_frames},
                       {"epis_fired_ups", r.epis_fired_ups},
                       {"alea_only_frames", r.alea_only_frames},
                       {"alea_only_ups", r.alea_only_ups},
                       {"signal_r", r.signal_correlation}});
  }
  return {{"tau_alea", result.tau_alea},
          {"tau_epis", result.tau_epis},
          {"reports", reports},
          {"decomposed_table", result.decomposed_table.ToJson()},
          {"total_u_table", result.total_table.ToJson()}};
}

nlohmann::json StreamSpecToJson(const StreamSpec& s) {
  return {{"frames", s.frames},
          {"calib_frames", s.calib_frames},
          {"segment_min", s.segment_min},
          {"segment_max", s.segment_max},
          {"shift_density", s.shift_density},
          {"baseline_difficulty_max", s.baseline_difficulty_max},
          {"shift_difficulty_min", s.shift_difficulty_min},
          {"shift_difficulty_max", s.shift_difficulty_max},
          {"noise_segment_min", s.noise_segment_min},
          {"noise_segment_max", s.noise_segment_max},
          {"noise_density", s.noise_density},
          {"noise_floor_max", s.noise_floor_max},
          {"burst_noise_min", s.burst_noise_min},
          {"burst_noise_max", s.burst_noise_max},
          {"ar_blocks", s.ar_blocks},
          {"ar_radius", s.ar_radius},
          {"ar_angle", s.ar_angle},
          {"shift_angle", s.shift_angle},
          {"innovation_std", s.innovation_std},
          {"appearance_dims", s.appearance_dims},
          {"appearance_rho", s.appearance_rho},
          {"appearance_std", s.appearance_std},
          {"feature_noise_std", s.feature_noise_std}};
}

StreamSpec StreamSpecFromJson(const nlohmann::json& j) {
  StreamSpec s;
  s.frames = j.value("frames", s.frames);
  s.calib_frames = j.value("calib_frames", s.calib_frames);
  s.segment_min = j.value("segment_min", s.segment_min);
  s.segment_max = j.value("segment_max", s.segment_max);
  s.shift_density = j.value("shift_density", s.shift_density);
  s.baseline_difficulty_max =
      j.value("baseline_difficulty_max", s.baseline_difficulty_max);
  s.shift_difficulty_min =
      j.value("shift_difficulty_min", s.shift_difficulty_min);
  s.shift_difficulty_max =
      j.value("shift_difficulty_max", s.shift_difficulty_max);
  s.noise_segment_min = j.value("noise_segment_min", s.noise_segment_min);
  s.noise_segment_max = j.value("noise_segment_max", s.noise_segment_max);
  s.noise_density = j.value("noise_density", s.noise_density);
  s.noise_floor_max = j.value("noise_floor_max", s.noise_floor_max);
  s.burst_noise_min = j.value("burst_noise_min", s.burst_noise_min);
  s.burst_noise_max = j.value("burst_noise_max", s.burst_noise_max);
  s.ar_blocks = j.value("ar_blocks", s.ar_blocks);
  s.ar_radius = j.value("ar_radius", s.ar_radius);
  s.ar_angle = j.value("ar_angle", s.ar_angle);
  s.shift_angle = j.value("shift_angle", s.shift_angle);
  s.innovation_std = j.value("innovation_std", s.innovation_std);
  s.appearance_dims = j.value("appearance_dims", s.appearance_dims);
  s.appearance_rho = j.value("appearance_rho", s.appearance_rho);
  s.appearance_std = j.value("appearance_std", s.appearance_std);
  s.feature_noise_std = j.value("feature_noise_std", s.feature_noise_std);
  s.Validate();
  return s;
}

}  // namespace udc
