#pragma once

#include "vcrown/bounds.hpp"
#include "vcrown/model.hpp"
#include "vcrown/rng.hpp"
#include "vcrown/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vcrown {

/// Synthetic score-box distribution. Centers and coefficients are standard
/// normal; every half-width equals 0.5 * width_scale.
struct GeneratorConfig {
    double width_scale = 1.0;
    double coeff_scale = 1.0;
};

struct Instance {
    std::vector<double> c;
    std::vector<double> center;
    ScoreBox box;
};

/// Deterministic instance for (K, seed, trial). Draws from
/// Rng::stream(seed, K, trial): K centers, then K coefficients.
Instance synth_instance(std::size_t k, std::uint64_t seed, std::uint64_t trial,
                        const GeneratorConfig& config = {});

/// Smallest objective found over: the K+1 threshold vertices of c and of -c,
/// `budget` uniform samples, and a coordinate-descent polish of the best
/// sample. Always an upper bound on the true minimum.
double attack_min_objective(std::span<const double> c, const ScoreBox& box, std::size_t budget,
                            Rng& rng);

/// Smallest margin logit_y - logit_t found over the box center, `budget`
/// uniform samples, `budget` random corners and coordinate descent on pixels.
double attack_min_margin(const AttentionModel& model, const InputBox& box, std::size_t label,
                         std::size_t target, std::size_t budget, Rng& rng);

struct SweepConfig {
    std::vector<std::size_t> ks{4, 8, 16, 32, 64, 128};
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    GeneratorConfig generator;
    std::size_t attack_budget = 64;
    unsigned threads = 1;
};

struct TrialRecord {
    std::size_t k = 0;
    std::size_t trial = 0;
    std::string method;
    double lower = 0.0;
    double attack = 0.0;
    double gap = 0.0;
    double time_us = 0.0;
};

/// Method names in record order.
inline const std::vector<std::string> kSweepMethods{"vertex", "baseline", "certified"};

/// Records ordered by (K, trial, method).
std::vector<TrialRecord> run_sweep(const SweepConfig& config);

struct AggregateRow {
    std::size_t k = 0;
    std::string method;
    double cert_rate = 0.0; // fraction of trials with lower > 0
    double mean_lower = 0.0;
    double mean_gap = 0.0;
    double total_time_s = 0.0;
};

/// One row per (K, method), in record order.
std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records);

/// Columns K,trial,method,lower,attack,gap,time_us.
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);
/// Columns K,method,cert_rate,mean_lower,mean_gap,total_time_s.
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

} // namespace vcrown
