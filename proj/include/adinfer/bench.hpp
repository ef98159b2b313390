#pragma once

#include <memory>
#include <string>
#include <vector>

#include "adinfer/conditioning.hpp"
#include "adinfer/ctp_engine.hpp"
#include "adinfer/errors.hpp"
#include "adinfer/synthetic.hpp"

namespace adinfer {

// CTP and AD disagreed on a case; no timing is reported.
class CorrectnessGateError : public Error {
 public:
  using Error::Error;
};

struct BenchOptions {
  std::size_t repeat = 5;  // timed repetitions per case; the median is kept
  std::size_t inner = 16;  // absorptions per repetition, on fresh copies
  bool parallel = false;   // AD per-instance threads
};

struct CaseResult {
  std::size_t case_id = 0;
  std::size_t feature_count = 0;
  double ctp_seconds = 0.0;
  double ad_seconds = 0.0;
  double ratio = 0.0;  // ad / ctp
  std::vector<std::size_t> touched_portions;  // conditioned forest components
  bool touched_largest = false;
  std::size_t ctp_messages = 0;
  std::size_t ad_messages = 0;
  std::vector<double> posterior;  // disease posterior (AD)
};

struct ClusterStats {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

ClusterStats cluster_stats(const std::vector<double>& values);

struct BenchReport {
  std::vector<CaseResult> cases;
  std::size_t largest_portion = 0;
  ClusterStats all;
  // Cases whose evidence misses / hits the largest portion.
  ClusterStats low;
  ClusterStats high;
};

// Times per-case evidence absorption with clique-tree propagation on the full
// network against aggregation after decomposition on the disease cutset.
// Engines are built and calibrated once; every timed absorption starts from
// a fresh copy of the calibrated prior, and copying is not timed.
class BenchHarness {
 public:
  BenchHarness(std::shared_ptr<const BeliefNetwork> net, NodeIndex disease,
               BenchOptions options = {});

  // Throws CorrectnessGateError when disease posteriors differ by more than
  // 1e-9 on any case.
  BenchReport run_suite(const std::vector<CaseSample>& cases);
  CaseResult run_case(const Evidence& evidence, std::size_t case_id);

  const CtpEngine& ctp() const { return ctp_; }
  const CutsetEnsemble& ad() const { return ad_; }

 private:
  std::shared_ptr<const BeliefNetwork> net_;
  NodeIndex disease_;
  BenchOptions options_;
  CtpEngine ctp_;
  CutsetEnsemble ad_;
};

// Scatter data: case_id,feature_count,ratio,touched_largest_portion.
std::string export_scatter(const BenchReport& report);
// Same rows without the timing column; stable across runs.
std::string export_scatter_untimed(const BenchReport& report);
// case_id followed by the disease posterior, full precision.
std::string export_posteriors(const BenchReport& report,
                              const BeliefNetwork& net, NodeIndex disease);
// Human-readable aggregate block (ratios as 3-decimal fixed point).
std::string format_summary(const BenchReport& report);

// Evidence with one observation in every conditioned portion, values from a
// forward sample: the worst case for selective propagation.
Evidence all_portions_evidence(const SyntheticNetwork& synth, std::uint64_t seed);

}  // namespace adinfer
