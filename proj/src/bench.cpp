#include "adinfer/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace adinfer {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

template <typename Engine, typename Absorb>
double time_absorptions(const Engine& prototype, std::size_t inner,
                        Absorb&& absorb) {
  // Each absorption runs on a fresh copy made just before it; the copy and
  // its destruction stay outside the timed region.
  double total = 0.0;
  for (std::size_t i = 0; i < inner; ++i) {
    Engine engine = prototype;
    const auto start = Clock::now();
    absorb(engine);
    const auto stop = Clock::now();
    total += std::chrono::duration<double>(stop - start).count();
  }
  return total / static_cast<double>(inner);
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

ClusterStats cluster_stats(const std::vector<double>& values) {
  ClusterStats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1
                 ? std::sqrt(sq / static_cast<double>(values.size() - 1))
                 : 0.0;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  return s;
}

BenchHarness::BenchHarness(std::shared_ptr<const BeliefNetwork> net,
                           NodeIndex disease, BenchOptions options)
    : net_(net),
      disease_(disease),
      options_(options),
      ctp_(net),
      ad_(net, make_cutset(*net, {disease}), EnsembleOptions{options.parallel, 0}) {
  if (options_.repeat == 0 || options_.inner == 0) {
    throw InvalidArgumentError("repeat and inner counts must be positive");
  }
}

CaseResult BenchHarness::run_case(const Evidence& evidence, std::size_t case_id) {
  CaseResult result;
  result.case_id = case_id;
  result.feature_count = evidence.size();

  CtpEngine ctp = ctp_;
  const PropagationReport ctp_report = ctp.absorb(evidence);
  CutsetEnsemble ad = ad_;
  ad.absorb_evidence(evidence);

  const std::vector<double> expected = ctp.posterior(disease_);
  result.posterior = ad.cutset_posterior();
  for (std::size_t d = 0; d < expected.size(); ++d) {
    if (!(std::abs(expected[d] - result.posterior[d]) <= 1e-9)) {
      throw CorrectnessGateError(
          "case " + std::to_string(case_id) + ": CTP and AD disagree on " +
          net_->node(disease_).values[d] + " (" + std::to_string(expected[d]) +
          " vs " + std::to_string(result.posterior[d]) + ")");
    }
  }

  const PropagationReport& summary = ad.propagation_summary();
  result.touched_portions = summary.touched_components;
  result.touched_largest = summary.touched(ad.forest().largest_component());
  result.ctp_messages = ctp_report.messages_passed;
  result.ad_messages = summary.messages_passed;

  std::vector<double> ctp_times, ad_times;
  for (std::size_t r = 0; r < options_.repeat; ++r) {
    auto time_ctp = [&] {
      ctp_times.push_back(time_absorptions(
          ctp_, options_.inner, [&](CtpEngine& e) { e.absorb(evidence); }));
    };
    auto time_ad = [&] {
      ad_times.push_back(time_absorptions(
          ad_, options_.inner,
          [&](CutsetEnsemble& e) { e.absorb_evidence(evidence); }));
    };
    // Alternate which engine runs first to cancel drift.
    if (r % 2 == 0) {
      time_ctp();
      time_ad();
    } else {
      time_ad();
      time_ctp();
    }
  }
  result.ctp_seconds = median(ctp_times);
  result.ad_seconds = median(ad_times);
  result.ratio = result.ad_seconds / result.ctp_seconds;
  return result;
}

BenchReport BenchHarness::run_suite(const std::vector<CaseSample>& cases) {
  BenchReport report;
  report.largest_portion = ad_.forest().largest_component();
  std::vector<double> all, low, high;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    CaseResult r = run_case(cases[c].evidence, c);
    all.push_back(r.ratio);
    (r.touched_largest ? high : low).push_back(r.ratio);
    report.cases.push_back(std::move(r));
  }
  report.all = cluster_stats(all);
  report.low = cluster_stats(low);
  report.high = cluster_stats(high);
  return report;
}

std::string export_scatter(const BenchReport& report) {
  std::ostringstream out;
  out << "case_id,feature_count,ratio,touched_largest_portion\n";
  for (const CaseResult& c : report.cases) {
    out << c.case_id << ',' << c.feature_count << ',' << fixed(c.ratio, 3) << ','
        << (c.touched_largest ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string export_scatter_untimed(const BenchReport& report) {
  std::ostringstream out;
  out << "case_id,feature_count,touched_largest_portion\n";
  for (const CaseResult& c : report.cases) {
    out << c.case_id << ',' << c.feature_count << ','
        << (c.touched_largest ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string export_posteriors(const BenchReport& report,
                              const BeliefNetwork& net, NodeIndex disease) {
  std::ostringstream out;
  out << "case_id";
  for (const std::string& v : net.node(disease).values) out << ',' << v;
  out << '\n';
  for (const CaseResult& c : report.cases) {
    out << c.case_id;
    for (double p : c.posterior) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", p);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string format_summary(const BenchReport& report) {
  std::ostringstream out;
  auto line = [&](const char* name, const ClusterStats& s) {
    out << name << ": n=" << s.count << " mean=" << fixed(s.mean, 3)
        << " sd=" << fixed(s.stddev, 3) << " range=" << fixed(s.min, 3) << "-"
        << fixed(s.max, 3) << "\n";
  };
  out << "# AD/CTP wall-time ratios; AD time includes weight update and "
         "normalization\n";
  line("all cases", report.all);
  line("evidence outside largest portion", report.low);
  line("evidence in largest portion", report.high);
  return out.str();
}

Evidence all_portions_evidence(const SyntheticNetwork& synth,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<ValueIndex> world = forward_sample(synth.network, rng);
  Evidence ev;
  for (const auto& portion : synth.portions) {
    ev.observe(portion.front(), world[portion.front()]);
  }
  for (NodeIndex f : synth.independent) ev.observe(f, world[f]);
  return ev;
}

}  // namespace adinfer
