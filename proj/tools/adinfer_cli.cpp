// adinfer: command-line front end for the inference engines, the benchmark
// harness and the diagnosis-session server.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "adinfer/bench.hpp"
#include "adinfer/bounded.hpp"
#include "adinfer/conditioning.hpp"
#include "adinfer/ctp_engine.hpp"
#include "adinfer/errors.hpp"
#include "adinfer/network_io.hpp"
#include "adinfer/oracle.hpp"
#include "adinfer/service.hpp"
#include "adinfer/synthetic.hpp"

using namespace adinfer;
using nlohmann::json;

namespace {

SyntheticSpec load_spec(const std::string& source) {
  if (source == "default") return SyntheticSpec::desk_default();
  return synthetic_spec_from_json(parse_json(read_file(source)));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw NotFoundError("cannot write '" + path + "'");
  out << text;
}

json distribution(const BeliefNetwork& net, NodeIndex node,
                  const std::vector<double>& p) {
  json out = json::object();
  for (std::size_t v = 0; v < p.size(); ++v) out[net.node(node).values[v]] = p[v];
  return out;
}

LoopCutset choose_cutset(const BeliefNetwork& net,
                         const std::vector<std::string>& ids) {
  return ids.empty() ? select_cutset_auto(net) : select_cutset(net, ids);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact inference with clique-tree propagation and cutset "
               "conditioning"};
  app.require_subcommand(1);

  // posterior
  auto* posterior = app.add_subcommand("posterior", "Posterior marginals for a network and evidence");
  std::string network_path, evidence_path, engine = "ad";
  std::vector<std::string> cutset_ids;
  double threshold = 1e-4;
  std::size_t top_k = 0;
  posterior->add_option("--network", network_path, "Network JSON file")->required();
  posterior->add_option("--evidence", evidence_path, "Evidence JSON file");
  posterior->add_option("--engine", engine, "ctp | ad | bounded | oracle")
      ->check(CLI::IsMember({"ctp", "ad", "bounded", "oracle"}));
  posterior->add_option("--cutset", cutset_ids, "Cutset node ids (default: automatic)");
  posterior->add_option("--threshold", threshold, "Bounded mode weight threshold");
  posterior->add_option("--top-k", top_k, "Bounded mode: keep the k heaviest instances");

  // forest
  auto* forest = app.add_subcommand("forest", "Print the clique forest, optionally after conditioning");
  forest->add_option("--network", network_path, "Network JSON file")->required();
  forest->add_option("--cutset", cutset_ids, "Condition on these nodes first");

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic diagnostic network");
  std::string spec_source = "default", out_path;
  std::optional<std::uint64_t> seed_override;
  gen->add_option("--spec", spec_source, "Spec JSON file or 'default'");
  gen->add_option("--seed", seed_override, "Override the spec seed");
  gen->add_option("--out", out_path, "Output file (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "Time CTP against AD on sampled cases");
  std::size_t cases = 20, repeat = 5, inner = 16;
  std::uint64_t seed = 2;
  bool parallel = false;
  std::string posteriors_path;
  bench->add_option("--spec", spec_source, "Spec JSON file or 'default'");
  bench->add_option("--cases", cases, "Number of cases");
  bench->add_option("--seed", seed, "Case sampling seed");
  bench->add_option("--repeat", repeat, "Timed repetitions per case (median kept, >= 5)")
      ->check(CLI::Range(std::size_t{5}, std::size_t{1000}));
  bench->add_option("--inner", inner, "Absorptions per repetition");
  bench->add_option("--out", out_path, "Scatter CSV output")->required();
  bench->add_option("--posteriors", posteriors_path, "Write disease posteriors as CSV");
  bench->add_flag("--parallel", parallel, "Propagate AD instances on worker threads");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the diagnosis-session HTTP service");
  int port = 8080;
  std::string host = "127.0.0.1", networks_dir;
  serve->add_option("--port", port, "Port");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--networks", networks_dir, "Directory of network JSON files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*posterior) {
      auto net = std::make_shared<const BeliefNetwork>(load_network_file(network_path));
      Evidence ev;
      if (!evidence_path.empty()) ev = load_evidence(*net, read_file(evidence_path));
      json out;
      out["engine"] = engine;
      out["evidence"] = evidence_to_json(*net, ev);
      if (engine == "oracle" || engine == "ctp") {
        json nodes = json::object();
        if (engine == "oracle") {
          const auto all = oracle::enumerate_all_posteriors(*net, ev);
          for (NodeIndex v = 0; v < net->size(); ++v)
            nodes[net->node(v).id] = distribution(*net, v, all[v]);
          out["evidence_probability"] = oracle::evidence_likelihood(*net, ev);
        } else {
          CtpEngine ctp(net);
          ctp.absorb(ev);
          for (NodeIndex v = 0; v < net->size(); ++v)
            nodes[net->node(v).id] = distribution(*net, v, ctp.posterior(v));
          out["evidence_probability"] = ctp.evidence_probability();
        }
        out["posteriors"] = nodes;
      } else {
        const LoopCutset cutset = choose_cutset(*net, cutset_ids);
        json members = json::array();
        for (NodeIndex m : cutset.members) members.push_back(net->node(m).id);
        out["cutset"] = members;
        CutsetEnsemble ensemble(net, cutset);
        if (engine == "ad") {
          ensemble.absorb_evidence(ev);
          json nodes = json::object();
          for (NodeIndex v = 0; v < net->size(); ++v) {
            nodes[net->node(v).id] = distribution(
                *net, v,
                ensemble.is_cutset_member(v) ? ensemble.member_posterior(v)
                                             : ensemble.feature_posterior(v));
          }
          out["posteriors"] = nodes;
          out["weights"] = ensemble.cutset_posterior();
        } else {
          const RetentionPolicy policy = top_k ? RetentionPolicy::top_k(top_k)
                                               : RetentionPolicy::threshold(threshold);
          BoundedConditioner bounded(std::move(ensemble));
          const IntervalPosterior result = bounded.bounded_absorb(ev, policy);
          json rows = json::array();
          for (std::size_t i = 0; i < result.bounds.size(); ++i) {
            const auto assignment = cutset_assignment(*net, cutset, i);
            json label = json::object();
            for (std::size_t k = 0; k < cutset.members.size(); ++k) {
              const NodeIndex m = cutset.members[k];
              label[net->node(m).id] = net->node(m).values[assignment[k]];
            }
            rows.push_back({{"instance", label},
                            {"lower", result.bounds[i].lower},
                            {"upper", result.bounds[i].upper},
                            {"retained", result.bounds[i].retained}});
          }
          out["intervals"] = rows;
          out["rank_uncertain"] = result.rank_uncertain;
        }
      }
      std::cout << out.dump(2) << "\n";
    } else if (*forest) {
      const BeliefNetwork net = load_network_file(network_path);
      if (cutset_ids.empty()) {
        std::cout << describe(CliqueForest::from_model(factor_model(net)));
      } else {
        const LoopCutset cutset = select_cutset(net, cutset_ids);
        const auto first = cutset_assignment(net, cutset, 0);
        std::cout << describe(CliqueForest::from_model(decompose(net, cutset, first).model()));
      }
    } else if (*gen) {
      SyntheticSpec spec = load_spec(spec_source);
      if (seed_override) spec.seed = *seed_override;
      write_text(out_path, dump_network(generate(spec).network));
    } else if (*bench) {
      const SyntheticSpec spec = load_spec(spec_source);
      SyntheticNetwork synth = generate(spec);
      auto net = std::make_shared<const BeliefNetwork>(synth.network);
      const auto samples = sample_cases(*net, synth.features, cases, seed);
      BenchHarness harness(net, synth.disease, BenchOptions{repeat, inner, parallel});
      BenchReport report;
      try {
        report = harness.run_suite(samples);
      } catch (const CorrectnessGateError& e) {
        std::cerr << "correctness gate failed: " << e.what() << "\n";
        return 2;
      }
      write_text(out_path, export_scatter(report));
      if (!posteriors_path.empty()) {
        write_text(posteriors_path, export_posteriors(report, *net, synth.disease));
      }
      std::cout << format_summary(report);
    } else if (*serve) {
      SessionManager sessions;
      for (const std::string& id : sessions.load_directory(networks_dir)) {
        std::cout << "loaded network " << id << "\n";
      }
      DiagnosisService service(sessions);
      httplib::Server server;
      service.mount(server);
      std::cout << "listening on " << host << ":" << port << std::endl;
      if (!server.listen(host, port)) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
