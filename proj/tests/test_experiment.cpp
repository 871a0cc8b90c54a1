#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "rgcr/audit.hpp"
#include "rgcr/experiment.hpp"

using namespace rgcr;

TEST_CASE("config json round trip and validation") {
  ExperimentConfig c;
  c.graph = "cycle";
  c.cycle_n = 24;
  c.algo = "three_net";
  c.weights = "degree";
  c.scheme = "complete";
  c.p = 0.5;
  c.mixture_sizes = {1, 5};
  c.seed = 99;
  ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  REQUIRE(back.to_json() == c.to_json());
  REQUIRE(back.cycle_n == 24);
  REQUIRE(back.rand_scheme() == Scheme::complete);
  REQUIRE(back.cluster_algo() == ClusterAlgo::three_net);

  // defaults survive a partial document
  ExperimentConfig d = ExperimentConfig::from_json(nlohmann::json{{"p", 0.3}});
  REQUIRE(d.p == 0.3);
  REQUIRE(d.side == 32);
  REQUIRE(d.algo == "one_hop_max");

  REQUIRE_THROWS(ExperimentConfig::from_json(nlohmann::json{{"p", 1.5}}));
  REQUIRE_THROWS(ExperimentConfig::from_json(
      nlohmann::json{{"scheme", "complete"}, {"p", 0.3}}));
  REQUIRE_THROWS(ExperimentConfig::from_json(nlohmann::json{{"algo", "bogus"}}));
  REQUIRE_THROWS(ExperimentConfig::from_json(nlohmann::json{{"replicates", 0}}));
}

TEST_CASE("make_graph dispatch") {
  ExperimentConfig c;
  c.graph = "cycle";
  c.cycle_n = 10;
  REQUIRE(make_graph(c).n == 10);
  c.graph = "small_world";
  c.side = 4;
  Graph sw = make_graph(c);
  REQUIRE(sw.n == 16);
  REQUIRE(make_graph(c).m == sw.m);  // deterministic in the config seed
  c.graph = "nope";
  REQUIRE_THROWS(make_graph(c));
}

TEST_CASE("report output is deterministic and format-checked") {
  Report r;
  r.name = "demo";
  r.config = nlohmann::json{{"seed", 1}};
  r.columns = {"a", "b"};
  r.add_row({"1", fmt(0.25)});
  r.add_row({"2", fmt(1.0 / 3.0)});
  REQUIRE_THROWS(r.add_row({"only-one"}));

  std::string csv = r.to_csv();
  REQUIRE(csv.find("# report=demo") == 0);
  REQUIRE(csv.find("a,b\n") != std::string::npos);
  REQUIRE(csv.find("2,0.33333333333333331\n") != std::string::npos);
  REQUIRE(r.to_csv() == csv);  // byte-identical re-render

  std::string js = r.to_json_text();
  auto parsed = nlohmann::json::parse(js);
  REQUIRE(parsed["rows"].size() == 2);
  REQUIRE(parsed["rows"][0]["a"] == "1");

  r.save("tmp_report.csv", "csv");
  std::ifstream in("tmp_report.csv");
  std::string got((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(got == csv);
  REQUIRE_THROWS(r.save("tmp_report.xyz", "xml"));
}

TEST_CASE("quantile and loglog_slope") {
  std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  REQUIRE(quantile(v, 0.0) == 1.0);
  REQUIRE(quantile(v, 1.0) == 4.0);
  REQUIRE(quantile(v, 0.5) == Catch::Approx(2.5));
  REQUIRE_THROWS(quantile({}, 0.5));

  // exact power law: y = 7 x^{-1/2}
  std::vector<double> x{2, 8, 32, 128}, y;
  for (double xi : x) y.push_back(7.0 / std::sqrt(xi));
  REQUIRE(loglog_slope(x, y) == Catch::Approx(-0.5).margin(1e-12));
}

TEST_CASE("mixture experiment on a small cycle") {
  ExperimentConfig c;
  c.graph = "cycle";
  c.cycle_n = 12;
  c.mixture_sizes = {1, 8};
  c.replicates = 4;
  c.seed = 5;
  Report r = run_mixture_experiment(c);
  REQUIRE(r.name == "mixture");
  REQUIRE(r.columns.size() == 8);
  // 4 replicate rows + 3 summary rows per K
  REQUIRE(r.rows.size() == 2 * (4 + 3));
  // independent scheme is always feasible; medians present and positive
  double med1 = -1, med8 = -1;
  for (const auto& row : r.rows) {
    REQUIRE(row[7] == "1");
    if (row[1] == "median" && row[0] == "1") med1 = std::stod(row[3]);
    if (row[1] == "median" && row[0] == "8") med8 = std::stod(row[3]);
  }
  REQUIRE(med1 > 0);
  REQUIRE(med8 > 0);

  // determinism: same config, byte-identical report
  Report r2 = run_mixture_experiment(c);
  REQUIRE(r2.to_csv() == r.to_csv());
}

TEST_CASE("estimator simulation smoke: HT close to the truth on a cycle") {
  ExperimentConfig c;
  c.graph = "cycle";
  c.cycle_n = 30;
  c.sims = 4000;
  c.gcr_clusterings = 3;
  c.gcr_sims = 50;
  c.k_probs = 64;
  c.response.sigma = 0.0;
  c.seed = 11;
  Report r = run_estimator_sim(c);
  REQUIRE(r.rows.size() == 4);
  double bias = 0, truth_scale = 0;
  for (const auto& row : r.rows)
    if (row[0] == "rgcr" && row[1] == "ht") bias = std::stod(row[3]);
  Graph g = gen_cycle(30);
  HomophilyVector hv = homophily_vector(g);
  BaselineResult base = baseline_outcomes(g, hv.h, c.response, child_seed(c.seed, 1));
  truth_scale = std::abs(true_gate(base.y0, c.response.delta, c.response.gamma).tau);
  // unbiased in expectation; MC noise bounded loosely
  REQUIRE(std::abs(bias) < std::max(1.0, truth_scale));
  REQUIRE(run_estimator_sim(c).to_csv() == r.to_csv());
}

TEST_CASE("ring variance limit closed forms") {
  // independent: (2a+tau)^2/k + b^2 k (1-cos(2pi/k))/pi^2
  double got = ring_variance_limit(Scheme::independent, 4, 1.0, 1.0, 1.0);
  REQUIRE(got == Catch::Approx(9.0 / 4 + 4.0 / (M_PI * M_PI)).margin(1e-14));
  double gotc = ring_variance_limit(Scheme::complete, 4, 1.0, 1.0, 1.0);
  REQUIRE(gotc == Catch::Approx(16.0 / (3.0 * M_PI * M_PI)).margin(1e-14));
}

TEST_CASE("ring check converges to the limit") {
  // the deviation from the asymptotic closed form decays like 1/n: doubling n
  // twice should cut the error by about 4x
  for (Scheme scheme : {Scheme::independent, Scheme::complete}) {
    RingCheckRow a = ring_check(100, 4, scheme, 1.0, 1.0, 1.0);
    RingCheckRow b = ring_check(400, 4, scheme, 1.0, 1.0, 1.0);
    REQUIRE(b.rel_err < a.rel_err);
    REQUIRE(b.rel_err < 0.03);
    REQUIRE(a.rel_err / b.rel_err == Catch::Approx(4.0).margin(1.0));
  }
  REQUIRE_THROWS(ring_check(10, 3, Scheme::independent, 1, 1, 1));

  ExperimentConfig c;
  c.graph = "cycle";
  c.cycle_n = 200;
  c.ring_k = 4;
  Report r = run_ring_check(c);
  REQUIRE(r.rows.size() == 1);
  REQUIRE(std::stod(r.rows[0][5]) < 0.05);
}

TEST_CASE("bound audit smoke on P3") {
  Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
  auto rows = audit_small_graph(p3, "P3", 0.5, 1);
  REQUIRE(!rows.empty());
  for (const AuditRow& r : rows) {
    INFO(r.bound << " " << r.instance << " obs=" << r.observed
                 << " bound=" << r.bound_value << " " << r.note);
    REQUIRE(r.pass);
  }
}
