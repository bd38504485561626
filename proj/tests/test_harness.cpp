#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <regex>
#include <vector>

#include "test_util.hpp"

using namespace mcs;
using mcs::testing::slurp;
using mcs::testing::TempDir;

namespace {

/// Minimal XML well-formedness check: a single root, balanced and properly
/// nested tags, quoted attributes, no stray '<' or '&'.
bool well_formed_xml(const std::string& s, std::string* why) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  int roots = 0;
  auto fail = [&](const std::string& w) {
    *why = w + " at offset " + std::to_string(i);
    return false;
  };
  auto name_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.'; };
  while (i < s.size()) {
    if (s[i] == '&') {
      const auto semi = s.find(';', i);
      if (semi == std::string::npos) return fail("bare &");
      const auto ent = s.substr(i + 1, semi - i - 1);
      if (ent != "amp" && ent != "lt" && ent != "gt" && ent != "quot" && ent != "apos") return fail("unknown entity");
      i = semi + 1;
      continue;
    }
    if (s[i] != '<') {
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(s[i]))) return fail("text outside root");
      ++i;
      continue;
    }
    if (s.compare(i, 5, "<?xml") == 0) {
      const auto e = s.find("?>", i);
      if (e == std::string::npos || i != 0) return fail("bad declaration");
      i = e + 2;
      continue;
    }
    if (s.compare(i, 4, "<!--") == 0) {
      const auto e = s.find("-->", i);
      if (e == std::string::npos) return fail("open comment");
      i = e + 3;
      continue;
    }
    const bool closing = i + 1 < s.size() && s[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    const std::size_t n0 = j;
    while (j < s.size() && name_char(s[j])) ++j;
    const std::string name = s.substr(n0, j - n0);
    if (name.empty()) return fail("empty tag name");
    if (closing) {
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j >= s.size() || s[j] != '>') return fail("bad closing tag");
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
      stack.pop_back();
      i = j + 1;
      continue;
    }
    // attributes
    bool self_close = false;
    while (true) {
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j >= s.size()) return fail("unterminated tag");
      if (s[j] == '>') break;
      if (s[j] == '/' && j + 1 < s.size() && s[j + 1] == '>') {
        self_close = true;
        ++j;
        break;
      }
      const std::size_t a0 = j;
      while (j < s.size() && name_char(s[j])) ++j;
      if (j == a0) return fail("bad attribute name");
      if (j >= s.size() || s[j] != '=') return fail("attribute without value");
      ++j;
      if (j >= s.size() || s[j] != '"') return fail("unquoted attribute");
      const auto e = s.find('"', j + 1);
      if (e == std::string::npos) return fail("unterminated attribute");
      if (s.substr(j + 1, e - j - 1).find('<') != std::string::npos) return fail("'<' in attribute");
      j = e + 1;
    }
    if (stack.empty()) ++roots;
    if (!self_close) stack.push_back(name);
    i = j + 1;
  }
  if (!stack.empty()) {
    *why = "unclosed <" + stack.back() + ">";
    return false;
  }
  if (roots != 1) {
    *why = "expected one root element";
    return false;
  }
  return true;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

ExperimentConfig small_sphere_config() {
  ExperimentConfig c;
  c.dataset.generator = "sphere";
  c.dataset.n = 1500;
  c.dataset.intrinsic_dim = 2;
  c.dataset.ambient_dim = 20;
  c.gmra.max_scale = 4;
  c.gmra.local_dim = 2;
  c.sigmas = {0.0, 0.05};
  c.oversampling = {2, 4, 16};
  c.num_draws = 4;
  c.seed = 11;
  return c;
}

}  // namespace

TEST(RelMse, HandValues) {
  RowMatrix x(2, 2), r(2, 2);
  x << 1, 0, 0, 2;
  EXPECT_EQ(rel_mse(x, x), 0.0);
  RowMatrix one(1, 2), zero = RowMatrix::Zero(1, 2);
  one << 1, 0;
  EXPECT_DOUBLE_EQ(rel_mse(one, zero), 1.0);
  // relative errors 0.3 and 0.4
  r << 1.3, 0, 0, 2.8;
  EXPECT_NEAR(rel_mse(x, r), 0.35355339059327376, 1e-15);
}

TEST(RelMse, ZeroNormNamesIndex) {
  RowMatrix x(3, 2);
  x << 1, 0, 0, 0, 1, 1;
  try {
    rel_mse(x, x);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(rel_mse(x, RowMatrix::Zero(2, 2)), std::invalid_argument);
}

TEST(RelMse, MaxSquaredRelativeError) {
  RowMatrix x(2, 1), r(2, 1);
  x << 1, 2;
  r << 1.5, 2;
  EXPECT_NEAR(max_sq_rel_err(x, r), 0.25, 1e-15);
}

TEST(Baseline, DefinitionIdentityAndFlatData) {
  const auto dict = mcs::testing::circle_dictionary(512, 5);
  const auto pts = add_noise(gen_sphere(300, 1, 3), 0.05, 4);
  EXPECT_DOUBLE_EQ(rel_mse_baseline(pts, dict), rel_mse(pts.points(), project_rows(dict, pts.points(), 5)));
  // data on the dictionary's own planes
  RowMatrix on(dict.size(5), 2);
  for (Eigen::Index k = 0; k < dict.size(5); ++k) on.row(k) = dict.projector(5, k).center.transpose();
  EXPECT_LE(rel_mse_baseline(PointCloud(on), dict), 1e-15);
}

TEST(Config, JsonRoundTripAndOverrides) {
  auto c = small_sphere_config();
  c.ensemble = Ensemble::gaussian;
  c.scales = {1, 2};
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.dataset.generator, "sphere");
  EXPECT_EQ(back.ensemble, Ensemble::gaussian);
  auto j = to_json(c);
  j["gmra"]["local_dim"] = "adaptive";
  EXPECT_FALSE(config_from_json(j).gmra.local_dim.has_value());
}

TEST(Config, Rejections) {
  auto j = to_json(small_sphere_config());
  j["num_draws"] = 0;
  EXPECT_THROW(config_from_json(j), std::invalid_argument);
  j = to_json(small_sphere_config());
  j["oversampling"] = {2, 0};
  EXPECT_THROW(config_from_json(j), std::invalid_argument);
  j = to_json(small_sphere_config());
  j["colour"] = "blue";
  EXPECT_THROW(config_from_json(j), std::invalid_argument);
  j = to_json(small_sphere_config());
  j["gmra"]["local_dim"] = "many";
  EXPECT_THROW(config_from_json(j), std::invalid_argument);
  TempDir dir("cfg");
  mcs::testing::spit(dir.file("bad.json"), "{ \"seed\": ");
  EXPECT_THROW(load_config(dir.file("bad.json")), ParseError);
}

TEST(Experiment, MatrixSizeRule) {
  EXPECT_EQ(measurement_count(2, 4, 3), 3);
  EXPECT_EQ(measurement_count(2, 4, 100), 8);
  EXPECT_EQ(measurement_count(3, 1, 100), 3);
}

TEST(Experiment, FullRankEqualsUncompressed) {
  auto c = small_sphere_config();
  c.oversampling = {10};  // m = min(20, 20) = D
  c.num_draws = 1;
  c.ensemble = Ensemble::orthoprojection;
  c.sigmas = {0.05};
  const auto res = run_experiment(c);
  ASSERT_EQ(res.sigmas.size(), 1u);
  for (const auto& s : res.summary) {
    EXPECT_EQ(s.m, 20);
    EXPECT_NEAR(s.mean, s.uncompressed, 1e-10) << "scale " << s.j;
  }
}

TEST(Experiment, StatisticalPropertiesOnSphere) {
  const auto res = run_experiment(small_sphere_config());
  ASSERT_EQ(res.sigmas.size(), 2u);
  for (std::size_t si = 0; si < 2; ++si) {
    const auto& info = res.sigmas[si];
    for (int j = 0; j <= info.J; ++j) {
      const auto* a = res.find(si, j, 2);
      const auto* b = res.find(si, j, 16);
      ASSERT_NE(a, nullptr);
      ASSERT_NE(b, nullptr);
      EXPECT_GE(a->mean, 0.0);
      EXPECT_GE(a->std, 0.0);
      // more measurements never hurt beyond noise
      EXPECT_LE(b->mean, a->mean + 2 * (a->std + b->std)) << "sigma " << info.sigma << " scale " << j;
    }
  }
  // noise floor from below
  const auto& noisy = res.sigmas[1];
  double best = 1e300;
  for (const auto& s : res.summary)
    if (s.sigma == noisy.sigma) best = std::min(best, s.mean);
  EXPECT_GE(best, 0.25 * noisy.sigma / noisy.mean_norm);
}

TEST(Experiment, CircleBaselineBelowOversampledCurve) {
  ExperimentConfig c;
  c.dataset.generator = "sphere";
  c.dataset.intrinsic_dim = 1;
  c.dataset.n = 512;
  c.gmra.max_scale = 5;
  c.gmra.local_dim = 1;
  c.sigmas = {0.02};
  c.oversampling = {16};
  c.num_draws = 5;
  c.ensemble = Ensemble::gaussian;
  const auto res = run_experiment(c);
  for (const auto& s : res.summary) EXPECT_LE(s.rel_mse_J, s.mean + 2 * s.std) << "scale " << s.j;
}

TEST(Experiment, ScalesBeyondDepthAreSkipped) {
  auto c = small_sphere_config();
  c.sigmas = {0.0};
  c.oversampling = {2};
  c.num_draws = 1;
  c.scales = {1, 9};
  const auto res = run_experiment(c);
  ASSERT_EQ(res.summary.size(), 1u);
  bool skipped = false;
  for (const auto& r : res.rows) skipped = skipped || (r.j == 9 && r.status.rfind("skipped", 0) == 0);
  EXPECT_TRUE(skipped);
  EXPECT_NE(results_csv(res).find("skipped"), std::string::npos);
}

TEST(Experiment, DeterministicBytes) {
  TempDir a("expa"), b("expb");
  auto c = small_sphere_config();
  c.num_draws = 2;
  c.output_dir = a.path().string();
  run_experiment(c);
  c.output_dir = b.path().string();
  run_experiment(c);
  for (const char* f : {"results.csv", "summary.csv", "relmse_sigma0.svg", "relmse_sigma1.svg"}) {
    const auto x = slurp(a.file(f)), y = slurp(b.file(f));
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, y) << f;
  }
  c.seed = 12;
  c.output_dir.clear();
  EXPECT_NE(results_csv(run_experiment(c)), slurp(a.file("results.csv")));
}

TEST(Plot, WellFormedWithSingleBaseline) {
  TempDir dir("plot");
  auto c = small_sphere_config();
  c.num_draws = 2;
  c.output_dir = dir.path().string();
  const auto res = run_experiment(c);
  for (std::size_t si = 0; si < res.sigmas.size(); ++si) {
    const std::string svg = render_svg(res, si);
    std::string why;
    EXPECT_TRUE(well_formed_xml(svg, &why)) << why;
    EXPECT_EQ(count(svg, "class=\"baseline\""), 1u);
    EXPECT_EQ(count(svg, "stroke-dasharray"), 1u);
    EXPECT_EQ(count(svg, "<polyline class=\"mean\""), 3u);
    EXPECT_EQ(count(svg, "<polygon class=\"band\""), 3u);
    EXPECT_EQ(svg, slurp(dir.file("relmse_sigma" + std::to_string(si) + ".svg")));
  }
  // re-plot from the written summary
  TempDir out("replot");
  const auto paths = emit_plot(load_summary(dir.path().string()), out.path().string());
  ASSERT_EQ(paths.size(), 2u);
  std::string why;
  EXPECT_TRUE(well_formed_xml(slurp(paths[0]), &why)) << why;
}

TEST(Plot, XmlCheckerRejectsBrokenDocuments) {
  std::string why;
  EXPECT_FALSE(well_formed_xml("<svg><g></svg>", &why));
  EXPECT_FALSE(well_formed_xml("<svg a=b></svg>", &why));
  EXPECT_FALSE(well_formed_xml("<svg>&nbsp;</svg>", &why));
  EXPECT_FALSE(well_formed_xml("<a/><b/>", &why));
  EXPECT_TRUE(well_formed_xml("<?xml version=\"1.0\"?>\n<svg x=\"1\"><g/></svg>\n", &why)) << why;
}

TEST(Plot, NothingToPlot) {
  ExperimentResult empty;
  TempDir dir("empty");
  try {
    emit_plot(empty, dir.path().string());
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_EQ(std::string(e.what()), "nothing to plot");
  }
}

TEST(Dataset, NamesAndEmbedding) {
  DatasetSpec ds;
  ds.generator = "sphere";
  ds.intrinsic_dim = 2;
  ds.ambient_dim = 20;
  ds.n = 100;
  EXPECT_EQ(dataset_name(ds), "sphere2_D20");
  const auto c = make_dataset(ds, 5);
  EXPECT_EQ(c.ambient_dim(), 20);
  for (Eigen::Index i = 0; i < c.size(); ++i) EXPECT_NEAR(c.point(i).norm(), 1.0, 1e-12);
  ds.generator = "torus";
  EXPECT_THROW(make_dataset(ds, 5), std::invalid_argument);
}
