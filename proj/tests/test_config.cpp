#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "qcert/config.hpp"
#include "qcert/errors.hpp"

namespace qcert {
namespace {

constexpr const char* kMinimal = R"({
  "plant": {
    "M1": [[1]], "M2": [[0]], "N1": [[1]], "N2": [[0]], "E1": [[1]], "E2": [[0]]
  },
  "sector": {"gamma0": 1, "gamma1": 1, "gamma2": 1}
})";

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text) {
  try {
    load_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, BundledJosephson) {
  const auto cfg = josephson_config();
  EXPECT_EQ(cfg.plant.n_modes(), 2);
  EXPECT_EQ(cfg.plant.m_channels(), 2);
  EXPECT_EQ(cfg.sector.gamma0, 0.5);
  EXPECT_EQ(cfg.sector.gamma1, 0.5);
  EXPECT_EQ(cfg.sector.gamma2, 0.5);
  EXPECT_EQ(cfg.sector.delta0, 0.0);
  EXPECT_EQ(cfg.sector.delta1, 0.0);
  EXPECT_EQ(cfg.sector.delta2, 0.0);
  EXPECT_EQ(cfg.sector.delta3, 1.0);
  EXPECT_TRUE(cfg.cost.is_josephson());
  EXPECT_EQ(cfg.nonlinearity.kind(), NonlinearitySpec::Kind::NegCosQ);
  EXPECT_EQ(cfg.kappa_mode, KappaMode::DerivationConsistent);
}

TEST(Config, EmbeddedCopyMatchesShippedFile) {
  const auto file = read_file(std::string(QCERT_TEST_DATA_DIR) + "/josephson.json");
  ASSERT_FALSE(file.empty());
  EXPECT_EQ(load_config(file), josephson_config());
}

TEST(Config, MinimalAppliesDefaults) {
  const auto cfg = load_config(kMinimal);
  EXPECT_EQ(cfg.solver.eps_margin, 1e-8);
  EXPECT_EQ(cfg.solver.tol, 1e-9);
  EXPECT_EQ(cfg.solver.max_iter, 200);
  EXPECT_FALSE(cfg.tau1.fixed.has_value());
  EXPECT_EQ(cfg.tau1.grid_points, 31);
  EXPECT_EQ(cfg.sector.delta3, 0.0);
  EXPECT_EQ(cfg.kappa_mode, KappaMode::DerivationConsistent);
  EXPECT_EQ(cfg.sector_grid, SectorGrid{});
}

TEST(Config, GammaZeroIsSchemaError) {
  std::string text = kMinimal;
  text.replace(text.find("\"gamma1\": 1"), 11, "\"gamma1\": 0");
  EXPECT_NE(error_of(text).find("gamma1 must be positive"), std::string::npos);
}

TEST(Config, ParseErrorReportsPosition) {
  const auto msg = error_of("{\n  \"plant\": [1, 2,\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyNamed) {
  std::string text = kMinimal;
  text.replace(text.find("\"sector\""), 8, "\"sectr\"");
  EXPECT_NE(error_of(text).find("sectr"), std::string::npos);
  text = kMinimal;
  text.replace(text.find("\"gamma2\""), 8, "\"gamma9\"");
  EXPECT_NE(error_of(text).find("sector.gamma9: unknown key"), std::string::npos);
}

TEST(Config, UnknownNonlinearityTag) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), ", \"nonlinearity\": \"tanh\"");
  EXPECT_NE(error_of(text).find("tanh"), std::string::npos);
}

TEST(Config, RaggedMatrixRejected) {
  std::string text = kMinimal;
  text.replace(text.find("\"N1\": [[1]]"), 11, "\"N1\": [[1], [1, 2]]");
  EXPECT_NE(error_of(text).find("ragged"), std::string::npos);
}

TEST(Config, MissingPlantRejected) { EXPECT_NE(error_of("{}").find("plant"), std::string::npos); }

TEST(Config, ComplexEntries) {
  std::string text = kMinimal;
  text.replace(text.find("\"E1\": [[1]]"), 11, "\"E1\": [[{\"re\": 0.5, \"im\": -2}]]");
  EXPECT_EQ(load_config(text).plant.E1()(0, 0), Complex(0.5, -2.0));
}

TEST(Config, FixedAndSearchAreExclusive) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), ", \"tau1\": {\"fixed\": 1, \"search\": {}}");
  EXPECT_FALSE(error_of(text).empty());
  text = kMinimal;
  text.insert(text.rfind('}'), ", \"tau1\": {\"fixed\": 0.8165}");
  EXPECT_EQ(load_config(text).tau1.fixed, 0.8165);
}

TEST(Config, EmptyGridIsSchemaError) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), ", \"sector_grid\": {\"n_radial\": 0}");
  EXPECT_NE(error_of(text).find("sector_grid"), std::string::npos);
}

TEST(Config, SymmetrizeOption) {
  std::string text = kMinimal;
  text.replace(text.find("\"M1\": [[1]], \"M2\": [[0]]"), 24,
               "\"M1\": [[1, 0], [0, 1]], \"M2\": [[0, 1], [0, 0]]");
  text.replace(text.find("\"N1\": [[1]], \"N2\": [[0]], \"E1\": [[1]], \"E2\": [[0]]"), 50,
               "\"N1\": [[1, 0]], \"N2\": [[0, 0]], \"E1\": [[1, 0]], \"E2\": [[0, 0]]");
  EXPECT_NE(error_of(text).find("M2 not symmetric"), std::string::npos);
  LoadOptions opts;
  opts.symmetrize = true;
  EXPECT_EQ(load_config(text, opts).plant.M2()(1, 0), Complex(0.5));
}

TEST(Config, RoundTripBundled) {
  const auto cfg = josephson_config();
  EXPECT_EQ(load_config(serialize_config(cfg)), cfg);
}

TEST(Config, RoundTripVariants) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'),
              ", \"cost\": {\"c_w\": 2.5, \"g_w\": \"polynomial\", \"coeffs\": [0, 1, -0.5]}"
              ", \"nonlinearity\": {\"kind\": \"polynomial_q\", \"coeffs\": [0, 0, 0.25]}"
              ", \"tau1\": {\"fixed\": 0.5}, \"kappa_mode\": \"literal\""
              ", \"simulate\": {\"cutoff\": 6, \"interior_cutoff\": 3, \"initial_state\": {\"fock\": [1]},"
              " \"ordering\": \"symmetrized\"}");
  const auto cfg = load_config(text);
  EXPECT_EQ(cfg.cost.c_w(), 2.5);
  EXPECT_EQ(cfg.simulate.initial.occupations, std::vector<int>{1});
  EXPECT_EQ(cfg.simulate.ordering, Ordering::Symmetrized);
  const auto again = load_config(serialize_config(cfg));
  EXPECT_EQ(again, cfg);
  EXPECT_EQ(serialize_config(again), serialize_config(cfg));
}

}  // namespace
}  // namespace qcert
