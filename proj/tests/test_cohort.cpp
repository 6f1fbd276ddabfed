#include <doctest.h>

#include "physio/config.hpp"
#include "physio/evaluation.hpp"
#include "physio/synthgen.hpp"

using namespace physio;

// Default cohort through the library, as the CLI would run it.
TEST_CASE("default cohort: personalized rows and leave-one-out columns") {
  const RunConfig cfg;
  const FeaturizeOptions opts = cfg.featurize_options();
  const ExperimentConfig ecfg = cfg.experiment_config();
  const BuiltinExtractor ex(cfg.count("extractor_seed"));
  std::vector<FeatureSet> users;
  for (const MultimodalRecord& rec : preset_sessions(cfg.synth_options())) users.push_back(featurize(rec, ex, opts));

  const MatrixReport cross = cross_user_matrix(users, ecfg);
  const MatrixReport comb = combined_matrix(users, ecfg);
  const std::size_t n = users.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      CAPTURE(i);
      CAPTURE(j);
      // Row i: the tested user's own model beats every other user's model.
      CHECK(cross.accuracy(i, j).mean < cross.accuracy(i, i).mean);
      // Column j: users seen in training beat the held-out user.
      CHECK(comb.accuracy(j, j).mean < comb.accuracy(i, j).mean);
    }
  }
}
