#include <cmath>

#include "catch2/catch_amalgamated.hpp"
#include "oracles.hpp"
#include "splitlink/svm.hpp"
#include "testutil.hpp"

using namespace splitlink;

namespace {

std::vector<LabeledExample> random_instance(Rng& rng, size_t n, size_t dim) {
  std::vector<LabeledExample> data(n);
  for (size_t i = 0; i < n; ++i) {
    data[i].features.resize(dim);
    for (size_t d = 0; d < dim; ++d) data[i].features[d] = rng.unit();
    data[i].label = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.index(2));
  }
  return data;
}

}  // namespace

TEST_CASE("linearly separable points train to a separating model", "[svm]") {
  std::vector<LabeledExample> data;
  for (double x = 0.0; x < 1.0; x += 0.25) {
    data.push_back({{x, x + 2.0}, 1});
    data.push_back({{x, x - 2.0}, 0});
  }
  SvmParams params;
  params.kernel = Kernel::Linear;
  params.c = 10.0;
  SvmModel model = train_svm(data, params);
  for (const auto& ex : data) CHECK(model.predict(ex.features) == (ex.label == 1));
}

TEST_CASE("rbf kernel fits xor", "[svm]") {
  std::vector<LabeledExample> data = {
      {{0.0, 0.0}, 1}, {{1.0, 1.0}, 1}, {{0.0, 1.0}, 0}, {{1.0, 0.0}, 0}};
  SvmParams params;
  params.kernel = Kernel::Rbf;
  params.c = 100.0;
  params.gamma = 2.0;
  SvmModel model = train_svm(data, params);
  for (const auto& ex : data) CHECK(model.predict(ex.features) == (ex.label == 1));
}

TEST_CASE("training requires both classes", "[svm]") {
  std::vector<LabeledExample> data = {{{0.0}, 1}, {{1.0}, 1}};
  CHECK_THROWS_AS(train_svm(data, SvmParams{}), DataError);
}

TEST_CASE("smo reaches the dual optimum on small instances", "[svm]") {
  Rng rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    size_t n = 3 + rng.index(4);
    size_t dim = 1 + rng.index(3);
    auto data = random_instance(rng, n, dim);
    SvmParams params;
    params.kernel = trial % 2 ? Kernel::Rbf : Kernel::Linear;
    params.gamma = 1.0;
    params.c = 1.0;
    params.tolerance = 1e-5;
    SvmTrainResult result = train_svm_detailed(data, params);
    auto oracle = oracles::solve_dual(data, params.c, params.kernel, params.gamma);
    double w_smo = dual_objective(data, result.alpha, params.kernel, params.gamma);
    INFO("trial " << trial << " smo " << w_smo << " oracle " << oracle.objective);
    CHECK(std::abs(w_smo - oracle.objective) < 1e-4);
  }
}

TEST_CASE("auto gamma is one over dim times pooled variance", "[svm]") {
  std::vector<LabeledExample> data = {{{0.0, 1.0}, 1}, {{2.0, 3.0}, 0}, {{4.0, 5.0}, 1}};
  // components: 0,1,2,3,4,5 -> mean 2.5, population variance 35/12
  double want = 1.0 / (2.0 * (35.0 / 12.0));
  CHECK(auto_gamma(data, 2) == Catch::Approx(want).epsilon(1e-12));

  std::vector<LabeledExample> constant = {{{1.0}, 1}, {{1.0}, 0}};
  CHECK(auto_gamma(constant, 1) == 1.0 / 1e-12);
}

TEST_CASE("linear decision value equals explicit support-vector sum", "[svm]") {
  Rng rng(9);
  auto data = random_instance(rng, 6, 2);
  SvmParams params;
  params.c = 5.0;
  SvmModel model = train_svm(data, params);
  for (int trial = 0; trial < 20; ++trial) {
    FeatureVector x = {rng.unit(), rng.unit()};
    double naive = model.bias;
    for (size_t s = 0; s < model.support_vectors.size(); ++s)
      naive += model.dual_coef[s] *
               kernel_eval(model.kernel, model.gamma, model.support_vectors[s].data(), x.data(), 2);
    CHECK(model.decision_value(x) == Catch::Approx(naive).margin(1e-12));
  }
}

TEST_CASE("model serialization round trips decisions exactly", "[svm]") {
  testutil::TempDir tmp;
  Rng rng(17);
  auto data = random_instance(rng, 6, 3);
  SvmParams params;
  params.kernel = Kernel::Rbf;
  params.gamma = 0.0;  // exercise auto gamma through the trainer
  SvmModel model = train_svm(data, params);
  model.save(tmp.file("m.slpm"));
  SvmModel loaded = SvmModel::load(tmp.file("m.slpm"));
  CHECK(loaded.kernel == model.kernel);
  CHECK(loaded.gamma == model.gamma);
  CHECK(loaded.bias == model.bias);
  CHECK(loaded.support_vectors == model.support_vectors);
  CHECK(loaded.dual_coef == model.dual_coef);
  for (int trial = 0; trial < 20; ++trial) {
    FeatureVector x = {rng.unit(), rng.unit(), rng.unit()};
    CHECK(loaded.decision_value(x) == model.decision_value(x));
  }
}

TEST_CASE("model deserialization rejects corrupt bytes", "[svm]") {
  Rng rng(18);
  auto data = random_instance(rng, 4, 2);
  SvmModel model = train_svm(data, SvmParams{});
  std::vector<uint8_t> bytes = model.serialize();

  std::vector<uint8_t> magic = bytes;
  magic[0] ^= 0xff;
  CHECK_THROWS_AS(SvmModel::deserialize(magic), DataError);

  std::vector<uint8_t> truncated(bytes.begin(), bytes.end() - 3);
  CHECK_THROWS_AS(SvmModel::deserialize(truncated), DataError);

  std::vector<uint8_t> trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(SvmModel::deserialize(trailing), DataError);
}
