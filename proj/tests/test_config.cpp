#include <doctest.h>

#include <cmath>
#include <string>

#include "proalign/config.hpp"
#include "proalign/errors.hpp"
#include "proalign/rng.hpp"

using namespace proalign;

namespace {

RunConfig random_config(Rng& rng) {
  RunConfig c;
  c.seed = rng.next();
  c.world = rng.bernoulli(0.5) ? WorldKind::Tabular : WorldKind::Autoregressive;
  c.size = 2 + rng.index(30);
  c.vocab = 2 + rng.index(4);
  c.length = 1 + rng.index(4);
  c.reward_scale = rng.normal() * 3.0;
  c.feedback = static_cast<FeedbackKind>(rng.index(3));
  c.records = 1 + rng.index(1000);
  c.group_size = 2 + rng.index(6);
  if (rng.bernoulli(0.5)) c.noise = rng.uniform() / 3.0;
  if (rng.bernoulli(0.5)) c.imbalance = rng.bernoulli(0.5) ? Label::Desired : Label::Undesired;
  c.keep = rng.uniform();
  c.loss = static_cast<LossKind>(rng.index(8));
  c.beta = std::exp(rng.normal());
  c.alpha = 1.0 / 3.0 + 30.0 * rng.uniform();
  c.eta = rng.uniform();
  c.pin_hyper = rng.bernoulli(0.5);
  c.class_reweight = rng.bernoulli(0.5);
  c.prop_form = rng.bernoulli(0.5) ? ProPForm::PerPair : ProPForm::Global;
  c.kto_z0 = rng.normal() * 1e-7;
  c.kto_lambda_d = rng.uniform() * 4.0;
  c.kto_lambda_u = 1e300 * rng.uniform();
  if (rng.bernoulli(0.5)) c.kto_sign_mode = rng.bernoulli(0.5) ? KtoSignMode::AsPrinted : KtoSignMode::Utility;
  c.steps = 1 + rng.index(100000);
  c.lr = rng.uniform();
  c.data_dir = rng.bernoulli(0.5) ? "" : "runs/data dir " + std::to_string(rng.index(100));
  return c;
}

}  // namespace

TEST_CASE("config round-trips through its file form") {
  CHECK(parse_config(serialize(RunConfig{})) == RunConfig{});
  Rng rng(derive_seed(0, "config"));
  for (int i = 0; i < 200; ++i) {
    const auto c = random_config(rng);
    const auto text = serialize(c);
    CHECK(parse_config(text) == c);
    CHECK(serialize(parse_config(text)) == text);
  }
}

TEST_CASE("config defaults") {
  const auto c = parse_config("");
  CHECK(c.beta == 0.1);
  CHECK(c.alpha == 2.5);
  CHECK(c.loss == LossKind::DpoSample);
  CHECK(c.world == WorldKind::Autoregressive);
  CHECK(c.vocab == 3);
  CHECK(c.length == 3);
  CHECK(c.records == 40);
  CHECK(c.steps == 500);
  CHECK_FALSE(c.kto_sign_mode.has_value());
  CHECK_FALSE(c.noise.has_value());
}

TEST_CASE("config grammar") {
  const auto c = parse_config(
      "# comment\n"
      "; also a comment\n"
      "[loss]\n"
      "  kind =   pro_p  \r\n"
      "beta=1\n"
      "\n"
      "[run]\n"
      "seed = 18446744073709551615\n");
  CHECK(c.loss == LossKind::ProP);
  CHECK(c.beta == 1.0);
  CHECK(c.seed == 18446744073709551615ULL);
}

TEST_CASE("config rejects malformed input") {
  CHECK_THROWS_AS(parse_config("[loss]\nbogus = 1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[nowhere]\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("seed = 1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[run]\nseed = 1\nseed = 2\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[run]\nseed\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[run\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[run]\nseed = -1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[run]\nseed = 99999999999999999999\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[loss]\nbeta = 0.1x\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[loss]\nbeta = inf\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[loss]\npin_hyper = yes\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[loss]\nkind = ipo\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[data]\nimbalance = both\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[world]\nkind = graph\n"), InvalidArgument);
  try {
    parse_config("[run]\nseed = 1\n[loss]\nbogus = 2\n");
    FAIL("no throw");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("named sub-seeds") {
  RunConfig c;
  c.seed = 5;
  CHECK(sub_seed(c, "world") == derive_seed(5, "world"));
  CHECK(sub_seed(c, "world") != sub_seed(c, "data"));
  CHECK(sub_seed(c, "train") != sub_seed(c, "data"));
  RunConfig d = c;
  d.loss = LossKind::ProP;
  CHECK(make_world(c).rewards == make_world(d).rewards);
}

TEST_CASE("config builds world, feedback and loss") {
  RunConfig c;
  c.world = WorldKind::Tabular;
  c.size = 5;
  CHECK(make_world(c).space()->size() == 5);
  c.world = WorldKind::Autoregressive;
  c.vocab = 2;
  c.length = 4;
  CHECK(make_world(c).space()->size() == 16);

  c.feedback = FeedbackKind::Binary;
  c.imbalance = Label::Desired;
  c.keep = 0.25;
  c.noise = 0.5;
  const auto o = feedback_options(c);
  CHECK(o.kind == FeedbackKind::Binary);
  CHECK(o.noise == 0.5);
  REQUIRE(o.imbalance.has_value());
  CHECK(o.imbalance->keep == 0.25);
  c.noise.reset();
  CHECK(feedback_options(c).noise < 0.0);

  c.feedback = FeedbackKind::Pairwise;
  c.imbalance.reset();
  c.loss = LossKind::ProP;
  c.beta = 0.7;
  c.alpha = 3.0;
  c.eta = 0.5;
  c.prop_form = ProPForm::Global;
  const auto w = make_world(c);
  const auto data = sample_feedback(w, feedback_options(c), 1);
  const auto spec = make_loss_spec(c, w, data);
  CHECK(spec.kind == LossKind::ProP);
  CHECK(spec.beta == 0.7);
  CHECK(spec.alpha == 3.0);
  CHECK(spec.eta == 0.5);
  CHECK(spec.prop_form == ProPForm::Global);
}
