#include <string>

#include "doctest.h"
#include "lcmt/config.hpp"
#include "test_support.hpp"

using namespace lcmt;
using testutil::TempDir;

TEST_CASE("the desk preset fills small-scale dimensions") {
  RunConfig cfg;
  cfg.apply_preset("desk");
  CHECK(cfg.model.d_model == 64);
  CHECK(cfg.model.n_heads == 4);
  CHECK(cfg.model.n_layers == 2);
  CHECK(cfg.model.d_ff == 128);
  CHECK(cfg.vocab_size == 1000);
  CHECK(cfg.warmup == 200);
  CHECK(cfg.min_pair_count == 1);
  CHECK(cfg.patience_stage1 == 3);
  CHECK(cfg.patience_stage2 == 5);
  CHECK(cfg.thresholds.noun_max_freq == 20);
  CHECK(cfg.thresholds.verb_max_freq == 2000);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("the paper preset mirrors the full experiment scale") {
  RunConfig cfg;
  cfg.apply_preset("paper");
  CHECK(cfg.model.d_model == 512);
  CHECK(cfg.model.n_heads == 8);
  CHECK(cfg.model.n_layers == 6);
  CHECK(cfg.model.d_ff == 2048);
  CHECK(cfg.vocab_size == 16000);
  CHECK(cfg.warmup == 8000);
  CHECK(cfg.min_pair_count == 101);
  CHECK(cfg.thresholds.noun_max_freq == 20);
  CHECK(cfg.thresholds.verb_max_freq == 2000);
  CHECK_NOTHROW(cfg.validate());

  CHECK_THROWS_WITH_AS(cfg.apply_preset("huge"), doctest::Contains("unknown preset"), Error);
}

TEST_CASE("config validation names the offending field") {
  RunConfig good;
  good.apply_preset("desk");

  auto cfg = good;
  cfg.vocab_size = 4;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("vocab_size"), Error);
  cfg = good;
  cfg.warmup = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("warmup"), Error);
  cfg = good;
  cfg.beam = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("beam"), Error);
  cfg = good;
  cfg.dropout = 1.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("dropout"), Error);
  cfg = good;
  cfg.min_pair_count = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("min_pair_count"), Error);
  cfg = good;
  cfg.target_ratio = -0.1;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("target_ratio"), Error);
  cfg = good;
  cfg.phrase_max_len = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("phrase_max_len"), Error);
  cfg = good;
  cfg.threads = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("threads"), Error);
  cfg = good;
  cfg.model.d_model = 30;  // not divisible by heads
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("configs round-trip through json and files") {
  RunConfig cfg;
  cfg.apply_preset("desk");
  cfg.seed = 99;
  cfg.beam = 2;
  cfg.target_ratio = 0.25;
  cfg.model.max_positions = 96;

  auto j = cfg.to_json();
  auto back = RunConfig::from_json(j);
  CHECK(back.preset == "desk");
  CHECK(back.seed == 99);
  CHECK(back.beam == 2);
  CHECK(back.target_ratio == 0.25);
  CHECK(back.model.max_positions == 96);
  CHECK(back.model.d_model == 64);
  CHECK(back.model.dropout == back.dropout);

  TempDir dir("config");
  save_run_config(cfg, dir.file("run.json"));
  auto loaded = load_run_config(dir.file("run.json"));
  CHECK(loaded.to_json() == cfg.to_json());
}

TEST_CASE("file overrides apply on top of the preset") {
  TempDir dir("config");
  testutil::write_text(dir.file("override.json"),
                       R"({"preset": "desk", "warmup": 77, "d_model": 32, "n_heads": 2})");
  auto cfg = load_run_config(dir.file("override.json"));
  CHECK(cfg.preset == "desk");
  CHECK(cfg.warmup == 77);        // overridden
  CHECK(cfg.model.d_model == 32); // overridden
  CHECK(cfg.vocab_size == 1000);  // preset value kept
  CHECK(cfg.min_pair_count == 1);
}

TEST_CASE("unknown keys and malformed files are rejected by name") {
  TempDir dir("config");
  testutil::write_text(dir.file("bad.json"), R"({"preset": "desk", "learning_rate": 0.1})");
  CHECK_THROWS_WITH_AS(load_run_config(dir.file("bad.json")),
                       doctest::Contains("unknown key 'learning_rate'"), Error);

  testutil::write_text(dir.file("broken.json"), "{not json");
  CHECK_THROWS_WITH_AS(load_run_config(dir.file("broken.json")),
                       doctest::Contains("not valid JSON"), Error);

  testutil::write_text(dir.file("array.json"), "[1, 2]");
  CHECK_THROWS_WITH_AS(load_run_config(dir.file("array.json")),
                       doctest::Contains("JSON object"), Error);

  CHECK_THROWS_WITH_AS(load_run_config(dir.file("absent.json")), doctest::Contains("cannot open"),
                       Error);
}
