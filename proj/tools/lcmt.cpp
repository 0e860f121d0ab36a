#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lcmt/align.hpp"
#include "lcmt/augment.hpp"
#include "lcmt/common.hpp"
#include "lcmt/config.hpp"
#include "lcmt/corpus.hpp"
#include "lcmt/dict.hpp"
#include "lcmt/evalkit.hpp"
#include "lcmt/model.hpp"
#include "lcmt/subword.hpp"
#include "lcmt/synthbench.hpp"
#include "lcmt/training.hpp"
#include "lcmt/translator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<lcmt::ParallelExample> load_any(const std::string& path) {
  return lcmt::load_corpus(path, lcmt::corpus_format_for(path));
}

/// Every run drops its resolved configuration next to its primary output.
void write_resolved(const lcmt::RunConfig& cfg, const std::string& out_path) {
  fs::path p(out_path);
  fs::path dest = fs::is_directory(p) ? p / "run-config.json"
                                      : p.parent_path() / (p.filename().string() + ".run.json");
  lcmt::save_run_config(cfg, dest.string());
}

void add_common(CLI::App* sub, lcmt::RunConfig* cfg) {
  sub->add_option("--seed", cfg->seed, "random seed");
  sub->add_option("--threads", cfg->threads, "thread cap (kept at 1 for reproducibility)");
  // Consumed by the pre-scan; registered so they parse and show in help.
  sub->add_option("--preset", "scale preset: desk or paper");
  sub->add_option("--config", "JSON config file; flags override its keys");
}

/// Inference-side rendering: only the source span is rewritten, since no
/// reference target exists at translate time.
std::vector<std::string> render_source(const std::vector<std::string>& src,
                                       const lcmt::ConstraintAnnotation& c,
                                       lcmt::Strategy strategy) {
  using lcmt::Strategy;
  if (strategy == Strategy::None) return src;
  lcmt::check(c.src_begin >= 0 && c.src_end > c.src_begin &&
                  c.src_end <= (int)src.size(),
              "constraint source span [", c.src_begin, ", ", c.src_end,
              ") out of range for ", src.size(), " tokens");
  std::vector<std::string> replacement;
  if (strategy == Strategy::Cs || strategy == Strategy::PhMorph) {
    replacement = c.entry.tgt_lemma;
  } else {
    replacement = {c.entry.pos_class == lcmt::PosClass::Noun ? lcmt::Specials::kNoun
                                                             : lcmt::Specials::kVerb};
  }
  std::vector<std::string> out(src.begin(), src.begin() + c.src_begin);
  out.insert(out.end(), replacement.begin(), replacement.end());
  out.insert(out.end(), src.begin() + c.src_end, src.end());
  return out;
}

json output_to_json(const lcmt::ConstrainedOutput& out) {
  return json{{"source", out.source},
              {"reference", out.reference},
              {"hypothesis", out.hypothesis},
              {"constraint", json::parse(out.constraint.to_jsonl())},
              {"placeholder_count", out.placeholder_count}};
}

lcmt::ConstrainedOutput output_from_json(const json& j) {
  lcmt::ConstrainedOutput out;
  out.source = j.at("source").get<std::string>();
  out.reference = j.at("reference").get<std::string>();
  out.hypothesis = j.at("hypothesis").get<std::string>();
  out.constraint = lcmt::ConstraintAnnotation::from_jsonl(j.at("constraint").dump());
  out.placeholder_count = j.at("placeholder_count").get<int>();
  return out;
}

void print_train_result(const lcmt::TrainResult& result) {
  for (const auto& entry : result.log)
    std::cout << "epoch " << entry.epoch << " step " << entry.step << " loss "
              << entry.train_loss << " val " << entry.val_metric << "\n";
  std::cout << "best epoch " << result.best_epoch << " metric " << result.best_metric << "\n"
            << "best checkpoint " << result.best_checkpoint << "\n";
}

// ------------------------------------------------------------- subcommands

int cmd_synth(const lcmt::RunConfig& cfg, const std::string& out_dir, int n, int n_val,
              int n_test, std::uint64_t grammar_seed) {
  auto grammar = lcmt::SynthGrammar::standard(grammar_seed);
  auto data = lcmt::gen_corpus(grammar, n, cfg.seed, n_val, n_test);
  fs::create_directories(out_dir);
  auto at = [&out_dir](const char* name) { return (fs::path(out_dir) / name).string(); };
  lcmt::save_corpus_tsv(data.train, at("train.tsv"));
  lcmt::save_corpus_tsv(data.val, at("val.tsv"));
  lcmt::save_corpus_tsv(data.test, at("test.tsv"));
  lcmt::save_dict(data.train_dict, at("train_dict.tsv"));
  lcmt::save_dict(data.seen_dict, at("seen_dict.tsv"));
  lcmt::save_dict(data.unseen_dict, at("unseen_dict.tsv"));
  data.lexicon.save(at("lexicon.tsv"));
  write_resolved(cfg, out_dir);
  std::cout << "wrote " << data.train.size() << " train / " << data.val.size() << " val / "
            << data.test.size() << " test pairs to " << out_dir << "\n";
  return 0;
}

int cmd_build_vocab(const lcmt::RunConfig& cfg, const std::string& corpus_path,
                    const std::string& out_path, const std::string& chars_out,
                    const std::string& lexicon_path) {
  auto corpus = load_any(corpus_path);
  auto vocab = lcmt::SubwordVocab::train(corpus, cfg.vocab_size);
  vocab.save(out_path);
  std::cout << "subword vocab: " << vocab.size() << " pieces"
            << (vocab.undersized() ? " (corpus exhausted before target size)" : "") << "\n";
  if (!chars_out.empty()) {
    std::vector<std::string> extras;
    if (!lexicon_path.empty()) {
      auto lexicon = lcmt::InflectionLexicon::load(lexicon_path);
      for (const auto& form : lexicon.forms()) {
        extras.push_back(form.lemma);
        extras.push_back(form.surface);
      }
    }
    auto chars = lcmt::CharVocab::build(corpus, extras);
    chars.save(chars_out);
    std::cout << "char vocab: " << chars.size() << " entries\n";
  }
  write_resolved(cfg, out_path);
  return 0;
}

int cmd_align(const lcmt::RunConfig& cfg, const std::string& corpus_path,
              const std::string& out_path, int iterations) {
  auto corpus = load_any(corpus_path);
  auto result = lcmt::align_ibm1(corpus, iterations);
  lcmt::save_alignments(result.alignments, out_path);
  std::cout << "aligned " << corpus.size() << " pairs, final log-likelihood "
            << result.log_likelihood.back() << "\n";
  write_resolved(cfg, out_path);
  return 0;
}

int cmd_build_dict(const lcmt::RunConfig& cfg, const std::string& corpus_path,
                   const std::string& align_path, const std::string& out_path,
                   const std::string& restrict_path, const std::string& seen_out,
                   const std::string& unseen_out, std::uint64_t split_seed) {
  auto corpus = load_any(corpus_path);
  auto alignments = lcmt::ingest_alignments(align_path, corpus);
  auto table = lcmt::extract_phrases(corpus, alignments, cfg.phrase_max_len, cfg.min_pair_count);
  auto dicts = lcmt::classify_entries(table, corpus);
  std::vector<lcmt::DictEntry> combined = dicts.noun_dict;
  combined.insert(combined.end(), dicts.verb_dict.begin(), dicts.verb_dict.end());

  if (!restrict_path.empty()) {
    auto held = load_any(restrict_path);
    std::vector<lcmt::DictEntry> kept;
    for (const auto& entry : combined) {
      bool found = false;
      for (const auto& pair : held) {
        auto it = std::search(pair.src_tokens.begin(), pair.src_tokens.end(),
                              entry.src_phrase.begin(), entry.src_phrase.end());
        if (it != pair.src_tokens.end()) {
          found = true;
          break;
        }
      }
      if (found) kept.push_back(entry);
    }
    combined = std::move(kept);
  }

  lcmt::save_dict(combined, out_path);
  std::cout << "dictionary: " << dicts.noun_dict.size() << " noun + " << dicts.verb_dict.size()
            << " verb candidates, " << combined.size() << " kept\n";
  if (!seen_out.empty() || !unseen_out.empty()) {
    lcmt::check(!seen_out.empty() && !unseen_out.empty(),
                "--seen-out and --unseen-out must be given together");
    auto split = lcmt::split_seen_unseen(combined, split_seed);
    lcmt::save_dict(split.seen, seen_out);
    lcmt::save_dict(split.unseen, unseen_out);
    std::cout << "split: " << split.seen.size() << " seen / " << split.unseen.size()
              << " unseen (seed " << split_seed << ")\n";
  }
  write_resolved(cfg, out_path);
  return 0;
}

int cmd_augment(const lcmt::RunConfig& cfg, const std::string& corpus_path,
                const std::vector<std::string>& dict_paths, const std::string& lexicon_path,
                const std::string& mode_name, const std::string& out_path,
                const std::string& manifest_out) {
  auto corpus = load_any(corpus_path);
  std::vector<lcmt::DictEntry> dict;
  for (const auto& path : dict_paths) {
    auto part = lcmt::load_dict(path);
    dict.insert(dict.end(), part.begin(), part.end());
  }
  auto lexicon = lcmt::InflectionLexicon::load(lexicon_path);
  auto mode = lcmt::augment_mode_from(mode_name);
  auto result = lcmt::augment_corpus(corpus, dict, lexicon, mode, cfg.thresholds,
                                     cfg.target_ratio, cfg.seed);
  lcmt::save_corpus_tsv(result.corpus, out_path);
  if (!manifest_out.empty()) lcmt::save_manifest(result.manifest, manifest_out);
  std::cout << "augmented " << result.original_size << " -> " << result.corpus.size()
            << " pairs (" << result.manifest.size() << " constrained, "
            << result.skipped_lexicon_misses << " lexicon misses skipped)\n";
  write_resolved(cfg, out_path);
  return 0;
}

lcmt::TrainPlan plan_from(const lcmt::RunConfig& cfg, int stage, const std::string& out_dir,
                          bool resume, long max_steps) {
  lcmt::TrainPlan plan;
  plan.stage = stage;
  plan.batch_tokens = cfg.batch_tokens;
  plan.max_epochs = cfg.max_epochs;
  plan.patience = stage == 1 ? cfg.patience_stage1 : cfg.patience_stage2;
  plan.seed = cfg.seed;
  plan.checkpoint_dir = out_dir;
  plan.warmup = cfg.warmup;
  plan.dropout = cfg.dropout;
  plan.resume = resume;
  plan.max_steps = max_steps;
  return plan;
}

int cmd_train_stage1(const lcmt::RunConfig& cfg, const std::string& train_path,
                     const std::string& val_path, const std::string& vocab_path,
                     const std::string& out_dir, bool resume, long max_steps) {
  auto train = load_any(train_path);
  auto val = load_any(val_path);
  auto vocab = lcmt::SubwordVocab::load(vocab_path);
  lcmt::WordModel<float> model;
  lcmt::Rng rng(lcmt::epoch_seed(cfg.seed, -2));
  model.init(cfg.model, vocab.size(), rng);
  auto plan = plan_from(cfg, 1, out_dir, resume, max_steps);
  fs::create_directories(out_dir);
  write_resolved(cfg, out_dir);
  auto result = lcmt::run_stage1(plan, model, train, val, vocab);
  print_train_result(result);
  if (result.aborted) {
    std::cerr << "training aborted: " << result.abort_reason << "\n";
    return 1;
  }
  return 0;
}

int cmd_train_stage2(const lcmt::RunConfig& cfg, const std::string& stage1_ckpt,
                     const std::string& corpus_path, const std::string& manifest_path,
                     const std::string& val_corpus_path, const std::string& val_manifest_path,
                     const std::string& vocab_path, const std::string& chars_path,
                     const std::string& out_dir, bool resume, long max_steps) {
  auto vocab = lcmt::SubwordVocab::load(vocab_path);
  auto chars = lcmt::CharVocab::load(chars_path);
  auto corpus = load_any(corpus_path);
  auto manifest = lcmt::load_manifest(manifest_path);
  auto train_items = lcmt::build_addon_examples(corpus, manifest, vocab);
  auto val_corpus = load_any(val_corpus_path);
  auto val_manifest = lcmt::load_manifest(val_manifest_path);
  auto val_items = lcmt::build_addon_examples(val_corpus, val_manifest, vocab);
  auto plan = plan_from(cfg, 2, out_dir, resume, max_steps);
  fs::create_directories(out_dir);
  write_resolved(cfg, out_dir);
  auto result = lcmt::run_stage2(plan, stage1_ckpt, train_items, val_items, vocab, chars);
  print_train_result(result);
  if (result.aborted) {
    std::cerr << "training aborted: " << result.abort_reason << "\n";
    return 1;
  }
  return 0;
}

int cmd_translate(const lcmt::RunConfig& cfg, const std::string& model_path,
                  const std::string& vocab_path, const std::string& chars_path,
                  const std::string& lexicon_path, const std::string& strategy_name,
                  const std::string& in_path, const std::string& out_path) {
  auto strategy = lcmt::strategy_from(strategy_name);
  auto loaded = lcmt::load_model(model_path);
  auto vocab = lcmt::SubwordVocab::load(vocab_path);
  lcmt::CharVocab chars;
  if (!chars_path.empty()) chars = lcmt::CharVocab::load(chars_path);
  lcmt::InflectionLexicon lexicon;
  if (!lexicon_path.empty()) lexicon = lcmt::InflectionLexicon::load(lexicon_path);

  std::ifstream in(in_path);
  lcmt::check(in.good(), "cannot open ", in_path);
  std::ofstream out(out_path);
  lcmt::check(out.good(), "cannot write ", out_path);

  lcmt::TranslateOptions opt;
  opt.beam_size = cfg.beam;
  std::string line;
  int line_no = 0, done = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      lcmt::fail(in_path, ":", line_no, ": invalid JSON: ", e.what());
    }
    auto src = lcmt::split_ws(rec.at("src").get<std::string>());
    std::optional<lcmt::ConstraintAnnotation> constraint;
    if (rec.contains("constraint") && !rec.at("constraint").is_null())
      constraint = lcmt::ConstraintAnnotation::from_jsonl(rec.at("constraint").dump());

    // Lines without a constraint fall back to plain decoding.
    opt.strategy = constraint ? strategy : lcmt::Strategy::None;
    auto rendered = constraint ? render_source(src, *constraint, opt.strategy) : src;
    auto result = lcmt::translate(loaded.word, loaded.has_addon ? &loaded.addon : nullptr, vocab,
                                  chars, rendered, constraint ? &*constraint : nullptr,
                                  lexicon_path.empty() ? nullptr : &lexicon, opt);
    json fills = json::array();
    for (const auto& fill : result.fills)
      fills.push_back({{"token_index", fill.token_index},
                       {"placeholder", fill.placeholder},
                       {"filled_with", fill.filled_with}});
    out << json{{"hypothesis", lcmt::join(result.tokens)},
                {"fills", fills},
                {"placeholder_count", result.placeholder_count}}
               .dump()
        << "\n";
    ++done;
  }
  std::cout << "translated " << done << " lines to " << out_path << "\n";
  write_resolved(cfg, out_path);
  return 0;
}

int cmd_evaluate(const lcmt::RunConfig& cfg, const std::vector<std::string>& model_paths,
                 const std::vector<std::uint64_t>& seeds, const std::string& vocab_path,
                 const std::string& chars_path, const std::string& test_path,
                 const std::string& seen_path, const std::string& unseen_path,
                 const std::string& lexicon_path, const std::string& strategy_name,
                 const std::string& out_path, const std::string& outputs_out) {
  auto strategy = lcmt::strategy_from(strategy_name);
  auto vocab = lcmt::SubwordVocab::load(vocab_path);
  lcmt::CharVocab chars;
  if (!chars_path.empty()) chars = lcmt::CharVocab::load(chars_path);
  auto test = load_any(test_path);
  auto seen = lcmt::load_dict(seen_path);
  auto unseen = lcmt::load_dict(unseen_path);
  auto lexicon = lcmt::InflectionLexicon::load(lexicon_path);

  std::vector<lcmt::LoadedModel> loaded;
  for (const auto& path : model_paths) loaded.push_back(lcmt::load_model(path));
  std::vector<lcmt::ModelBundle> bundles;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    lcmt::ModelBundle bundle;
    bundle.word = &loaded[i].word;
    bundle.addon = loaded[i].has_addon ? &loaded[i].addon : nullptr;
    bundle.seed = i < seeds.size() ? seeds[i] : cfg.seed + i;
    bundles.push_back(bundle);
  }

  auto report = lcmt::run_grid(bundles, strategy, seen, unseen, test, vocab, chars, lexicon,
                               cfg.beam);
  std::ofstream out(out_path);
  lcmt::check(out.good(), "cannot write ", out_path);
  out << report.to_json().dump(2) << "\n";
  std::cout << report.render_table();

  if (!outputs_out.empty()) {
    std::ofstream outs(outputs_out);
    lcmt::check(outs.good(), "cannot write ", outputs_out);
    for (lcmt::PosClass pos : {lcmt::PosClass::Noun, lcmt::PosClass::Verb}) {
      for (const auto* dict : {&seen, &unseen}) {
        auto cell = lcmt::run_cell(bundles.front(), strategy, *dict, test, vocab, chars, lexicon,
                                   pos, cfg.beam);
        for (const auto& output : cell.outputs) outs << output_to_json(output).dump() << "\n";
      }
    }
  }
  write_resolved(cfg, out_path);
  return 0;
}

int cmd_sample_annotate(const lcmt::RunConfig& cfg, const std::string& outputs_path,
                        std::size_t n, const std::string& out_path) {
  std::ifstream in(outputs_path);
  lcmt::check(in.good(), "cannot open ", outputs_path);
  std::vector<lcmt::ConstrainedOutput> outputs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      outputs.push_back(output_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      lcmt::fail(outputs_path, ":", line_no, ": invalid JSON: ", e.what());
    }
  }
  lcmt::sample_for_annotation(outputs, n, cfg.seed, out_path);
  std::cout << "sampled " << n << " of " << outputs.size() << " outputs to " << out_path << "\n";
  write_resolved(cfg, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  lcmt::RunConfig cfg;
  cfg.apply_preset("desk");

  // Preset and config file apply before flag parsing so flags win.
  try {
    std::string preset, config_path;
    auto flag_value = [&](int i, const char* name, std::string* dst) {
      std::string arg = argv[i];
      std::string eq = std::string(name) + "=";
      if (arg == name && i + 1 < argc) *dst = argv[i + 1];
      if (arg.rfind(eq, 0) == 0) *dst = arg.substr(eq.size());
    };
    for (int i = 1; i < argc; ++i) {
      flag_value(i, "--preset", &preset);
      flag_value(i, "--config", &config_path);
    }
    if (!preset.empty()) cfg.apply_preset(preset);
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      lcmt::check(in.good(), "config: cannot open ", config_path);
      json j = json::parse(in, nullptr, true);
      if (!preset.empty() && !j.contains("preset")) j["preset"] = preset;
      cfg = lcmt::RunConfig::from_json(j);
    }
  } catch (const lcmt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: bad config file: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"placeholder translation toolkit"};
  app.require_subcommand(1);

  // synth
  std::string out_dir;
  int synth_n = 8000, synth_val = 0, synth_test = 0;
  std::uint64_t grammar_seed = 7;
  auto* synth = app.add_subcommand("synth", "generate the synthetic benchmark");
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--n", synth_n, "training sentences");
  synth->add_option("--n-val", synth_val, "validation sentences (0 = derived)");
  synth->add_option("--n-test", synth_test, "test sentences (0 = derived)");
  synth->add_option("--grammar-seed", grammar_seed, "lemma inventory seed");
  add_common(synth, &cfg);

  // build-vocab
  std::string corpus_path, vocab_out, chars_out, lexicon_path;
  auto* bv = app.add_subcommand("build-vocab", "learn subword and character vocabularies");
  bv->add_option("--corpus", corpus_path, "training corpus (TSV or JSONL)")->required();
  bv->add_option("--out", vocab_out, "subword vocabulary file")->required();
  bv->add_option("--chars-out", chars_out, "character vocabulary file");
  bv->add_option("--lexicon", lexicon_path, "inflection lexicon whose forms the chars must cover");
  bv->add_option("--size", cfg.vocab_size, "target subword inventory size");
  add_common(bv, &cfg);

  // align
  std::string align_corpus, align_out;
  int iterations = 10;
  auto* al = app.add_subcommand("align", "IBM Model 1 word alignment");
  al->add_option("--corpus", align_corpus, "parallel corpus")->required();
  al->add_option("--out", align_out, "Pharaoh alignment output")->required();
  al->add_option("--iterations", iterations, "EM iterations");
  add_common(al, &cfg);

  // build-dict
  std::string dict_corpus, dict_align, dict_out, restrict_path, seen_out, unseen_out;
  std::uint64_t split_seed = 1;
  auto* bd = app.add_subcommand("build-dict", "extract and classify the term dictionary");
  bd->add_option("--corpus", dict_corpus, "annotated parallel corpus")->required();
  bd->add_option("--alignments", dict_align, "Pharaoh alignments")->required();
  bd->add_option("--out", dict_out, "dictionary TSV")->required();
  bd->add_option("--restrict-to", restrict_path, "keep entries whose source occurs in this corpus");
  bd->add_option("--seen-out", seen_out, "seen half of a 50/50 split");
  bd->add_option("--unseen-out", unseen_out, "unseen half of a 50/50 split");
  bd->add_option("--split-seed", split_seed, "seed for the seen/unseen split");
  bd->add_option("--max-len", cfg.phrase_max_len, "phrase length cap");
  bd->add_option("--min-pair-count", cfg.min_pair_count, "extraction frequency floor");
  add_common(bd, &cfg);

  // augment
  std::string aug_corpus, aug_lexicon, aug_mode = "placeholder", aug_out, manifest_out;
  std::vector<std::string> aug_dicts;
  auto* ag = app.add_subcommand("augment", "constraint-annotated training data");
  ag->add_option("--corpus", aug_corpus, "training corpus")->required();
  ag->add_option("--dict", aug_dicts, "dictionary TSV (repeatable)")->required();
  ag->add_option("--lexicon", aug_lexicon, "inflection lexicon TSV")->required();
  ag->add_option("--mode", aug_mode, "placeholder|codeswitch-oracle|codeswitch-lemma|morphtag");
  ag->add_option("--out", aug_out, "augmented corpus TSV")->required();
  ag->add_option("--manifest-out", manifest_out, "constraint manifest JSONL");
  ag->add_option("--target-ratio", cfg.target_ratio, "augmented/original cap (0 = unlimited)");
  ag->add_option("--noun-max-freq", cfg.thresholds.noun_max_freq, "noun train frequency cap");
  ag->add_option("--verb-max-freq", cfg.thresholds.verb_max_freq, "verb train frequency cap");
  add_common(ag, &cfg);

  // train
  int stage = 1;
  std::string train_path, val_path, train_vocab, train_out;
  std::string stage1_ckpt, manifest_path, val_manifest_path, train_chars, val_corpus_path;
  bool resume = false;
  long max_steps = 0;
  auto* tr = app.add_subcommand("train", "stage-1 word model / stage-2 inflection add-on");
  tr->add_option("--stage", stage, "1 or 2")->required();
  tr->add_option("--train", train_path, "training corpus (stage 1) / constrained corpus (stage 2)")
      ->required();
  tr->add_option("--val", val_path, "validation corpus")->required();
  tr->add_option("--vocab", train_vocab, "subword vocabulary")->required();
  tr->add_option("--out", train_out, "checkpoint directory")->required();
  tr->add_option("--stage1-ckpt", stage1_ckpt, "frozen word model (stage 2)");
  tr->add_option("--manifest", manifest_path, "train constraint manifest (stage 2)");
  tr->add_option("--val-manifest", val_manifest_path, "validation manifest (stage 2)");
  tr->add_option("--chars", train_chars, "character vocabulary (stage 2)");
  tr->add_flag("--resume", resume, "continue from the last checkpoint");
  tr->add_option("--max-steps", max_steps, "optimizer step cap (0 = none)");
  tr->add_option("--max-epochs", cfg.max_epochs, "epoch cap");
  tr->add_option("--batch-tokens", cfg.batch_tokens, "token budget per batch");
  tr->add_option("--warmup", cfg.warmup, "noam warmup steps");
  tr->add_option("--dropout", cfg.dropout, "dropout rate");
  tr->add_option("--patience-stage1", cfg.patience_stage1, "stage-1 early stopping patience");
  tr->add_option("--patience-stage2", cfg.patience_stage2, "stage-2 early stopping patience");
  tr->add_option("--d-model", cfg.model.d_model, "model width");
  tr->add_option("--n-layers", cfg.model.n_layers, "encoder/decoder depth");
  tr->add_option("--n-heads", cfg.model.n_heads, "attention heads");
  tr->add_option("--d-ff", cfg.model.d_ff, "feed-forward width");
  add_common(tr, &cfg);

  // translate
  std::string model_path, tl_vocab, tl_chars, tl_lexicon, tl_strategy = "none", tl_in, tl_out;
  auto* tl = app.add_subcommand("translate", "batch translation over JSONL");
  tl->add_option("--model", model_path, "model checkpoint")->required();
  tl->add_option("--vocab", tl_vocab, "subword vocabulary")->required();
  tl->add_option("--chars", tl_chars, "character vocabulary (proposed strategy)");
  tl->add_option("--lexicon", tl_lexicon, "inflection lexicon (ph-common, ph-morph)");
  tl->add_option("--strategy", tl_strategy, "none|ph-oracle|ph-lemma|ph-common|ph-morph|cs|proposed");
  tl->add_option("--in", tl_in, "input JSONL {src, constraint?}")->required();
  tl->add_option("--out", tl_out, "output JSONL {hypothesis, fills, placeholder_count}")
      ->required();
  tl->add_option("--beam", cfg.beam, "beam size");
  add_common(tl, &cfg);

  // evaluate
  std::vector<std::string> ev_models;
  std::vector<std::uint64_t> ev_seeds;
  std::string ev_vocab, ev_chars, ev_test, ev_seen, ev_unseen, ev_lexicon;
  std::string ev_strategy = "none", ev_out, ev_outputs;
  auto* ev = app.add_subcommand("evaluate", "seen/unseen x POS evaluation grid");
  ev->add_option("--model", ev_models, "model checkpoint (repeatable for seed averaging)")
      ->required();
  ev->add_option("--seeds", ev_seeds, "seed labels for the report");
  ev->add_option("--vocab", ev_vocab, "subword vocabulary")->required();
  ev->add_option("--chars", ev_chars, "character vocabulary");
  ev->add_option("--test", ev_test, "test corpus")->required();
  ev->add_option("--seen-dict", ev_seen, "seen dictionary")->required();
  ev->add_option("--unseen-dict", ev_unseen, "unseen dictionary")->required();
  ev->add_option("--lexicon", ev_lexicon, "inflection lexicon")->required();
  ev->add_option("--strategy", ev_strategy, "decoding strategy");
  ev->add_option("--out", ev_out, "report JSON")->required();
  ev->add_option("--outputs-out", ev_outputs, "per-sentence outputs JSONL (first model)");
  ev->add_option("--beam", cfg.beam, "beam size");
  add_common(ev, &cfg);

  // sample-annotate
  std::string sa_outputs, sa_out;
  std::size_t sa_n = 50;
  auto* sa = app.add_subcommand("sample-annotate", "draw an annotation sheet from outputs");
  sa->add_option("--outputs", sa_outputs, "outputs JSONL from evaluate")->required();
  sa->add_option("--n", sa_n, "sample size");
  sa->add_option("--out", sa_out, "annotation sheet TSV")->required();
  add_common(sa, &cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cfg.validate();
    if (synth->parsed())
      return cmd_synth(cfg, out_dir, synth_n, synth_val, synth_test, grammar_seed);
    if (bv->parsed()) return cmd_build_vocab(cfg, corpus_path, vocab_out, chars_out, lexicon_path);
    if (al->parsed()) return cmd_align(cfg, align_corpus, align_out, iterations);
    if (bd->parsed())
      return cmd_build_dict(cfg, dict_corpus, dict_align, dict_out, restrict_path, seen_out,
                            unseen_out, split_seed);
    if (ag->parsed())
      return cmd_augment(cfg, aug_corpus, aug_dicts, aug_lexicon, aug_mode, aug_out, manifest_out);
    if (tr->parsed()) {
      lcmt::check(stage == 1 || stage == 2, "--stage must be 1 or 2");
      if (stage == 1)
        return cmd_train_stage1(cfg, train_path, val_path, train_vocab, train_out, resume,
                                max_steps);
      lcmt::check(!stage1_ckpt.empty(), "stage 2 needs --stage1-ckpt");
      lcmt::check(!manifest_path.empty() && !val_manifest_path.empty(),
                  "stage 2 needs --manifest and --val-manifest");
      lcmt::check(!train_chars.empty(), "stage 2 needs --chars");
      return cmd_train_stage2(cfg, stage1_ckpt, train_path, manifest_path, val_path,
                              val_manifest_path, train_vocab, train_chars, train_out, resume,
                              max_steps);
    }
    if (tl->parsed())
      return cmd_translate(cfg, model_path, tl_vocab, tl_chars, tl_lexicon, tl_strategy, tl_in,
                           tl_out);
    if (ev->parsed())
      return cmd_evaluate(cfg, ev_models, ev_seeds, ev_vocab, ev_chars, ev_test, ev_seen,
                          ev_unseen, ev_lexicon, ev_strategy, ev_out, ev_outputs);
    if (sa->parsed()) return cmd_sample_annotate(cfg, sa_outputs, sa_n, sa_out);
  } catch (const lcmt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
