#include "lcmt/training.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "lcmt/evalkit.hpp"
#include "lcmt/optim.hpp"

namespace lcmt {
namespace {

namespace fs = std::filesystem;

nlohmann::json log_to_json(const EpochLog& e) {
  return {{"epoch", e.epoch}, {"step", e.step}, {"lr", e.lr},
          {"train_loss", e.train_loss}, {"val_metric", e.val_metric}};
}

EpochLog log_from_json(const nlohmann::json& j) {
  EpochLog e;
  e.epoch = j.at("epoch").get<int>();
  e.step = j.at("step").get<long>();
  e.lr = j.at("lr").get<double>();
  e.train_loss = j.at("train_loss").get<double>();
  e.val_metric = j.at("val_metric").get<double>();
  return e;
}

void append_log(const std::string& path, const EpochLog& e) {
  std::ofstream out(path, std::ios::app);
  check(out.good(), "cannot write training log ", path);
  out << log_to_json(e).dump() << '\n';
}

/// Greedily packs length-sorted example indices into batches of at most
/// batch_tokens tokens (always at least one example per batch).
std::vector<std::vector<std::size_t>> pack_batches(const std::vector<std::size_t>& lengths,
                                                   int batch_tokens) {
  std::vector<std::size_t> order(lengths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&lengths](std::size_t a, std::size_t b) {
    return lengths[a] != lengths[b] ? lengths[a] < lengths[b] : a < b;
  });
  std::vector<std::vector<std::size_t>> batches;
  std::size_t used = 0;
  for (std::size_t idx : order) {
    if (batches.empty() || used + lengths[idx] > (std::size_t)batch_tokens) {
      batches.emplace_back();
      used = 0;
    }
    batches.back().push_back(idx);
    used += lengths[idx];
  }
  return batches;
}

struct TrainerState {
  int start_epoch = 0;
  double best_metric = 0.0;
  int best_epoch = -1;
  int stall = 0;
  std::vector<EpochLog> log;
};

nlohmann::json state_meta(const TrainerState& st, int epoch) {
  nlohmann::json log_json = nlohmann::json::array();
  for (const auto& e : st.log) log_json.push_back(log_to_json(e));
  return {{"epoch", epoch}, {"best_metric", st.best_metric}, {"best_epoch", st.best_epoch},
          {"stall", st.stall}, {"log", log_json}};
}

void restore_state(const nlohmann::json& meta, TrainerState* st) {
  st->start_epoch = meta.at("epoch").get<int>() + 1;
  st->best_metric = meta.at("best_metric").get<double>();
  st->best_epoch = meta.at("best_epoch").get<int>();
  st->stall = meta.at("stall").get<int>();
  st->log.clear();
  for (const auto& item : meta.at("log")) st->log.push_back(log_from_json(item));
}

double validation_bleu(const WordModel<float>& model, const std::vector<ParallelExample>& val,
                       const SubwordVocab& vocab, int beam) {
  std::vector<std::string> hyps, refs;
  for (const auto& ex : val) {
    DecodeOptions opt;
    opt.beam_size = beam;
    opt.max_len = std::min(model.cfg.max_positions - 1, 2 * (int)ex.src_tokens.size() + 8);
    auto ids = decode_word(model, vocab.encode(ex.src_tokens), opt);
    hyps.push_back(join(vocab.decode(ids)));
    refs.push_back(join(ex.tgt_tokens));
  }
  return corpus_bleu(hyps, refs).score;
}

}  // namespace

void TrainPlan::validate() const {
  check(stage == 1 || stage == 2, "train plan: stage must be 1 or 2");
  check(batch_tokens >= 1, "train plan: batch_tokens must be >= 1");
  check(max_epochs >= 1, "train plan: max_epochs must be >= 1");
  check(patience >= 1, "train plan: patience must be >= 1");
  check(warmup >= 1, "train plan: warmup must be >= 1");
  check(!checkpoint_dir.empty(), "train plan: checkpoint_dir is required");
  check(dropout >= 0.0 && dropout < 1.0, "train plan: dropout must be in [0, 1)");
}

std::uint64_t epoch_seed(std::uint64_t base, int epoch) {
  std::uint64_t material[2] = {base, (std::uint64_t)epoch};
  return fnv1a(material, sizeof material);
}

TrainResult run_stage1(const TrainPlan& plan, WordModel<float>& model,
                       const std::vector<ParallelExample>& train,
                       const std::vector<ParallelExample>& val, const SubwordVocab& vocab) {
  plan.validate();
  check(plan.stage == 1, "run_stage1 called with a stage-", plan.stage, " plan");
  check(!train.empty(), "stage 1: empty training corpus");
  check(!val.empty(), "stage 1: empty validation corpus");
  fs::create_directories(plan.checkpoint_dir);
  const std::string best_path = plan.checkpoint_dir + "/stage1-best.ckpt";
  const std::string last_path = plan.checkpoint_dir + "/stage1-last.ckpt";
  const std::string optim_path = plan.checkpoint_dir + "/stage1-last.optim";
  const std::string log_path = plan.checkpoint_dir + "/stage1-log.jsonl";

  std::vector<WordBatchItem> items;
  std::vector<std::size_t> lengths;
  for (const auto& ex : train) {
    WordBatchItem item;
    item.src_ids = vocab.encode(ex.src_tokens);
    item.tgt_ids = vocab.encode(ex.tgt_tokens);
    lengths.push_back(item.src_ids.size() + item.tgt_ids.size() + 2);
    items.push_back(std::move(item));
  }
  auto batches = pack_batches(lengths, plan.batch_tokens);

  nn::Adam<float> opt;
  model.visit([&opt](const std::string& name, const nn::TensorPtr<float>& t) {
    opt.register_param(name, t);
  });

  TrainerState st;
  st.best_metric = -1.0;
  if (plan.resume && fs::exists(last_path)) {
    auto loaded = load_model(last_path);
    check(loaded.word.vocab == model.vocab, "resume: checkpoint vocab ", loaded.word.vocab,
          " differs from model vocab ", model.vocab);
    model = loaded.word;
    opt = nn::Adam<float>();
    model.visit([&opt](const std::string& name, const nn::TensorPtr<float>& t) {
      opt.register_param(name, t);
    });
    std::ifstream in(optim_path);
    check(in.good(), "resume: missing optimizer state ", optim_path);
    opt.load_state(in);
    restore_state(loaded.meta.at("trainer"), &st);
  }

  TrainResult result;
  result.log = st.log;
  bool stopped = false;
  for (int epoch = st.start_epoch; epoch < plan.max_epochs && !stopped; ++epoch) {
    try {
      Rng rng(epoch_seed(plan.seed, epoch));
      auto batch_order = shuffled_indices(batches.size(), rng.next_u64());
      nn::DropoutCtx<float> drop{&rng, plan.dropout};
      double loss_sum = 0.0;
      long loss_count = 0;
      for (std::size_t bi : batch_order) {
        if (plan.max_steps > 0 && opt.step_count() >= plan.max_steps) break;
        std::vector<WordBatchItem> batch;
        for (std::size_t idx : batches[bi]) batch.push_back(items[idx]);
        opt.zero_grad();
        double loss = train_step_word(model, batch, drop);
        check(std::isfinite(loss), "non-finite training loss at step ", opt.step_count() + 1);
        opt.step(nn::noam_lr(opt.step_count() + 1, model.cfg.d_model, plan.warmup));
        loss_sum += loss;
        ++loss_count;
      }
      EpochLog entry;
      entry.epoch = epoch;
      entry.step = opt.step_count();
      entry.lr = nn::noam_lr(std::max(1L, opt.step_count()), model.cfg.d_model, plan.warmup);
      entry.train_loss = loss_count ? loss_sum / loss_count : 0.0;
      entry.val_metric = validation_bleu(model, val, vocab, plan.val_beam);
      st.log.push_back(entry);
      result.log.push_back(entry);
      append_log(log_path, entry);

      if (entry.val_metric > st.best_metric) {
        st.best_metric = entry.val_metric;
        st.best_epoch = epoch;
        st.stall = 0;
        save_model(best_path, model, nullptr, {{"stage", 1}, {"epoch", epoch}});
      } else {
        ++st.stall;
      }
      save_model(last_path, model, nullptr, {{"stage", 1}, {"trainer", state_meta(st, epoch)}});
      std::ofstream out(optim_path);
      check(out.good(), "cannot write optimizer state ", optim_path);
      opt.save_state(out);

      result.epochs_run = epoch - st.start_epoch + 1;
      if (st.stall >= plan.patience) stopped = true;
      if (plan.max_steps > 0 && opt.step_count() >= plan.max_steps) stopped = true;
    } catch (const Error& e) {
      if (st.best_epoch < 0) throw;
      result.aborted = true;
      result.abort_reason = e.what();
      break;
    }
  }
  check(st.best_epoch >= 0, "stage 1 produced no checkpoint");
  result.best_checkpoint = best_path;
  result.last_checkpoint = last_path;
  result.best_metric = st.best_metric;
  result.best_epoch = st.best_epoch;
  return result;
}

TrainResult run_stage2(const TrainPlan& plan, const std::string& stage1_checkpoint,
                       const std::vector<AddonBatchItem>& train_items,
                       const std::vector<AddonBatchItem>& val_items, const SubwordVocab& vocab,
                       const CharVocab& chars) {
  plan.validate();
  check(plan.stage == 2, "run_stage2 called with a stage-", plan.stage, " plan");
  check(!train_items.empty(), "stage 2: nothing to train (empty constraint manifest)");
  check(!val_items.empty(), "stage 2: empty validation set");
  fs::create_directories(plan.checkpoint_dir);
  const std::string best_path = plan.checkpoint_dir + "/stage2-best.ckpt";
  const std::string last_path = plan.checkpoint_dir + "/stage2-last.ckpt";
  const std::string optim_path = plan.checkpoint_dir + "/stage2-last.optim";
  const std::string log_path = plan.checkpoint_dir + "/stage2-log.jsonl";

  auto loaded = load_model(stage1_checkpoint);
  check(loaded.word.vocab == vocab.size(), "stage-1 checkpoint vocab ", loaded.word.vocab,
        " does not match subword vocab of ", vocab.size());
  WordModel<float>& word = loaded.word;  // stays valid across the resume reassignment below

  InflectorAddon<float> addon;
  Rng init_rng(epoch_seed(plan.seed, -1));
  addon.init(word.cfg, chars.size(), init_rng);

  // Freeze law: only add-on parameters are registered with the optimizer.
  nn::Adam<float> opt;
  addon.visit([&opt](const std::string& name, const nn::TensorPtr<float>& t) {
    opt.register_param(name, t);
  });

  std::vector<std::size_t> lengths;
  for (const auto& item : train_items)
    lengths.push_back(item.context_ids.size() + utf8_chars(item.surface).size() + 2);
  auto batches = pack_batches(lengths, plan.batch_tokens);

  TrainerState st;
  st.best_metric = std::numeric_limits<double>::infinity();
  if (plan.resume && fs::exists(last_path)) {
    auto prev = load_model(last_path);
    check(prev.has_addon, "resume: ", last_path, " lacks add-on parameters");
    check(prev.word.vocab == word.vocab && prev.addon.char_vocab == chars.size(),
          "resume: checkpoint/config mismatch");
    loaded = std::move(prev);
    addon = loaded.addon;
    opt = nn::Adam<float>();
    addon.visit([&opt](const std::string& name, const nn::TensorPtr<float>& t) {
      opt.register_param(name, t);
    });
    std::ifstream in(optim_path);
    check(in.good(), "resume: missing optimizer state ", optim_path);
    opt.load_state(in);
    restore_state(loaded.meta.at("trainer"), &st);
  }

  auto val_loss = [&]() {
    double total = 0.0, weight = 0.0;
    for (const auto& item : val_items) {
      double n = (double)utf8_chars(item.surface).size() + 1;
      total += addon_example_loss(word, addon, item, vocab, chars) * n;
      weight += n;
    }
    return total / weight;
  };

  TrainResult result;
  result.log = st.log;
  bool stopped = false;
  for (int epoch = st.start_epoch; epoch < plan.max_epochs && !stopped; ++epoch) {
    try {
      Rng rng(epoch_seed(plan.seed, epoch));
      auto batch_order = shuffled_indices(batches.size(), rng.next_u64());
      nn::DropoutCtx<float> drop{&rng, plan.dropout};
      double loss_sum = 0.0;
      long loss_count = 0;
      for (std::size_t bi : batch_order) {
        if (plan.max_steps > 0 && opt.step_count() >= plan.max_steps) break;
        std::vector<AddonBatchItem> batch;
        for (std::size_t idx : batches[bi]) batch.push_back(train_items[idx]);
        opt.zero_grad();
        double loss = train_step_addon(word, addon, batch, vocab, chars, drop);
        check(std::isfinite(loss), "non-finite training loss at step ", opt.step_count() + 1);
        opt.step(nn::noam_lr(opt.step_count() + 1, word.cfg.d_model, plan.warmup));
        loss_sum += loss;
        ++loss_count;
      }
      EpochLog entry;
      entry.epoch = epoch;
      entry.step = opt.step_count();
      entry.lr = nn::noam_lr(std::max(1L, opt.step_count()), word.cfg.d_model, plan.warmup);
      entry.train_loss = loss_count ? loss_sum / loss_count : 0.0;
      entry.val_metric = val_loss();
      st.log.push_back(entry);
      result.log.push_back(entry);
      append_log(log_path, entry);

      if (entry.val_metric < st.best_metric) {
        st.best_metric = entry.val_metric;
        st.best_epoch = epoch;
        st.stall = 0;
        save_model(best_path, word, &addon, {{"stage", 2}, {"epoch", epoch}});
      } else {
        ++st.stall;
      }
      save_model(last_path, word, &addon,
                 {{"stage", 2}, {"trainer", state_meta(st, epoch)}});
      std::ofstream out(optim_path);
      check(out.good(), "cannot write optimizer state ", optim_path);
      opt.save_state(out);

      result.epochs_run = epoch - st.start_epoch + 1;
      if (st.stall >= plan.patience) stopped = true;
      if (plan.max_steps > 0 && opt.step_count() >= plan.max_steps) stopped = true;
    } catch (const Error& e) {
      if (st.best_epoch < 0) throw;
      result.aborted = true;
      result.abort_reason = e.what();
      break;
    }
  }
  check(st.best_epoch >= 0, "stage 2 produced no checkpoint");
  result.best_checkpoint = best_path;
  result.last_checkpoint = last_path;
  result.best_metric = st.best_metric;
  result.best_epoch = st.best_epoch;
  return result;
}

std::vector<AddonBatchItem> build_addon_examples(const std::vector<ParallelExample>& corpus,
                                                 const std::vector<ConstraintAnnotation>& manifest,
                                                 const SubwordVocab& vocab) {
  std::vector<AddonBatchItem> out;
  for (const auto& c : manifest) {
    check(c.pair_id >= 0 && c.pair_id < (int)corpus.size(),
          "manifest refers to pair ", c.pair_id, " outside corpus of ", corpus.size());
    const auto& pair = corpus[c.pair_id];
    check(pair.id == c.pair_id, "corpus ids out of order at pair ", c.pair_id);
    auto rendered = render_placeholder(pair, c);
    AddonBatchItem item;
    item.context_ids = vocab.encode(rendered.tgt_tokens);
    item.lemma = join(c.entry.tgt_lemma);
    item.surface = join(c.reference_surface);
    out.push_back(std::move(item));
  }
  return out;
}

double token_accuracy(const WordModel<float>& model, const std::vector<ParallelExample>& corpus,
                      const SubwordVocab& vocab) {
  check(!corpus.empty(), "token_accuracy: empty corpus");
  nn::NoGradGuard guard;
  long correct = 0, total = 0;
  for (const auto& ex : corpus) {
    auto src_ids = vocab.encode(ex.src_tokens);
    src_ids.push_back(Specials::kEos);
    auto memory = model.encode(src_ids, {});
    auto tgt_ids = vocab.encode(ex.tgt_tokens);
    std::vector<int> tgt_in{Specials::kBos};
    tgt_in.insert(tgt_in.end(), tgt_ids.begin(), tgt_ids.end());
    auto logits = model.logits(tgt_in, memory, {});
    std::vector<int> tgt_out = tgt_ids;
    tgt_out.push_back(Specials::kEos);
    for (int i = 0; i < (int)tgt_out.size(); ++i) {
      correct += nn::argmax_row(logits, i) == tgt_out[i] ? 1 : 0;
      ++total;
    }
  }
  return (double)correct / (double)total;
}

}  // namespace lcmt
