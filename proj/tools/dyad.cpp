// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

// dyad: command-line front end. Every subcommand reads the shared config
// file (--config) plus --set overrides and writes into a run directory that
// ends up holding run_summary.json.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dyad/chrono_text/chrono.hpp"
#include "dyad/error.hpp"
#include "dyad/grad/primitive_suite.hpp"
#include "dyad/layout_mask/layout.hpp"
#include "dyad/metrics/metrics.hpp"
#include "dyad/model_core/checkpoint.hpp"
#include "dyad/model_core/prompt.hpp"
#include "dyad/stream/run.hpp"
#include "dyad/stream/run_config.hpp"
#include "dyad/synth_data/dataset.hpp"
#include "dyad/tempovoice/codec.hpp"
#include "dyad/tempovoice/tempovoice.hpp"
#include "dyad/training/gradcheck.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dyad;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string run_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_dir) {
  c.run_dir = default_dir;
  cmd->add_option("--config", c.config, "Config file of key = value lines")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "Override one setting, key=value (repeatable)");
  cmd->add_option("--run-dir", c.run_dir, "Directory receiving every output")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Seed for this command (recorded in the run summary)");
}

stream::RunConfig load_config(const Common& c) {
  stream::RunConfig rc;
  if (!c.config.empty()) rc.load_file(c.config);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    rc.set(s.substr(0, eq), s.substr(eq + 1));
  }
  return rc;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

fs::path prepare_dir(const std::string& dir) {
  fs::create_directories(dir);
  return fs::path(dir);
}

void write_summary(const fs::path& dir, const std::string& command, std::uint64_t seed, const stream::RunConfig& rc,
                   json metrics, const std::vector<std::string>& outputs) {
  json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config_hash"] = rc.hash();
  j["metrics"] = std::move(metrics);
  j["outputs"] = outputs;
  write_text(dir / "run_summary.json", j.dump(2) + "\n");
  write_text(dir / "config.txt", rc.to_kv());
}

/// Dialogue seeds: data_seed + index, so datasets with the same seed nest.
std::vector<synth::DyadSample> synth_samples(const stream::RunConfig& rc, std::size_t count, std::uint64_t first) {
  std::vector<synth::DyadSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(synth::generate_dialogue(first + i, rc.synth));
  return out;
}

std::vector<synth::DyadSample> load_split(const std::string& manifest, const std::string& split, std::size_t limit) {
  const auto m = synth::load_manifest(manifest);
  auto samples = m.load_split(synth::parse_split(split));
  if (limit > 0 && samples.size() > limit) samples.resize(limit);
  if (samples.empty()) throw ConfigError("manifest '" + manifest + "' has no " + split + " dialogues");
  return samples;
}

/// Fraction of each frame's audio tokens that are not silence (token 0).
std::vector<double> audio_activity(const std::vector<std::int32_t>& audio, Rational r, std::size_t frames) {
  std::vector<double> out(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto first = voice::first_token(static_cast<std::int64_t>(f), r);
    const auto n = voice::tokens_in_frame(static_cast<std::int64_t>(f), r);
    if (n == 0) continue;
    std::int64_t voiced = 0;
    for (std::int64_t k = 0; k < n; ++k) voiced += audio[static_cast<std::size_t>(first + k)] != 0;
    out[f] = static_cast<double>(voiced) / static_cast<double>(n);
  }
  return out;
}

// ---------------------------------------------------------------- commands

int cmd_synth_data(const Common& c, std::optional<std::size_t> count) {
  auto rc = load_config(c);
  if (count) rc.dataset_size = *count;
  if (c.seed) rc.data_seed = *c.seed;
  rc.finalize();
  const auto dir = prepare_dir(c.run_dir);
  const auto samples = synth_samples(rc, rc.dataset_size, rc.data_seed);
  const auto splits = synth::split_dataset(samples.size(), rc.split, rc.data_seed);
  synth::write_dataset(dir.string(), samples, splits);
  const auto sizes = synth::split_sizes(samples.size(), rc.split);
  json m{{"dialogues", samples.size()}, {"train", sizes[0]}, {"val", sizes[1]}, {"test", sizes[2]}};
  write_summary(dir, "synth-data", rc.data_seed, rc, m, {"manifest.jsonl"});
  std::printf("wrote %zu dialogues (%zu/%zu/%zu) to %s\n", samples.size(), sizes[0], sizes[1], sizes[2],
              dir.string().c_str());
  return 0;
}

int cmd_encode(const Common& c, const std::string& input, std::optional<std::string> fps_text,
               std::optional<std::size_t> frames) {
  auto rc = load_config(c);
  rc.finalize();
  const Rational fps = fps_text ? Rational::parse(*fps_text) : rc.synth.fps;
  const auto pair = chrono::read_transcript_file(input);
  std::size_t n = 0;
  if (frames) {
    n = *frames;
  } else {
    for (const auto* t : {&pair.speaker, &pair.listener}) {
      for (const auto& w : t->words) n = std::max<std::size_t>(n, chrono::last_frame_before(w.end, fps) + 1);
    }
  }
  const auto dir = prepare_dir(c.run_dir);
  const auto spk = chrono::encode_transcript(pair.speaker, fps, n);
  const auto lis = chrono::encode_transcript(pair.listener, fps, n);
  write_text(dir / "speaker.marked.txt", stream::marked_text(spk.tokens));
  write_text(dir / "listener.marked.txt", stream::marked_text(lis.tokens));
  std::printf("speaker:  %s\nlistener: %s\n", chrono::to_text(spk).c_str(), chrono::to_text(lis).c_str());
  json m{{"frames", n}, {"fps", fps.str()}, {"speaker_words", pair.speaker.words.size()},
         {"listener_words", pair.listener.words.size()}};
  write_summary(dir, "encode-transcript", c.seed.value_or(0), rc, m, {"speaker.marked.txt", "listener.marked.txt"});
  return 0;
}

int cmd_build_mask(const Common& c, std::size_t n_static, std::size_t frames) {
  auto rc = load_config(c);
  rc.finalize();
  const auto lay = layout::build_layout(n_static, frames, rc.model.order);
  const auto mask = layout::build_omni_mask(lay, rc.model.same_time_visible);
  const bool agrees = mask == layout::mask_oracle(lay, rc.model.same_time_visible);
  std::string tags;
  for (const auto& t : lay.tags) tags += std::to_string(t.position) + "\t" + layout::tag_label(t) + "\n";
  const auto dir = prepare_dir(c.run_dir);
  write_text(dir / "layout.txt", tags);
  write_text(dir / "mask.txt", mask.dump());
  std::printf("%s\n%s", tags.c_str(), mask.dump().c_str());
  std::printf("oracle agreement: %s\n", agrees ? "yes" : "NO");
  json m{{"tokens", lay.size()}, {"same_time_visible", rc.model.same_time_visible}, {"oracle_agrees", agrees}};
  write_summary(dir, "build-mask", c.seed.value_or(0), rc, m, {"layout.txt", "mask.txt"});
  return agrees ? 0 : 1;
}

int cmd_train(const Common& c, const std::string& data, const std::string& split, std::size_t limit) {
  auto rc = load_config(c);
  if (c.seed) rc.train.seed = *c.seed;
  rc.finalize();
  std::vector<synth::DyadSample> samples;
  if (!data.empty()) {
    samples = load_split(data, split, limit);
  } else {
    const auto all = synth_samples(rc, rc.dataset_size, rc.data_seed);
    const auto splits = synth::split_dataset(all.size(), rc.split, rc.data_seed);
    const auto want = synth::parse_split(split);
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (splits[i] == want && (limit == 0 || samples.size() < limit)) samples.push_back(all[i]);
    }
  }
  const auto& sys = model::default_system_words();
  model::Model m(rc.model, train::build_vocabulary(samples, sys));
  train::Trainer trainer(m, rc.train, sys);
  const auto dir = prepare_dir(c.run_dir);
  std::ofstream csv(dir / "losses.csv");
  train::write_csv_header(csv);
  const auto before = trainer.probe(samples);
  const auto t0 = std::chrono::steady_clock::now();
  trainer.run(samples, [&](const train::LossRecord& r) {
    train::write_csv_row(csv, r);
    if (r.step == 1 || r.step % 100 == 0) {
      std::printf("step %5zu phase %d lr %.2e  text %.4f vision %.4f audio %.4f total %.4f\n", r.step, r.phase, r.lr,
                  r.loss.text, r.loss.vision, r.loss.audio, r.loss.total);
      std::fflush(stdout);
    }
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto after = trainer.probe(samples);
  const auto acc = train::evaluate_teacher_forced(m, samples, sys);
  model::save_checkpoint((dir / "model.ckpt").string(), m);
  json m_out{{"dialogues", samples.size()},
             {"steps", rc.train.total_steps()},
             {"loss_before", before.total},
             {"loss_after", after.total},
             {"text_accuracy", acc.text()},
             {"word_accuracy", acc.word()},
             {"audio_accuracy", acc.audio()},
             {"vision_sse_per_frame", acc.vision_frames ? acc.vision_sse / acc.vision_frames : 0.0}};
  write_summary(dir, "train", rc.train.seed, rc, m_out, {"model.ckpt", "losses.csv"});
  std::printf("trained in %.1f s: text %.4f audio %.4f, loss %.4f -> %.4f\n", secs, acc.text(), acc.audio(),
              before.total, after.total);
  return 0;
}

int cmd_generate(const Common& c, const std::string& checkpoint, const std::string& data, const std::string& id,
                 std::uint64_t dialogue_seed, std::optional<double> temperature) {
  auto rc = load_config(c);
  const auto m = model::load_checkpoint(checkpoint);
  rc.model = m->config();
  if (c.seed) rc.decode_seed = *c.seed;
  if (temperature) rc.temperature = *temperature;
  rc.finalize();
  synth::DyadSample sample;
  if (!data.empty()) {
    const auto manifest = synth::load_manifest(data);
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
      if (manifest.records[i].id == id) found = i;
    }
    if (!found) throw ConfigError("no dialogue '" + id + "' in " + data);
    sample = manifest.load_sample(*found);
  } else {
    sample = synth::generate_dialogue(dialogue_seed, rc.synth);
  }
  stream::StreamOptions opts;
  opts.system_words = model::default_system_words();
  opts.decode = {rc.temperature, rc.decode_seed};
  opts.sample_rate = rc.sample_rate;
  const auto out = stream::run_stream(*m, sample, opts);
  const auto speaker = chrono::encode_transcript(sample.speaker_words, sample.fps, sample.frames).tokens;

  const auto dir = prepare_dir(c.run_dir);
  synth::write_faces((dir / "listener.face").string(), out.faces);
  write_text(dir / "listener.marked.txt", stream::marked_text(out.tokens));
  voice::write_wav((dir / "listener.wav").string(), out.waveform, rc.sample_rate);
  write_text(dir / "transcript.txt", stream::dialogue_transcript(speaker, out.tokens));
  write_text(dir / "audio_tokens.json", json(out.audio).dump() + "\n");
  const auto tt = metrics::turn_taking(speaker, out.tokens, sample.fps);
  json metrics{{"dialogue", sample.id},
               {"frames", out.frames()},
               {"audio_tokens", out.audio.size()},
               {"listener_words", chrono::words_of(out.tokens).size()},
               {"pause_during_speech", tt.pause_rate()},
               {"turn_ends_answered", tt.response_rate()}};
  write_summary(dir, "generate", rc.decode_seed, rc, metrics,
                {"listener.face", "listener.marked.txt", "listener.wav", "transcript.txt", "audio_tokens.json"});
  std::printf("%s", stream::dialogue_transcript(speaker, out.tokens).c_str());
  return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint, const std::string& data, const std::string& split,
             std::size_t count) {
  auto rc = load_config(c);
  const auto m = model::load_checkpoint(checkpoint);
  rc.model = m->config();
  if (c.seed) rc.decode_seed = *c.seed;
  rc.finalize();
  // Held-out synthetic dialogues use seeds far from the training range.
  const auto samples = !data.empty() ? load_split(data, split, count)
                                     : synth_samples(rc, count == 0 ? 4 : count, rc.data_seed + 1000000);
  const auto& sys = model::default_system_words();
  const auto acc = train::evaluate_teacher_forced(*m, samples, sys);

  stream::StreamOptions opts;
  opts.system_words = sys;
  opts.decode = {rc.temperature, rc.decode_seed};
  opts.sample_rate = rc.sample_rate;
  metrics::TurnTaking tt;
  double rouge = 0.0;
  std::vector<metrics::Tokens> hyps;
  std::size_t total_frames = 0;
  for (const auto& s : samples) total_frames += s.frames;
  grad::Tensor gen_faces(total_frames, model::kFacialDim), ref_faces(total_frames, model::kFacialDim);
  std::size_t row = 0;
  std::size_t lag_defined = 0;
  double lag_abs = 0.0;
  json per;
  for (const auto& s : samples) {
    const auto out = stream::run_stream(*m, s, opts);
    const auto speaker = chrono::encode_transcript(s.speaker_words, s.fps, s.frames).tokens;
    const auto one = metrics::turn_taking(speaker, out.tokens, s.fps);
    tt += one;
    const auto hyp = chrono::words_of(out.tokens);
    metrics::Tokens ref;
    for (const auto& w : s.listener_words.words) ref.push_back(w.text);
    const double r = metrics::rouge_l(ref, hyp);
    rouge += r;
    hyps.push_back(hyp);
    std::vector<double> mouth(s.frames);
    for (std::size_t f = 0; f < s.frames; ++f) {
      mouth[f] = out.faces(f, model::kJawOpen);
      std::copy(out.faces.row(f).begin(), out.faces.row(f).end(), gen_faces.row(row).begin());
      std::copy(s.listener_faces.row(f).begin(), s.listener_faces.row(f).end(), ref_faces.row(row).begin());
      ++row;
    }
    const auto lag = metrics::sync_lag(mouth, audio_activity(out.audio, s.audio_tokens_per_frame, s.frames));
    if (lag.defined) {
      ++lag_defined;
      lag_abs += std::abs(lag.lag);
    }
    per.push_back({{"id", s.id},
                   {"rouge_l", r},
                   {"pause_during_speech", one.pause_rate()},
                   {"turn_ends_answered", one.response_rate()},
                   {"sync_lag", lag.defined ? json(lag.lag) : json(nullptr)}});
  }
  const auto fd = metrics::frechet_distance(metrics::gaussian_stats(gen_faces), metrics::gaussian_stats(ref_faces));
  json mtr{{"dialogues", samples.size()},
           {"text_accuracy", acc.text()},
           {"word_accuracy", acc.word()},
           {"audio_accuracy", acc.audio()},
           {"pause_during_speech", tt.pause_rate()},
           {"turn_ends_answered", tt.response_rate()},
           {"rouge_l", rouge / static_cast<double>(samples.size())},
           {"distinct_2", metrics::distinct_2(hyps)},
           {"face_frechet_distance", fd},
           {"mean_abs_sync_lag", lag_defined ? json(lag_abs / static_cast<double>(lag_defined)) : json(nullptr)},
           {"per_dialogue", per}};
  const auto dir = prepare_dir(c.run_dir);
  write_summary(dir, "eval", rc.decode_seed, rc, mtr, {});
  std::printf("text %.4f audio %.4f | pause-in-speech %.3f answered %.3f (%zu/%zu) | rouge-l %.3f distinct-2 %.3f "
              "| FD %.4f\n",
              acc.text(), acc.audio(), tt.pause_rate(), tt.response_rate(), tt.answered_turn_ends, tt.turn_ends,
              rouge / static_cast<double>(samples.size()), metrics::distinct_2(hyps), fd);
  return 0;
}

int cmd_gradcheck(const Common& c, std::size_t coords, std::size_t frames) {
  auto rc = load_config(c);
  rc.finalize();
  double prim_worst = 0.0;
  std::string prim_where;
  bool ok = true;
  for (const auto& check : grad::primitive_checks()) {
    const auto rep = grad::run_primitive_check(check, 1e-6);
    ok = ok && rep.passed();
    if (rep.max_rel_error >= prim_worst) {
      prim_worst = rep.max_rel_error;
      prim_where = rep.worst;
    }
  }
  std::printf("primitives: %zu ops, max relative error %.3e (%s)\n", grad::primitive_checks().size(), prim_worst,
              prim_where.c_str());
  train::ModelGradCheckOptions o;
  o.coords_per_param = coords;
  o.frames = frames;
  o.seed = c.seed.value_or(1);
  const auto rep = train::check_model_gradients(rc.model, o);
  ok = ok && rep.passed();
  std::printf("full model: %zu coordinates, max relative error %.3e (%s)\n", rep.entries.size(), rep.max_rel_error,
              rep.worst.c_str());
  std::printf("%s\n", ok ? "gradients agree" : "gradient mismatch");
  const auto dir = prepare_dir(c.run_dir);
  json m{{"primitive_max_rel_error", prim_worst},
         {"model_max_rel_error", rep.max_rel_error},
         {"model_worst", rep.worst},
         {"model_coordinates", rep.entries.size()},
         {"passed", ok}};
  write_summary(dir, "gradcheck", o.seed, rc, m, {});
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyad: streaming dyadic listener model (train, generate, evaluate)"};
  app.require_subcommand(1);

  Common synth_c, enc_c, mask_c, train_c, gen_c, eval_c, grad_c;

  auto* synth_cmd = app.add_subcommand("synth-data", "Write a synthetic dialogue dataset and its manifest");
  add_common(synth_cmd, synth_c, "runs/data");
  std::optional<std::size_t> count;
  synth_cmd->add_option("--count", count, "Number of dialogues (overrides dataset_size)");

  auto* enc_cmd = app.add_subcommand("encode-transcript", "Convert a timed transcript to marked frame tokens");
  add_common(enc_cmd, enc_c, "runs/encode");
  std::string enc_input;
  std::optional<std::string> enc_fps;
  std::optional<std::size_t> enc_frames;
  enc_cmd->add_option("--input", enc_input, "Transcript JSONL, one {t,s,e,ch} per word")->required();
  enc_cmd->add_option("--fps", enc_fps, "Frame rate, e.g. 10 or 30000/1001 (default synth_fps)");
  enc_cmd->add_option("--frames", enc_frames, "Frame count (default: through the last word)");

  auto* mask_cmd = app.add_subcommand("build-mask", "Print the token layout and attention mask of a window");
  add_common(mask_cmd, mask_c, "runs/mask");
  std::size_t mask_static = 4, mask_frames = 3;
  mask_cmd->add_option("--static", mask_static, "Static prompt tokens")->capture_default_str();
  mask_cmd->add_option("--frames", mask_frames, "Frames in the window")->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "Train on a manifest split (or freshly synthesized dialogues)");
  add_common(train_cmd, train_c, "runs/train");
  std::string train_data, train_split = "train";
  std::size_t train_limit = 0;
  train_cmd->add_option("--data", train_data, "manifest.jsonl (omit to synthesize from the config)");
  train_cmd->add_option("--split", train_split, "train, val or test")->capture_default_str();
  train_cmd->add_option("--limit", train_limit, "Use at most this many dialogues (0 = all)");

  auto* gen_cmd = app.add_subcommand("generate", "Stream a listener for one dialogue");
  add_common(gen_cmd, gen_c, "runs/generate");
  std::string gen_ckpt, gen_data, gen_id;
  std::uint64_t gen_dialogue_seed = 1;
  std::optional<double> gen_temp;
  gen_cmd->add_option("--checkpoint", gen_ckpt, "Model checkpoint")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--data", gen_data, "manifest.jsonl holding the dialogue");
  gen_cmd->add_option("--id", gen_id, "Dialogue id within --data");
  gen_cmd->add_option("--dialogue-seed", gen_dialogue_seed, "Synthesize the speaker side with this seed")
      ->capture_default_str();
  gen_cmd->add_option("--temperature", gen_temp, "Sampling temperature (0 = greedy)");

  auto* eval_cmd = app.add_subcommand("eval", "Teacher-forced accuracy and streaming metrics");
  add_common(eval_cmd, eval_c, "runs/eval");
  std::string eval_ckpt, eval_data, eval_split = "test";
  std::size_t eval_count = 0;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Model checkpoint")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", eval_data, "manifest.jsonl (omit for held-out synthetic dialogues)");
  eval_cmd->add_option("--split", eval_split, "Split to evaluate")->capture_default_str();
  eval_cmd->add_option("--count", eval_count, "Dialogue limit (synthetic default 4)");

  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare backprop with finite differences");
  add_common(grad_cmd, grad_c, "runs/gradcheck");
  std::size_t grad_coords = 6, grad_frames = 3;
  grad_cmd->add_option("--coords", grad_coords, "Sampled coordinates per parameter")->capture_default_str();
  grad_cmd->add_option("--frames", grad_frames, "Window frames of the model check")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return cmd_synth_data(synth_c, count);
    if (*enc_cmd) return cmd_encode(enc_c, enc_input, enc_fps, enc_frames);
    if (*mask_cmd) return cmd_build_mask(mask_c, mask_static, mask_frames);
    if (*train_cmd) return cmd_train(train_c, train_data, train_split, train_limit);
    if (*gen_cmd) {
      if (!gen_data.empty() && gen_id.empty()) throw ConfigError("--data needs --id");
      return cmd_generate(gen_c, gen_ckpt, gen_data, gen_id, gen_dialogue_seed, gen_temp);
    }
    if (*eval_cmd) return cmd_eval(eval_c, eval_ckpt, eval_data, eval_split, eval_count);
    if (*grad_cmd) return cmd_gradcheck(grad_c, grad_coords, grad_frames);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
